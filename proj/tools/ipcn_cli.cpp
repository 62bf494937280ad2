// Command-line driver for the urn-network engine.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ipcn/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kNumericalError = 3, kCapExceeded = 4 };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
    auto* opt = cmd->add_option("--config", c.config, "Experiment config (JSON)");
    if (needs_config) opt->required();
    cmd->add_option("--seed", c.seed, "Master seed, overrides the config");
    cmd->add_option("--out", c.out, "Output prefix, overrides the config");
    cmd->add_option("--threads", c.threads, std::string("Worker threads (default: $") + ipcn::kThreadsEnv +
                                                " or hardware concurrency)");
}

ipcn::ExperimentConfig load(const Common& c) {
    auto cfg = ipcn::load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.out) cfg.output_prefix = *c.out;
    cfg.threads = c.threads;
    return cfg;
}

void report(const ipcn::RunReport& rep) {
    for (const auto& a : rep.artifacts) std::cout << a << '\n';
}

int run_modes(const Common& c, std::initializer_list<ipcn::Mode> modes) {
    auto cfg = load(c);
    if (modes.size() != 0) cfg.modes.assign(modes.begin(), modes.end());
    report(ipcn::run(cfg));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-memory interacting urn network: exact chain, Monte Carlo and mean-field engine"};
    app.require_subcommand(1);

    Common common;

    auto* run_cmd = app.add_subcommand("run", "Run every mode listed in the config");
    add_common(run_cmd, common, true);

    auto* gen = app.add_subcommand("gen-network", "Generate an interaction network");
    add_common(gen, common, false);
    ipcn::NetworkSpec net;
    gen->add_option("--kind", net.kind, "barabasi_albert, ring, complete or identity")
        ->check(CLI::IsMember({"barabasi_albert", "ring", "complete", "identity"}));
    gen->add_option("--nodes", net.nodes, "Number of urns");
    gen->add_option("--attachments", net.attachments, "Edges per new node (preferential attachment)");
    gen->add_option("--self-weight", net.self_weight, "Diagonal weight before row normalization");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo replicates of the urn network");
    add_common(sim, common, true);

    auto* exact = app.add_subcommand("exact", "Exact Markov-chain transients and stationary law");
    add_common(exact, common, true);

    auto* mf = app.add_subcommand("meanfield", "Iterate the mean-field dynamical systems");
    add_common(mf, common, true);
    std::string system = "both";
    mf->add_option("--system", system, "nonlinear, linear or both")
        ->check(CLI::IsMember({"nonlinear", "linear", "both"}));

    auto* eq = app.add_subcommand("equilibrium", "Equilibrium and spectral radius of the linear system");
    add_common(eq, common, true);

    auto* cmp = app.add_subcommand("compare", "Distances between two curve CSVs");
    std::string curve_a, curve_b;
    double from_time = 1.0;
    cmp->add_option("a", curve_a, "First curve CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("b", curve_b, "Second curve CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("--from", from_time, "Ignore times before this one");

    auto* fig = app.add_subcommand("reproduce-fig", "Run one of the three published figure setups");
    add_common(fig, common, false);
    int figure = 0;
    std::optional<std::size_t> replicates, t_max;
    fig->add_option("figure", figure, "Figure number")->required()->check(CLI::IsMember({1, 2, 3}));
    fig->add_option("--replicates", replicates, "Monte Carlo replicates (default 100)");
    fig->add_option("--t-max", t_max, "Horizon (default 1000)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*run_cmd) return run_modes(common, {});
        if (*sim) return run_modes(common, {ipcn::Mode::montecarlo});
        if (*exact) return run_modes(common, {ipcn::Mode::exact});
        if (*eq) return run_modes(common, {ipcn::Mode::equilibrium});
        if (*mf) {
            if (system == "nonlinear") return run_modes(common, {ipcn::Mode::meanfield_nonlinear});
            if (system == "linear") return run_modes(common, {ipcn::Mode::meanfield_linear});
            return run_modes(common, {ipcn::Mode::meanfield_nonlinear, ipcn::Mode::meanfield_linear});
        }
        if (*gen) {
            if (!common.config.empty()) {
                std::ifstream in(common.config);
                if (!in) throw ipcn::ConfigError("cannot open config '" + common.config + "'");
                const auto j = nlohmann::json::parse(in);
                if (!j.contains("network")) throw ipcn::ConfigError("network: required");
                net = ipcn::detail::parse_network(j["network"], std::filesystem::path(common.config).parent_path());
            }
            if (common.seed) net.seed = *common.seed;
            const std::string prefix = common.out.value_or("network-");
            const auto parent = std::filesystem::path(prefix).parent_path();
            if (!parent.empty()) std::filesystem::create_directories(parent);
            if (net.kind == "barabasi_albert" || net.kind == "complete") {
                const auto g = net.kind == "complete" ? ipcn::complete_graph(net.nodes)
                                                      : ipcn::barabasi_albert(net.nodes, net.attachments, net.seed);
                ipcn::write_edge_list(g, prefix + "edges.csv");
                std::cout << prefix << "edges.csv\n";
            }
            ipcn::write_matrix(ipcn::build_network(net), prefix + "matrix.csv");
            std::cout << prefix << "matrix.csv\n";
            return kOk;
        }
        if (*cmp) {
            const auto r = ipcn::compare_files(curve_a, curve_b, from_time);
            std::cout << "metric,value\n"
                      << "linf," << ipcn::csv::format_double(r.linf) << '\n'
                      << "l1_mean," << ipcn::csv::format_double(r.l1_mean) << '\n'
                      << "final_diff," << ipcn::csv::format_double(r.final_diff) << '\n'
                      << "points," << r.points << '\n';
            return kOk;
        }
        if (*fig) {
            const std::uint64_t seed = common.seed.value_or(1);
            auto j = ipcn::figure_config(figure, seed);
            if (replicates) j["replicates"] = *replicates;
            if (t_max) j["t_max"] = *t_max;
            j["output"] = common.out.value_or("fig" + std::to_string(figure) + "/");
            auto cfg = ipcn::parse_config(j);
            cfg.threads = common.threads;
            report(ipcn::run(cfg));
            return kOk;
        }
    } catch (const ipcn::CapExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCapExceeded;
    } catch (const ipcn::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
