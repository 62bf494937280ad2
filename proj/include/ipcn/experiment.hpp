#pragma once

// Batch experiment driver: JSON configs, dispatch to the exact chain, Monte
// Carlo and mean-field engines, CSV curve output and curve comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipcn/core.hpp"
#include "ipcn/csv.hpp"
#include "ipcn/exact_chain.hpp"
#include "ipcn/meanfield.hpp"
#include "ipcn/montecarlo.hpp"
#include "ipcn/netgen.hpp"
#include "ipcn/philox.hpp"

namespace ipcn {

inline constexpr int kConfigSchemaVersion = 1;

enum class Mode { exact, montecarlo, meanfield_nonlinear, meanfield_linear, equilibrium };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::exact: return "exact";
        case Mode::montecarlo: return "montecarlo";
        case Mode::meanfield_nonlinear: return "meanfield-nonlinear";
        case Mode::meanfield_linear: return "meanfield-linear";
        case Mode::equilibrium: return "equilibrium";
    }
    return "?";
}

inline Mode parse_mode(const std::string& s) {
    for (Mode m : {Mode::exact, Mode::montecarlo, Mode::meanfield_nonlinear, Mode::meanfield_linear,
                   Mode::equilibrium})
        if (s == to_string(m)) return m;
    throw ConfigError("modes: unknown mode '" + s + "'");
}

struct NetworkSpec {
    std::string kind = "barabasi_albert";  // barabasi_albert, ring, complete, identity, matrix, matrix_file, edge_list_file
    std::size_t nodes = 0;
    std::size_t attachments = 2;
    std::uint64_t seed = 1;
    double self_weight = 1.0;
    std::vector<double> matrix;  // row-major, kind == "matrix"
    std::string path;
};

struct ExperimentConfig {
    NetworkSpec network;
    RawConfig urns;            // memory is filled per run from `memories`
    std::vector<int> memories;
    std::vector<Mode> modes;
    std::size_t t_max = 1000;
    std::size_t replicates = 100;
    std::uint64_t seed = 1;
    std::string output_prefix = "ipcn-";
    int state_cap_bits = kDefaultStateCapBits;
    bool per_urn = false;
    unsigned threads = 0;

    bool has(Mode m) const { return std::find(modes.begin(), modes.end(), m) != modes.end(); }
};

/// Builds the interaction matrix a network spec describes.
inline InteractionMatrix build_network(const NetworkSpec& spec) {
    const auto& k = spec.kind;
    if (k == "barabasi_albert") return row_normalize(barabasi_albert(spec.nodes, spec.attachments, spec.seed), spec.self_weight);
    if (k == "ring") return ring(spec.nodes);
    if (k == "complete") return row_normalize(complete_graph(spec.nodes), spec.self_weight);
    if (k == "identity") return InteractionMatrix::identity(spec.nodes);
    if (k == "matrix") {
        const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(spec.matrix.size()))));
        return {n, spec.matrix};
    }
    if (k == "matrix_file") return read_matrix(spec.path);
    if (k == "edge_list_file") return row_normalize(read_edge_list(spec.path, spec.nodes), spec.self_weight);
    throw ConfigError("network.kind: unknown network kind '" + k + "'");
}

namespace detail {

using nlohmann::json;

template <class T>
T get_field(const json& j, const std::string& path, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type");
    }
}

inline std::vector<std::int64_t> int_vector(const json& v, std::size_t n, const std::string& path) {
    try {
        if (v.is_number_integer()) return std::vector<std::int64_t>(n, v.get<std::int64_t>());
        if (v.is_array()) {
            auto out = v.get<std::vector<std::int64_t>>();
            if (out.size() != n)
                throw ConfigError(path + ": has " + std::to_string(out.size()) + " entries, network has " +
                                  std::to_string(n) + " urns");
            return out;
        }
    } catch (const json::exception&) {
    }
    throw ConfigError(path + ": expected an integer or an array of integers");
}

inline std::pair<std::int64_t, std::int64_t> int_range(const json& v, const std::string& path) {
    if (v.is_number_integer()) return {v.get<std::int64_t>(), v.get<std::int64_t>()};
    if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer()) {
        auto lo = v[0].get<std::int64_t>(), hi = v[1].get<std::int64_t>();
        if (lo > hi) throw ConfigError(path + ": range lower bound exceeds upper bound");
        return {lo, hi};
    }
    throw ConfigError(path + ": expected an integer or a [lo, hi] integer range");
}

inline NetworkSpec parse_network(const json& j, const std::filesystem::path& base) {
    if (!j.is_object()) throw ConfigError("network: expected an object");
    NetworkSpec s;
    s.kind = get_field<std::string>(j, "network", "kind", s.kind);
    s.nodes = get_field<std::size_t>(j, "network", "nodes", 0);
    s.attachments = get_field<std::size_t>(j, "network", "attachments", 2);
    s.seed = get_field<std::uint64_t>(j, "network", "seed", 1);
    s.self_weight = get_field<double>(j, "network", "self_weight", 1.0);
    if (s.kind == "matrix") {
        if (!j.contains("matrix") || !j["matrix"].is_array()) throw ConfigError("network.matrix: expected array of rows");
        for (const auto& row : j["matrix"]) {
            if (!row.is_array() || row.size() != j["matrix"].size())
                throw ConfigError("network.matrix: rows must form a square matrix");
            for (const auto& v : row) {
                if (!v.is_number()) throw ConfigError("network.matrix: entries must be numbers");
                s.matrix.push_back(v.get<double>());
            }
        }
    } else if (s.kind == "matrix_file" || s.kind == "edge_list_file") {
        const auto p = get_field<std::string>(j, "network", "path", "");
        if (p.empty()) throw ConfigError("network.path: required for kind '" + s.kind + "'");
        const std::filesystem::path fp(p);
        s.path = (fp.is_absolute() ? fp : base / fp).string();
    } else if (s.nodes == 0) {
        throw ConfigError("network.nodes: required and positive for kind '" + s.kind + "'");
    }
    return s;
}

}  // namespace detail

/// Parses a config document. Relative file paths resolve against base_dir.
inline ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".") {
    using detail::get_field;
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    const int version = get_field<int>(j, "config", "schema_version", -1);
    if (version != kConfigSchemaVersion)
        throw ConfigError("schema_version: expected " + std::to_string(kConfigSchemaVersion));

    ExperimentConfig c;
    if (!j.contains("network")) throw ConfigError("network: required");
    c.network = detail::parse_network(j["network"], base_dir);
    const InteractionMatrix S = build_network(c.network);
    const std::size_t n = S.size();

    if (!j.contains("urns") || !j["urns"].is_object()) throw ConfigError("urns: required object");
    const auto& u = j["urns"];
    RawConfig raw;
    raw.urns = static_cast<int>(n);
    raw.S = S;
    if (u.contains("random")) {
        const auto& r = u["random"];
        PhiloxEngine eng(get_field<std::uint64_t>(r, "urns.random", "seed", 1), 1);
        const auto total = detail::int_range(r.value("T", nlohmann::json(25)), "urns.random.T");
        auto need = [&](const char* key) {
            if (!r.contains(key)) throw ConfigError(std::string("urns.random.") + key + ": required");
            return detail::int_range(r[key], std::string("urns.random.") + key);
        };
        const auto red = need("R"), dr = need("delta_r"), db = need("delta_b");
        for (std::size_t i = 0; i < n; ++i) {
            raw.total.push_back(eng.uniform_int(total.first, total.second));
            raw.red.push_back(eng.uniform_int(red.first, red.second));
            raw.delta_r.push_back(eng.uniform_int(dr.first, dr.second));
            raw.delta_b.push_back(eng.uniform_int(db.first, db.second));
        }
    } else {
        for (const char* key : {"R", "T", "delta_r", "delta_b"})
            if (!u.contains(key)) throw ConfigError(std::string("urns.") + key + ": required");
        raw.red = detail::int_vector(u["R"], n, "urns.R");
        raw.total = detail::int_vector(u["T"], n, "urns.T");
        raw.delta_r = detail::int_vector(u["delta_r"], n, "urns.delta_r");
        raw.delta_b = detail::int_vector(u["delta_b"], n, "urns.delta_b");
    }

    if (!j.contains("memory")) throw ConfigError("memory: required");
    if (j["memory"].is_number_integer())
        c.memories = {j["memory"].get<int>()};
    else if (j["memory"].is_array() && !j["memory"].empty() &&
             std::all_of(j["memory"].begin(), j["memory"].end(), [](const auto& v) { return v.is_number_integer(); }))
        c.memories = j["memory"].get<std::vector<int>>();
    else
        throw ConfigError("memory: expected a positive integer or a nonempty array of them");
    for (int m : c.memories)
        if (m < 1) throw ConfigError("memory: values must be positive");
    raw.memory = c.memories.front();
    try {
        raw.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("urns: ") + e.what());
    }
    c.urns = std::move(raw);

    if (!j.contains("modes") || !j["modes"].is_array() || j["modes"].empty())
        throw ConfigError("modes: required nonempty array");
    for (const auto& m : j["modes"]) {
        if (!m.is_string()) throw ConfigError("modes: entries must be strings");
        c.modes.push_back(parse_mode(m.get<std::string>()));
    }
    c.t_max = get_field<std::size_t>(j, "config", "t_max", c.t_max);
    c.replicates = get_field<std::size_t>(j, "config", "replicates", c.replicates);
    c.seed = get_field<std::uint64_t>(j, "config", "seed", c.seed);
    c.output_prefix = get_field<std::string>(j, "config", "output", c.output_prefix);
    c.state_cap_bits = get_field<int>(j, "config", "state_cap_bits", c.state_cap_bits);
    c.per_urn = get_field<bool>(j, "config", "per_urn", false);
    if (c.t_max < 1) throw ConfigError("t_max: must be at least 1");
    if (c.replicates < 1) throw ConfigError("replicates: must be at least 1");
    if (c.has(Mode::exact))
        for (int m : c.memories)
            if (static_cast<int>(n) * m > c.state_cap_bits)
                throw CapExceeded("modes: exact needs N*M = " + std::to_string(n * static_cast<std::size_t>(m)) +
                                  " state bits, cap is " + std::to_string(c.state_cap_bits));
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j, std::filesystem::path(path).parent_path());
}

/// One network-average curve on the time grid 1..T.
struct Curve {
    std::string label;
    std::vector<double> time;
    std::vector<double> value;
};

struct CompareReport {
    double linf = 0.0;
    double l1_mean = 0.0;
    double final_diff = 0.0;  // b - a at the last common time
    std::size_t points = 0;
};

/// Distances between two curves on the same time grid, restricted to t >= from_time.
inline CompareReport compare(const Curve& a, const Curve& b, double from_time = -INFINITY) {
    if (a.time.size() != b.time.size()) throw ConfigError("compare: misaligned time grids (different lengths)");
    CompareReport r;
    double sum = 0.0;
    for (std::size_t k = 0; k < a.time.size(); ++k) {
        if (a.time[k] != b.time[k]) throw ConfigError("compare: misaligned time grids at row " + std::to_string(k + 1));
        if (a.time[k] < from_time) continue;
        const double d = b.value[k] - a.value[k];
        r.linf = std::max(r.linf, std::abs(d));
        sum += std::abs(d);
        r.final_diff = d;
        ++r.points;
    }
    if (r.points == 0) throw ConfigError("compare: no common points in the requested window");
    r.l1_mean = sum / static_cast<double>(r.points);
    return r;
}

/// Reads the "avg" rows of a curve CSV (time, urn, value, ...).
inline Curve read_curve(const std::string& path) {
    const auto t = csv::read(path);
    if (t.header.size() < 3 || t.header[0] != "time" || t.header[1] != "urn")
        throw ConfigError("'" + path + "' is not a curve file (expected header time,urn,<value>,...)");
    Curve c{path, {}, {}};
    for (const auto& row : t.rows) {
        if (row.size() < 3) throw ConfigError("'" + path + "': short row");
        if (row[1] != "avg") continue;
        c.time.push_back(csv::parse_double(row[0]));
        c.value.push_back(csv::parse_double(row[2]));
    }
    return c;
}

inline CompareReport compare_files(const std::string& a, const std::string& b, double from_time = -INFINITY) {
    return compare(read_curve(a), read_curve(b), from_time);
}

/// Result of one run: the curves, the files written and a JSON summary.
struct RunReport {
    std::map<std::string, Curve> curves;  // keyed by "<mode>" or "M<m>/<mode>"
    std::vector<std::string> artifacts;
    nlohmann::json summary;
};

namespace detail {

inline Curve curve_from_trajectory(const std::string& label, const InfectionTrajectory& tr, std::size_t t_max) {
    Curve c{label, {}, {}};
    for (std::size_t t = 1; t <= t_max; ++t) {
        c.time.push_back(static_cast<double>(t));
        c.value.push_back(tr.network_average[t]);
    }
    return c;
}

inline void write_value_curve(const std::string& path, const std::vector<std::vector<double>>& per_time,
                              std::size_t t_max, const std::string& system, bool per_urn) {
    csv::Writer w(path);
    w.row("time", "urn", "P", "system");
    for (std::size_t t = 1; t <= t_max; ++t) {
        const auto& row = per_time[t];
        double avg = 0.0;
        for (double v : row) avg += v;
        avg /= static_cast<double>(row.size());
        w.row(t, "avg", avg, system);
        if (per_urn)
            for (std::size_t i = 0; i < row.size(); ++i) w.row(t, i + 1, row[i], system);
    }
}

inline nlohmann::json radius_json(const SpectralRadius& r) {
    static const char* names[] = {"trivial", "power", "dense_eigen", "row_sum_bound"};
    return {{"value", r.value}, {"converged", r.converged}, {"method", names[static_cast<int>(r.method)]}};
}

}  // namespace detail

/// Runs every configured mode for every configured memory. A declined
/// equilibrium is recorded in the summary and reported as a NumericalError
/// once every artifact is written.
inline RunReport run(const ExperimentConfig& cfg) {
    RunReport rep;
    auto& sum = rep.summary;
    const std::size_t n = static_cast<std::size_t>(cfg.urns.urns);
    sum["schema_version"] = kConfigSchemaVersion;
    sum["urns"] = n;
    sum["t_max"] = cfg.t_max;
    sum["replicates"] = cfg.replicates;
    sum["seed"] = cfg.seed;
    sum["runs"] = nlohmann::json::array();

    auto path_for = [&](int m, const std::string& stem) {
        const std::string tag = cfg.memories.size() > 1 ? "M" + std::to_string(m) + "-" : "";
        const std::string p = cfg.output_prefix + tag + stem;
        const auto parent = std::filesystem::path(p).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        rep.artifacts.push_back(p);
        return p;
    };

    std::vector<std::string> failures;
    for (int m : cfg.memories) {
        RawConfig raw = cfg.urns;
        raw.memory = m;
        const NetworkParams params = normalize(raw);
        nlohmann::json msum;
        msum["memory"] = m;
        std::map<std::string, Curve> curves;

        if (cfg.has(Mode::montecarlo)) {
            const auto s = average_replicates(raw, cfg.t_max, cfg.replicates, cfg.seed, cfg.threads);
            csv::Writer w(path_for(m, "montecarlo.csv"));
            w.row("time", "urn", "empirical_sum", "replicate_count");
            Curve c{"montecarlo", {}, {}};
            for (std::size_t t = 1; t <= cfg.t_max; ++t) {
                w.row(t, "avg", s.network_average[t - 1], cfg.replicates);
                if (cfg.per_urn)
                    for (std::size_t i = 0; i < n; ++i) w.row(t, i + 1, s.empirical[(t - 1) * n + i], cfg.replicates);
                c.time.push_back(static_cast<double>(t));
                c.value.push_back(s.network_average[t - 1]);
            }
            msum["montecarlo"] = {{"final_average_empirical_sum", s.network_average.back()}};
            curves["montecarlo"] = std::move(c);
        }

        for (auto [mode, kind] : {std::pair{Mode::meanfield_nonlinear, SystemKind::nonlinear},
                                  std::pair{Mode::meanfield_linear, SystemKind::linear}}) {
            if (!cfg.has(mode)) continue;
            const auto tr = iterate(kind, params, raw.S, cfg.t_max);
            detail::write_value_curve(path_for(m, std::string(to_string(mode)) + ".csv"), tr.P, cfg.t_max,
                                      to_string(kind), cfg.per_urn);
            msum[to_string(mode)] = {{"final_average", tr.network_average.back()}, {"clamp_events", tr.clamp_events}};
            curves[to_string(mode)] = detail::curve_from_trajectory(to_string(mode), tr, cfg.t_max);
        }

        if (cfg.has(Mode::equilibrium)) {
            const auto sys = build_linear_system(params, raw.S);
            nlohmann::json e;
            try {
                const auto eq = equilibrium(sys);
                csv::Writer w(path_for(m, "equilibrium.csv"));
                w.row("urn", "P_star");
                for (std::size_t i = 0; i < n; ++i) w.row(i + 1, eq.per_urn[i]);
                w.row("spectral_radius", eq.radius.value);
                e = {{"P_star", eq.per_urn}, {"spectral_radius", detail::radius_json(eq.radius)},
                     {"residual", eq.residual}};
            } catch (const NumericalError& err) {
                e = {{"declined", err.what()}, {"spectral_radius", detail::radius_json(spectral_radius(sys.J))}};
                failures.push_back("M=" + std::to_string(m) + " equilibrium: " + err.what());
            }
            msum["equilibrium"] = e;
        }

        if (cfg.has(Mode::exact)) {
            const TransitionKernel kernel(params, raw.S, cfg.state_cap_bits);
            const auto structure = check_irreducible_aperiodic(kernel);
            nlohmann::json ex{{"irreducible", structure.irreducible}, {"aperiodic", structure.aperiodic},
                              {"period", structure.period}, {"states", kernel.state_count()}};
            // The all-zeros window corresponds to P(0..M-1) = 0, so s steps
            // from it give the marginal at time M - 1 + s.
            const std::size_t steps = cfg.t_max + 1 > static_cast<std::size_t>(m) ? cfg.t_max + 1 - static_cast<std::size_t>(m) : 0;
            const auto rows = transient_marginals(kernel, all_zeros_distribution(kernel), steps, cfg.threads);
            std::vector<std::vector<double>> per_time(cfg.t_max + 1, std::vector<double>(n, 0.0));
            for (std::size_t s = 0; s < rows.size(); ++s) per_time[static_cast<std::size_t>(m) - 1 + s] = rows[s];
            detail::write_value_curve(path_for(m, "exact.csv"), per_time, cfg.t_max, "exact", cfg.per_urn);
            Curve c{"exact", {}, {}};
            for (std::size_t t = 1; t <= cfg.t_max; ++t) {
                c.time.push_back(static_cast<double>(t));
                double a = 0.0;
                for (double v : per_time[t]) a += v;
                c.value.push_back(a / static_cast<double>(n));
            }
            curves["exact"] = std::move(c);
            if (structure.irreducible && structure.aperiodic) {
                StationaryOptions opt;
                opt.threads = cfg.threads;
                const auto st = stationary_distribution(kernel, opt);
                csv::Writer w(path_for(m, "exact-stationary.csv"));
                w.row("state", "probability");
                for (std::size_t s = 0; s < st.pi.size(); ++s) w.row(s, st.pi[s]);
                ex["stationary_marginals"] = newest_marginals(st.pi, kernel);
                ex["stationary_iterations"] = st.iterations;
                ex["stationary_residual"] = st.residual;
            } else {
                ex["stationary_marginals"] = nullptr;
            }
            msum["exact"] = ex;
        }

        nlohmann::json dist = nlohmann::json::array();
        for (auto a = curves.begin(); a != curves.end(); ++a)
            for (auto b = std::next(a); b != curves.end(); ++b) {
                const auto r = compare(a->second, b->second);
                dist.push_back({{"a", a->first}, {"b", b->first}, {"linf", r.linf}, {"l1_mean", r.l1_mean},
                                {"final_diff", r.final_diff}});
            }
        msum["distances"] = dist;
        sum["runs"].push_back(msum);
        const std::string tag = cfg.memories.size() > 1 ? "M" + std::to_string(m) + "/" : "";
        for (auto& [k, v] : curves) rep.curves[tag + k] = std::move(v);
    }

    const std::string summary_path = cfg.output_prefix + "summary.json";
    {
        const auto parent = std::filesystem::path(summary_path).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        std::ofstream out(summary_path, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + summary_path + "'");
        out << sum.dump(2) << '\n';
    }
    rep.artifacts.push_back(summary_path);
    if (!failures.empty()) {
        std::string msg = "numerical failure after writing all artifacts";
        for (const auto& f : failures) msg += "; " + f;
        throw NumericalError(msg);
    }
    return rep;
}

/// Parameter sets for the three published figure setups. Ranges are
/// inclusive and sampled under the given seed.
inline nlohmann::json figure_config(int figure, std::uint64_t seed) {
    nlohmann::json j{{"schema_version", kConfigSchemaVersion},
                     {"memory", {1, 2, 3}},
                     {"modes", {"montecarlo", "meanfield-nonlinear", "meanfield-linear"}},
                     {"t_max", 1000},
                     {"replicates", 100},
                     {"seed", seed}};
    switch (figure) {
        case 1:
            j["network"] = {{"kind", "barabasi_albert"}, {"nodes", 100}, {"attachments", 2}, {"seed", seed}};
            j["urns"] = {{"random", {{"seed", seed}, {"T", 25}, {"R", {1, 10}}, {"delta_r", {30, 50}}, {"delta_b", {15, 30}}}}};
            break;
        case 2:
            j["network"] = {{"kind", "barabasi_albert"}, {"nodes", 10}, {"attachments", 2}, {"seed", seed}};
            j["urns"] = {{"random", {{"seed", seed}, {"T", 25}, {"R", {2, 9}}, {"delta_r", {20, 28}}, {"delta_b", {20, 29}}}}};
            break;
        case 3:
            j["network"] = {{"kind", "barabasi_albert"}, {"nodes", 10}, {"attachments", 2}, {"seed", seed}};
            j["urns"] = {{"R", 12}, {"T", 25}, {"delta_r", 11}, {"delta_b", 11}};
            j["modes"].push_back("equilibrium");
            break;
        default:
            throw ConfigError("reproduce-fig: figure must be 1, 2 or 3");
    }
    return j;
}

}  // namespace ipcn
