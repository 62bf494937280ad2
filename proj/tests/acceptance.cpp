// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ipcn/exact_chain.hpp"
#include "ipcn/experiment.hpp"
#include "ipcn/meanfield.hpp"
#include "ipcn/montecarlo.hpp"

using namespace ipcn;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void check(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = std::to_string(secs) + " s";
    if (budget_s > 0 && secs >= budget_s) {
        o.pass = false;
        timing += " over budget " + std::to_string(budget_s) + " s";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::vector<double> random_stochastic(std::mt19937_64& g, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += (s[i * n + j] = u(g) < 0.4 ? 0.0 : u(g));
        if (sum == 0.0) sum = s[i * n + i] = 1.0;
        for (std::size_t j = 0; j < n; ++j) s[i * n + j] /= sum;
    }
    return s;
}

NetworkParams random_params(std::mt19937_64& g, int n, int m) {
    std::uniform_real_distribution<double> rho(0.02, 0.98), delta(0.0, 3.0);
    std::vector<double> r(static_cast<std::size_t>(n)), dr(r.size()), db(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = rho(g);
        dr[i] = delta(g);
        db[i] = delta(g);
    }
    return NetworkParams::heterogeneous(m, r, dr, db);
}

// Stationary law of the homogeneous two-urn memory-one chain, indexed
// [a1][a2] for urn 1 draw a1 and urn 2 draw a2.
std::array<std::array<double, 2>, 2> two_urn_closed_form(double rho, double d, double s11, double s21) {
    const double sig = 1.0 - rho;
    const double c = 1.0 - s11 - s21 + 2.0 * s11 * s21;
    const double den = c * d * d + 2.0 * d + 1.0;
    const double mixed = rho * sig * (1.0 + 2.0 * d) / den;
    return {{{(2.0 * sig * sig * d + sig * sig + c * sig * d * d) / den, mixed},
             {mixed, rho * (2.0 * d - sig - 2.0 * sig * d + c * d * d + 1.0) / den}}};
}

double pairwise_sum(std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) s += v[k];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

// Sum over all binary configurations of prod (a x + (1 - a)(1 - x)).
double configuration_mass(const std::vector<double>& x) {
    const std::size_t bits = x.size();
    std::vector<double> terms(std::size_t{1} << bits);
    for (std::size_t a = 0; a < terms.size(); ++a) {
        double prod = 1.0;
        for (std::size_t b = 0; b < bits; ++b) prod *= ((a >> b) & 1u) ? x[b] : 1.0 - x[b];
        terms[a] = prod;
    }
    return pairwise_sum(terms, 0, terms.size());
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("ipcn_acceptance_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

int main() {
    check(1, "two-urn stationary law matches closed form", 1.0, [] {
        std::mt19937_64 g(101);
        std::uniform_real_distribution<double> u(0.01, 0.99), d(0.01, 5.0);
        double worst_pi = 0.0, worst_marg = 0.0;
        for (int rep = 0; rep < 25; ++rep) {
            const double rho = u(g), delta = d(g), s11 = u(g), s21 = u(g);
            const TransitionKernel k(NetworkParams::homogeneous(2, 1, rho, delta),
                                     InteractionMatrix{{s11, 1 - s11}, {s21, 1 - s21}});
            const auto pi = stationary_distribution(k).pi;
            const auto e = two_urn_closed_form(rho, delta, s11, s21);
            for (int a1 = 0; a1 < 2; ++a1)
                for (int a2 = 0; a2 < 2; ++a2)
                    worst_pi = std::max(worst_pi, std::abs(pi[static_cast<std::size_t>(a1 + 2 * a2)] - e[a1][a2]));
            for (double m : newest_marginals(pi, k)) worst_marg = std::max(worst_marg, std::abs(m - rho));
        }
        return Outcome{worst_pi <= 1e-9 && worst_marg <= 1e-10,
                       "25 configs, max |pi - closed form| = " + sci(worst_pi) + " (tol 1e-9), max |marginal - rho| = " +
                           sci(worst_marg) + " (tol 1e-10)"};
    });

    check(2, "rearranged nonlinear step equals direct enumeration", 30.0, [] {
        std::mt19937_64 g(202);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0.0;
        int cases = 0;
        for (int rep = 0; rep < 1200; ++rep, ++cases) {
            const int n = 1 + rep % 3, m = 1 + (rep / 3) % 4;
            const auto p = random_params(g, n, m);
            const InteractionMatrix S(static_cast<std::size_t>(n), random_stochastic(g, static_cast<std::size_t>(n)));
            std::vector<std::vector<double>> hist(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(n)));
            for (auto& row : hist)
                for (auto& v : row) v = u(g);
            const auto h = InfectionHistory::from_oldest_first(hist);
            const auto a = step_nonlinear(h, p, S), b = step_direct(h, p, S);
            for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        }
        return Outcome{worst <= 1e-12, std::to_string(cases) + " cases (N<=3, M<=4), max diff = " + sci(worst) + " (tol 1e-12)"};
    });

    check(3, "configuration-mass identities (single and double product)", 0.0, [] {
        std::mt19937_64 g(303);
        std::uniform_real_distribution<double> real(-0.5, 1.5), pos(1e-6, 1.0);
        double worst_single = 0.0, worst_double = 0.0;
        for (int rep = 0; rep < 1000; ++rep) {
            std::vector<double> x(static_cast<std::size_t>(1 + rep % 4));
            for (auto& v : x) v = real(g);
            worst_single = std::max(worst_single, std::abs(configuration_mass(x) - 1.0));
            const int n = 1 + rep % 4, m = 1 + (rep / 4) % 4;
            std::vector<double> xx(static_cast<std::size_t>(n * m));
            for (auto& v : xx) v = pos(g);
            worst_double = std::max(worst_double, std::abs(configuration_mass(xx) - 1.0));
        }
        return Outcome{worst_single <= 1e-12 && worst_double <= 1e-12,
                       "1000 draws each, N<=4, M<=4: max |sum - 1| = " + sci(worst_single) + " (single), " +
                           sci(worst_double) + " (double), tol 1e-12"};
    });

    check(4, "memory-one linear system: stability and equilibria", 0.0, [] {
        std::mt19937_64 g(404);
        double max_radius = 0.0;
        for (int rep = 0; rep < 120; ++rep) {
            const int n = 1 + static_cast<int>(g() % 50);
            const auto p = random_params(g, n, 1);
            const InteractionMatrix S(static_cast<std::size_t>(n), random_stochastic(g, static_cast<std::size_t>(n)));
            const auto r = spectral_radius(build_linear_system(p, S).J);
            if (!r.converged) return Outcome{false, "spectral radius not certified at N=" + std::to_string(n)};
            max_radius = std::max(max_radius, r.value);
        }
        double homog = 0.0;
        std::uniform_real_distribution<double> u(0.01, 0.99), d(0.0, 4.0);
        for (int rep = 0; rep < 50; ++rep) {
            const int n = 1 + static_cast<int>(g() % 50);
            const double rho = u(g);
            const auto eq = equilibrium(build_linear_system(NetworkParams::homogeneous(n, 1, rho, d(g)),
                                                            InteractionMatrix(static_cast<std::size_t>(n), random_stochastic(g, static_cast<std::size_t>(n)))));
            for (double v : eq.per_urn) homog = std::max(homog, std::abs(v - rho));
        }
        double ident = 0.0;
        for (int rep = 0; rep < 50; ++rep) {
            const int n = 1 + static_cast<int>(g() % 50);
            const auto p = random_params(g, n, 1);
            const auto eq = equilibrium(build_linear_system(p, InteractionMatrix::identity(static_cast<std::size_t>(n))));
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double r = p.rho[i], dr = p.delta_r[i], db = p.delta_b[i];
                ident = std::max(ident, std::abs(eq.per_urn[i] - r * (1 + dr) / (1 + db + r * (dr - db))));
            }
        }
        return Outcome{max_radius < 1.0 && homog <= 1e-10 && ident <= 1e-10,
                       "120 networks N<=50: max spectral radius = " + sci(max_radius) +
                           " (< 1); homogeneous |P* - rho| = " + sci(homog) + ", S=I closed form diff = " +
                           sci(ident) + " (tol 1e-10)"};
    });

    check(5, "ring transient law", 0.0, [] {
        double worst = 0.0;
        for (int n : {3, 6}) {
            const double rho = 0.35, delta = 0.8;
            std::vector<double> e(static_cast<std::size_t>(n * n), 0.0);
            for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i * n + (i + 1) % n)] = 1.0;
            const TransitionKernel k(NetworkParams::homogeneous(n, 1, rho, delta), InteractionMatrix(static_cast<std::size_t>(n), e));
            for (double p0 : {0.0, 1.0}) {
                DistributionVector mu(k.state_count(), 0.0);
                mu[p0 == 0.0 ? 0 : k.state_count() - 1] = 1.0;
                const auto rows = transient_marginals(k, mu, 100);
                const double q = delta / (1 + delta);
                for (std::size_t t = 0; t <= 100; ++t)
                    for (double v : rows[t]) worst = std::max(worst, std::abs(v - (rho + std::pow(q, static_cast<double>(t)) * (p0 - rho))));
            }
        }
        return Outcome{worst <= 1e-10, "N in {3,6}, P0 in {0,1}, t<=100: max diff = " + sci(worst) + " (tol 1e-10)"};
    });

    check(6, "two-fold joint law and its deviation term", 0.0, [] {
        std::mt19937_64 g(606);
        std::uniform_real_distribution<double> u(0.01, 0.99), d(0.01, 5.0);
        double worst = 0.0, dev_at_one = 0.0;
        for (int rep = 0; rep < 40; ++rep) {
            const double rho = u(g), delta = d(g), s21 = u(g), s11 = rep % 8 == 0 ? 1.0 : u(g);
            const TransitionKernel k(NetworkParams::homogeneous(2, 1, rho, delta),
                                     InteractionMatrix{{s11, 1 - s11}, {s21, 1 - s21}});
            const auto j = two_fold_joint(stationary_distribution(k).pi, k, 0);
            const double sig = 1 - rho;
            const double dev = two_urn_closed_form(rho, delta, s11, s21)[0][1] * (1 - s11) * delta / (1 + delta);
            const double expect[2][2] = {{sig * (sig + delta) / (1 + delta) - dev, sig * rho / (1 + delta) + dev},
                                         {sig * rho / (1 + delta) + dev, rho * (rho + delta) / (1 + delta) - dev}};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) worst = std::max(worst, std::abs(j[a][b] - expect[a][b]));
            if (s11 == 1.0) {
                const double single = sig * (sig + delta) / (1 + delta);
                dev_at_one = std::max(dev_at_one, std::abs(j[0][0] - single));
            }
        }
        return Outcome{worst <= 1e-9 && dev_at_one <= 1e-9,
                       "40 configs: max diff = " + sci(worst) + " (tol 1e-9); deviation at s11=1: " + sci(dev_at_one)};
    });

    check(7, "homogeneous 10-node network reaches rho", 120.0, [] {
        auto cfg = parse_config(figure_config(3, 1));
        cfg.output_prefix = (scratch("fig3") / "").string();
        const auto rep = run(cfg);
        double worst = 0.0;
        std::string detail;
        for (int m = 1; m <= 3; ++m)
            for (const char* mode : {"montecarlo", "meanfield-linear", "meanfield-nonlinear"}) {
                const double v = rep.curves.at("M" + std::to_string(m) + "/" + mode).value.back();
                worst = std::max(worst, std::abs(v - 0.48));
                detail += " M" + std::to_string(m) + " " + mode + "=" + std::to_string(v);
            }
        return Outcome{worst <= 0.02, "max |value(t=1000) - 0.48| = " + sci(worst) + " (tol 0.02);" + detail};
    });

    check(8, "mean-field gap non-increasing in memory (10-node heterogeneous)", 0.0, [] {
        auto j = figure_config(2, 1);
        j["modes"] = {"montecarlo", "meanfield-nonlinear"};
        j["replicates"] = 1000;
        auto cfg = parse_config(j);
        cfg.output_prefix = (scratch("fig2") / "").string();
        const auto rep = run(cfg);
        std::vector<double> gap;
        std::string detail = "L-inf gap over t in [100,1000], 1000 replicates:";
        for (int m = 1; m <= 3; ++m) {
            const auto tag = "M" + std::to_string(m) + "/";
            gap.push_back(compare(rep.curves.at(tag + "montecarlo"), rep.curves.at(tag + "meanfield-nonlinear"), 100).linf);
            detail += " M" + std::to_string(m) + "=" + sci(gap.back());
        }
        return Outcome{gap[1] <= gap[0] && gap[2] <= gap[1], detail};
    });

    check(9, "memory one with S=I: exact chain equals linear system", 0.0, [] {
        const auto p = NetworkParams::heterogeneous(1, {0.1, 0.45, 0.7, 0.93}, {0.5, 2.0, 0.0, 1.2}, {1.5, 0.3, 0.8, 0.0});
        const auto S = InteractionMatrix::identity(4);
        const TransitionKernel k(p, S);
        const auto exact = transient_marginals(k, all_zeros_distribution(k), 200);
        const auto lin = iterate(SystemKind::linear, p, S, 200);
        double worst = 0.0;
        for (std::size_t t = 0; t <= 200; ++t)
            for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(exact[t][i] - lin.P[t][i]));
        return Outcome{worst <= 1e-10, "N=4, t<=200: max diff = " + sci(worst) + " (tol 1e-10)"};
    });

    check(10, "Monte Carlo long-run marginals match exact stationary law", 0.0, [] {
        const RawConfig raw{2, 2, {3, 7}, {10, 12}, {4, 2}, {2, 5}, InteractionMatrix{{0.6, 0.4}, {0.3, 0.7}}};
        const TransitionKernel k(normalize(raw), raw.S);
        const auto exact = newest_marginals(stationary_distribution(k).pi, k);
        const auto mc = long_run_marginals(raw, 200, 5200, 200, 1010);
        double worst_z = 0.0;
        std::string detail;
        for (std::size_t i = 0; i < 2; ++i) {
            const double z = std::abs(mc.mean[i] - exact[i]) / mc.standard_error[i];
            worst_z = std::max(worst_z, z);
            detail += " urn" + std::to_string(i + 1) + ": mc=" + std::to_string(mc.mean[i]) + " exact=" +
                      std::to_string(exact[i]) + " z=" + std::to_string(z) + ";";
        }
        return Outcome{worst_z <= 3.0, "200 replicates," + detail + " tol 3 SE"};
    });

    check(11, "100-node heterogeneous smoke run stays in [0,1]", 0.0, [] {
        auto j = figure_config(1, 1);
        j["modes"] = {"montecarlo", "meanfield-nonlinear"};
        auto cfg = parse_config(j);
        cfg.output_prefix = (scratch("fig1") / "").string();
        const auto rep = run(cfg);
        bool bounded = true;
        std::string detail;
        for (const auto& [name, c] : rep.curves) {
            for (double v : c.value) bounded &= v >= 0.0 && v <= 1.0;
            detail += " " + name + "=" + std::to_string(c.value.back());
        }
        return Outcome{bounded, "values at t=1000:" + detail};
    });

    std::printf("%d failure(s)\n", failures);
    return failures;
}
