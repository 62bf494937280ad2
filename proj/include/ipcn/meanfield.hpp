#pragma once

// Mean-field dynamical systems for the infection probabilities
// P_i(t) = P(Z_{i,t} = 1): the nonlinear system (by full enumeration and in
// its binomial-coefficient form), its linear part as a block system, the
// spectral radius of that system and its equilibrium.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ipcn/core.hpp"

namespace ipcn {

inline constexpr int kDirectEnumerationCapBits = 20;
inline constexpr std::size_t kDenseLinearCap = 4096;

/// The last M infection vectors: lag(j, k) = P_j(t - k), k = 1..M.
class InfectionHistory {
public:
    InfectionHistory() = default;
    InfectionHistory(std::size_t urns, int memory)
        : urns_(urns), memory_(memory), data_(urns * static_cast<std::size_t>(memory), 0.0) {}

    /// Builds a history from vectors ordered oldest first: P(t-M), ..., P(t-1).
    static InfectionHistory from_oldest_first(const std::vector<std::vector<double>>& vectors) {
        if (vectors.empty()) throw std::invalid_argument("history needs at least one vector");
        InfectionHistory h(vectors.front().size(), static_cast<int>(vectors.size()));
        for (const auto& v : vectors) h.push(v);
        return h;
    }

    std::size_t urns() const noexcept { return urns_; }
    int memory() const noexcept { return memory_; }

    double lag(std::size_t urn, int k) const {
        // newest_ is the slot of lag 1; older lags sit at decreasing slots.
        const int slot = ((newest_ - (k - 1)) % memory_ + memory_) % memory_;
        return data_[static_cast<std::size_t>(slot) * urns_ + urn];
    }

    void push(std::span<const double> newest) {
        if (newest.size() != urns_) throw std::invalid_argument("history push: wrong vector length");
        newest_ = (newest_ + 1) % memory_;
        std::copy(newest.begin(), newest.end(), data_.begin() + static_cast<std::ptrdiff_t>(newest_) * static_cast<std::ptrdiff_t>(urns_));
    }

private:
    std::size_t urns_ = 0;
    int memory_ = 1;
    int newest_ = 0;
    std::vector<double> data_;
};

/// All n-element subsets of the lags {1..M}, each listed once in increasing
/// order, lexicographically.
inline std::vector<std::vector<int>> enumerate_H(int n, int M) {
    if (n < 1 || n > M) throw std::out_of_range("enumerate_H: subset size outside [1, M]");
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(n));
    std::iota(cur.begin(), cur.end(), 1);
    while (true) {
        out.push_back(cur);
        int pos = n - 1;
        while (pos >= 0 && cur[static_cast<std::size_t>(pos)] == M - (n - 1 - pos)) --pos;
        if (pos < 0) break;
        ++cur[static_cast<std::size_t>(pos)];
        for (int q = pos + 1; q < n; ++q) cur[static_cast<std::size_t>(q)] = cur[static_cast<std::size_t>(q - 1)] + 1;
    }
    return out;
}

/// Elementary symmetric polynomials e_0..e_m of the values: e_n is the sum
/// of all products over n distinct entries.
inline std::vector<double> elementary_symmetric(std::span<const double> values) {
    std::vector<double> e(values.size() + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t k = 0; k < values.size(); ++k)
        for (std::size_t n = k + 1; n > 0; --n) e[n] += e[n - 1] * values[k];
    return e;
}

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

/// Degree-n coefficient of urn j in the rearranged nonlinear system:
/// sum_k (-1)^(n-k) C(n,k) beta_j(k).
inline double degree_coefficient(const NetworkParams& p, std::size_t j, int n) {
    double c = 0.0;
    for (int k = 0; k <= n; ++k) c += ((n - k) % 2 ? -1.0 : 1.0) * binomial(n, k) * beta(p, j, k);
    return c;
}

namespace detail {

inline void check_dims(const InfectionHistory& h, const NetworkParams& p, const InteractionMatrix& S) {
    if (h.urns() != p.size() || S.size() != p.size() || h.memory() != p.memory)
        throw std::invalid_argument("mean-field step: history, parameters and interaction disagree in size");
}

}  // namespace detail

/// Nonlinear mean-field step by enumerating every joint window
/// configuration: sum over a of [sum_j s_ij beta_j(v_j(a))] prod_{j,k} Theta.
inline std::vector<double> step_direct(const InfectionHistory& h, const NetworkParams& p,
                                       const InteractionMatrix& S) {
    detail::check_dims(h, p, S);
    const std::size_t n = p.size();
    const int m = p.memory;
    const int bits = static_cast<int>(n) * m;
    if (bits > kDirectEnumerationCapBits)
        throw CapExceeded("direct mean-field enumeration needs " + std::to_string(bits) +
                          " bits, cap is " + std::to_string(kDirectEnumerationCapBits));
    std::vector<double> lagv(static_cast<std::size_t>(bits));
    for (std::size_t j = 0; j < n; ++j)
        for (int k = 1; k <= m; ++k) lagv[j * static_cast<std::size_t>(m) + static_cast<std::size_t>(k - 1)] = h.lag(j, k);

    std::vector<double> out(n, 0.0), g(n);
    const std::uint64_t configs = std::uint64_t{1} << bits;
    for (std::uint64_t a = 0; a < configs; ++a) {
        double w = 1.0;
        for (int b = 0; b < bits; ++b) w *= ((a >> b) & 1u) ? lagv[static_cast<std::size_t>(b)] : 1.0 - lagv[static_cast<std::size_t>(b)];
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            const auto blk = (a >> (j * static_cast<std::size_t>(m))) & ((std::uint64_t{1} << m) - 1);
            g[j] = beta(p, j, std::popcount(blk));
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = S.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += row[j] * g[j];
            out[i] += w * acc;
        }
    }
    return out;
}

/// Precomputed coefficients of the rearranged nonlinear system.
class NonlinearSystem {
public:
    NonlinearSystem(NetworkParams p, InteractionMatrix S) : p_(std::move(p)), S_(std::move(S)) {
        p_.validate();
        if (S_.size() != p_.size()) throw ConfigError("interaction matrix dimension does not match urn count");
        const std::size_t n = p_.size();
        const auto m = static_cast<std::size_t>(p_.memory);
        coef_.resize(n * (m + 1));
        for (std::size_t j = 0; j < n; ++j) {
            coef_[j * (m + 1)] = beta(p_, j, 0);
            for (std::size_t d = 1; d <= m; ++d) coef_[j * (m + 1) + d] = degree_coefficient(p_, j, static_cast<int>(d));
        }
    }

    const NetworkParams& params() const noexcept { return p_; }
    const InteractionMatrix& interaction() const noexcept { return S_; }

    /// Constant term plus, per degree n, coefficient times the sum over all
    /// n-subsets of lags of the lag products (elementary symmetric polynomial).
    std::vector<double> step(const InfectionHistory& h) const {
        detail::check_dims(h, p_, S_);
        const std::size_t n = p_.size();
        const auto m = static_cast<std::size_t>(p_.memory);
        std::vector<double> f(n), lags(m);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < m; ++k) lags[k] = h.lag(j, static_cast<int>(k + 1));
            const auto e = elementary_symmetric(lags);
            double v = 0.0;
            for (std::size_t d = 0; d <= m; ++d) v += coef_[j * (m + 1) + d] * e[d];
            f[j] = v;
        }
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = S_.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += row[j] * f[j];
            out[i] = acc;
        }
        return out;
    }

private:
    NetworkParams p_;
    InteractionMatrix S_;
    std::vector<double> coef_;
};

inline std::vector<double> step_nonlinear(const InfectionHistory& h, const NetworkParams& p,
                                          const InteractionMatrix& S) {
    return NonlinearSystem(p, S).step(h);
}

/// x(t) = J x(t-1) + C over the stacked vector
/// x = (P_1(t), .., P_1(t-M+1), ..., P_N(t), .., P_N(t-M+1)).
struct LinearSystem {
    std::size_t urns = 0;
    int memory = 1;
    Eigen::MatrixXd J;
    Eigen::VectorXd C;
};

inline LinearSystem build_linear_system(const NetworkParams& p, const InteractionMatrix& S) {
    p.validate();
    if (S.size() != p.size()) throw ConfigError("interaction matrix dimension does not match urn count");
    const std::size_t n = p.size();
    const auto m = static_cast<Eigen::Index>(p.memory);
    const auto dim = static_cast<Eigen::Index>(n) * m;
    LinearSystem sys{n, p.memory, Eigen::MatrixXd::Zero(dim, dim), Eigen::VectorXd::Zero(dim)};
    std::vector<double> slope(n), base(n);
    for (std::size_t j = 0; j < n; ++j) {
        base[j] = beta(p, j, 0);
        slope[j] = beta(p, j, 1) - base[j];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i) * m;
        double c = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            c += S(i, j) * base[j];
            const auto col = static_cast<Eigen::Index>(j) * m;
            for (Eigen::Index k = 0; k < m; ++k) sys.J(r, col + k) = S(i, j) * slope[j];
        }
        sys.C(r) = c;
        for (Eigen::Index k = 1; k < m; ++k) sys.J(r + k, r + k - 1) = 1.0;
    }
    return sys;
}

enum class SpectralMethod { trivial, power, dense_eigen, row_sum_bound };

struct SpectralRadius {
    double value = 0.0;
    bool converged = false;
    SpectralMethod method = SpectralMethod::trivial;
    std::size_t iterations = 0;
};

inline double row_sum_norm(const Eigen::MatrixXd& A) {
    return A.rows() == 0 ? 0.0 : A.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Dominant eigenvalue magnitude by power iteration. Entrywise nonnegative
/// matrices are shifted by their row-sum norm first; the Perron root is then
/// the unique dominant eigenvalue, so periodic structure cannot stall the
/// iteration. Stopping uses the geometric tail estimate of the change
/// sequence. If the iteration stalls (defective or complex dominant pair),
/// dimensions up to dense_cap fall back to a dense eigenvalue solve; larger
/// ones report the row-sum bound with converged = false.
inline SpectralRadius spectral_radius(const Eigen::MatrixXd& A, double rel_tol = 1e-9,
                                      std::size_t max_iters = 100000, Eigen::Index dense_cap = 1024) {
    if (A.rows() != A.cols()) throw std::invalid_argument("spectral_radius: matrix must be square");
    const double bound = row_sum_norm(A);
    if (A.rows() == 0 || bound == 0.0) return {0.0, true, SpectralMethod::trivial, 0};

    const bool nonnegative = (A.array() >= 0.0).all();
    const double shift = nonnegative ? bound : 0.0;
    const auto n = A.rows();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double prev = 0.0, prev_change = -1.0;
    int settled = 0;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        Eigen::VectorXd y = A * x + shift * x;
        const double est = y.norm();
        if (est == 0.0) return {0.0, true, SpectralMethod::power, it};
        x = y / est;
        const double change = std::abs(est - prev);
        const double target = std::max(est - shift, 0.0);
        bool small = it >= 3 && change <= 4e-16 * est;
        if (!small && it >= 3 && prev_change > 0.0) {
            const double q = change / prev_change;
            small = q < 1.0 && change * q / (1.0 - q) <= 0.1 * rel_tol * target;
        }
        settled = small ? settled + 1 : 0;
        if (settled >= 3) return {target, true, SpectralMethod::power, it};
        prev = est;
        prev_change = change;
    }
    if (n <= dense_cap) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
        if (es.info() == Eigen::Success)
            return {es.eigenvalues().cwiseAbs().maxCoeff(), true, SpectralMethod::dense_eigen, max_iters};
    }
    return {bound, false, SpectralMethod::row_sum_bound, max_iters};
}

struct Equilibrium {
    std::vector<double> per_urn;  // P*_i
    Eigen::VectorXd stacked;      // full fixed point of the block system
    SpectralRadius radius;
    double residual = 0.0;        // ||(I - J) x - C||_inf
};

/// Fixed point (I - J)^-1 C of a linear mean-field system. Declines with a
/// NumericalError unless the spectral radius of J is certified below one.
inline Equilibrium equilibrium(const LinearSystem& sys) {
    Equilibrium eq;
    eq.radius = spectral_radius(sys.J);
    if (!eq.radius.converged || !(eq.radius.value < 1.0))
        throw NumericalError("spectral radius " + std::to_string(eq.radius.value) +
                             (eq.radius.converged ? "" : " (bound only)") +
                             " is not below one; equilibrium not computed");
    const auto dim = sys.J.rows();
    if (static_cast<std::size_t>(dim) <= kDenseLinearCap) {
        const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(dim, dim) - sys.J;
        eq.stacked = A.partialPivLu().solve(sys.C);
    } else {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
        for (int it = 0; it < 10'000'000; ++it) {
            Eigen::VectorXd nx = sys.J * x + sys.C;
            const double d = (nx - x).cwiseAbs().maxCoeff();
            x = std::move(nx);
            if (d <= 1e-15) break;
        }
        eq.stacked = x;
    }
    eq.residual = (eq.stacked - sys.J * eq.stacked - sys.C).cwiseAbs().maxCoeff();
    if (eq.residual > 1e-10)
        throw NumericalError("equilibrium residual " + std::to_string(eq.residual) + " exceeds 1e-10");
    eq.per_urn.resize(sys.urns);
    for (std::size_t i = 0; i < sys.urns; ++i)
        eq.per_urn[i] = eq.stacked(static_cast<Eigen::Index>(i) * sys.memory);
    return eq;
}

enum class SystemKind { nonlinear, linear };

inline const char* to_string(SystemKind k) { return k == SystemKind::nonlinear ? "nonlinear" : "linear"; }

/// P(t) for t = 0..T. Rows 0..M-1 are the initial history.
struct InfectionTrajectory {
    SystemKind kind = SystemKind::nonlinear;
    std::size_t urns = 0;
    std::vector<std::vector<double>> P;
    std::vector<double> network_average;
    std::size_t clamp_events = 0;
};

/// Iterates a mean-field system from P(0..M-1) (all zeros by default) up to
/// time t_max. Nonlinear values obey the probability clamp rule; linear
/// values are reported as computed, since the linearization can leave [0,1]
/// when its spectral radius exceeds one.
inline InfectionTrajectory iterate(SystemKind kind, const NetworkParams& p, const InteractionMatrix& S,
                                   std::size_t t_max, std::vector<std::vector<double>> initial = {}) {
    const std::size_t n = p.size();
    const auto m = static_cast<std::size_t>(p.memory);
    if (initial.empty()) initial.assign(m, std::vector<double>(n, 0.0));
    if (initial.size() != m) throw std::invalid_argument("iterate: initial history needs M vectors");
    for (const auto& v : initial)
        if (v.size() != n) throw std::invalid_argument("iterate: initial vector has wrong length");

    InfectionTrajectory tr{kind, n, {}, {}, 0};
    tr.P.reserve(t_max + 1);
    for (std::size_t t = 0; t < m && t <= t_max; ++t) tr.P.push_back(initial[t]);

    if (kind == SystemKind::nonlinear) {
        const NonlinearSystem sys(p, S);
        auto h = InfectionHistory::from_oldest_first(initial);
        for (std::size_t t = m; t <= t_max; ++t) {
            auto next = sys.step(h);
            for (auto& v : next) {
                const double c = clamp_probability(v);
                if (c != v) ++tr.clamp_events;
                v = c;
            }
            h.push(next);
            tr.P.push_back(std::move(next));
        }
    } else {
        const auto sys = build_linear_system(p, S);
        Eigen::VectorXd x(static_cast<Eigen::Index>(n * m));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < m; ++k)
                x(static_cast<Eigen::Index>(i * m + k)) = initial[m - 1 - k][i];
        for (std::size_t t = m; t <= t_max; ++t) {
            x = sys.J * x + sys.C;
            std::vector<double> next(n);
            for (std::size_t i = 0; i < n; ++i) next[i] = x(static_cast<Eigen::Index>(i * m));
            tr.P.push_back(std::move(next));
        }
    }
    tr.network_average.reserve(tr.P.size());
    for (const auto& row : tr.P)
        tr.network_average.push_back(std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(n));
    return tr;
}

}  // namespace ipcn
