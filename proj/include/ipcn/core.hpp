#pragma once

// Model parameterization for finite-memory interacting Polya contagion
// networks: raw ball counts, normalized parameters, the interaction matrix,
// and the draw-probability law shared by the exact, simulated and mean-field
// treatments.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ipcn {

// Error taxonomy. The CLI maps each class to a distinct exit code.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CapExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kClampTolerance = 1e-12;

/// Clamps a computed probability back into [0,1] when it overshoots by
/// rounding only. Anything further out is a logic error and throws.
inline double clamp_probability(double p) {
    if (p >= 0.0 && p <= 1.0) return p;
    if (p < 0.0 && p >= -kClampTolerance) return 0.0;
    if (p > 1.0 && p <= 1.0 + kClampTolerance) return 1.0;
    throw NumericalError("probability " + std::to_string(p) + " outside [0,1]");
}

/// N x N row-stochastic matrix with nonnegative entries, stored row-major.
class InteractionMatrix {
public:
    InteractionMatrix() = default;

    InteractionMatrix(std::size_t n, std::vector<double> entries)
        : n_(n), s_(std::move(entries)) {
        validate();
    }

    InteractionMatrix(std::initializer_list<std::initializer_list<double>> rows) {
        n_ = rows.size();
        s_.reserve(n_ * n_);
        for (const auto& r : rows) {
            if (r.size() != n_) throw ConfigError("interaction matrix is not square");
            s_.insert(s_.end(), r.begin(), r.end());
        }
        validate();
    }

    static InteractionMatrix identity(std::size_t n) {
        std::vector<double> e(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
        return {n, std::move(e)};
    }

    static InteractionMatrix uniform(std::size_t n) {
        return {n, std::vector<double>(n * n, 1.0 / static_cast<double>(n))};
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return s_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept { return {s_.data() + i * n_, n_}; }
    const std::vector<double>& entries() const noexcept { return s_; }

    bool operator==(const InteractionMatrix&) const = default;

private:
    void validate() const {
        if (n_ == 0) throw ConfigError("interaction matrix must be nonempty");
        if (s_.size() != n_ * n_)
            throw ConfigError("interaction matrix has " + std::to_string(s_.size()) +
                              " entries, expected " + std::to_string(n_ * n_));
        for (std::size_t i = 0; i < n_; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                const double v = s_[i * n_ + j];
                if (!(v >= 0.0) || !std::isfinite(v))
                    throw ConfigError("interaction matrix entry (" + std::to_string(i + 1) + "," +
                                      std::to_string(j + 1) + ") is negative or not finite");
                sum += v;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance)
                throw ConfigError("interaction matrix row " + std::to_string(i + 1) +
                                  " sums to " + std::to_string(sum) + ", not 1");
        }
    }

    std::size_t n_ = 0;
    std::vector<double> s_;
};

/// Integer urn description: initial red counts R, totals T and per-draw
/// reinforcements, all in raw ball units.
struct RawConfig {
    int urns = 0;
    int memory = 0;
    std::vector<std::int64_t> red;
    std::vector<std::int64_t> total;
    std::vector<std::int64_t> delta_r;
    std::vector<std::int64_t> delta_b;
    InteractionMatrix S;

    static RawConfig homogeneous(int urns, int memory, std::int64_t red, std::int64_t total,
                                 std::int64_t delta_r, std::int64_t delta_b, InteractionMatrix S) {
        const auto n = static_cast<std::size_t>(urns < 0 ? 0 : urns);
        return RawConfig{urns,
                         memory,
                         std::vector<std::int64_t>(n, red),
                         std::vector<std::int64_t>(n, total),
                         std::vector<std::int64_t>(n, delta_r),
                         std::vector<std::int64_t>(n, delta_b),
                         std::move(S)};
    }

    void validate() const {
        if (urns < 1) throw ConfigError("urn count must be positive");
        if (memory < 1) throw ConfigError("memory must be positive");
        const auto n = static_cast<std::size_t>(urns);
        auto check_len = [n](const std::vector<std::int64_t>& v, const char* name) {
            if (v.size() != n)
                throw ConfigError(std::string(name) + " has length " + std::to_string(v.size()) +
                                  ", expected " + std::to_string(n));
        };
        check_len(red, "R");
        check_len(total, "T");
        check_len(delta_r, "delta_r");
        check_len(delta_b, "delta_b");
        if (S.size() != n) throw ConfigError("interaction matrix dimension does not match urn count");
        bool any_reinforcement = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (total[i] <= 0) throw ConfigError("T[" + std::to_string(i + 1) + "] must be positive");
            if (red[i] < 0 || red[i] > total[i])
                throw ConfigError("R[" + std::to_string(i + 1) + "] must lie in [0, T]");
            if (delta_r[i] < 0 || delta_b[i] < 0)
                throw ConfigError("reinforcements for urn " + std::to_string(i + 1) +
                                  " must be nonnegative");
            if (delta_r[i] + delta_b[i] != 0) any_reinforcement = true;
        }
        if (!any_reinforcement) throw ConfigError("at least one urn needs nonzero reinforcement");
    }
};

/// Normalized per-urn parameters: rho = R/T, sigma = 1 - rho, delta = Delta/T.
struct NetworkParams {
    int urns = 0;
    int memory = 0;
    std::vector<double> rho;
    std::vector<double> sigma;
    std::vector<double> delta_r;
    std::vector<double> delta_b;

    static NetworkParams homogeneous(int urns, int memory, double rho, double delta) {
        return heterogeneous(memory, std::vector<double>(static_cast<std::size_t>(urns), rho),
                             std::vector<double>(static_cast<std::size_t>(urns), delta),
                             std::vector<double>(static_cast<std::size_t>(urns), delta));
    }

    static NetworkParams heterogeneous(int memory, std::vector<double> rho,
                                       std::vector<double> delta_r, std::vector<double> delta_b) {
        NetworkParams p;
        p.urns = static_cast<int>(rho.size());
        p.memory = memory;
        p.sigma.reserve(rho.size());
        for (double r : rho) p.sigma.push_back(1.0 - r);
        p.rho = std::move(rho);
        p.delta_r = std::move(delta_r);
        p.delta_b = std::move(delta_b);
        p.validate();
        return p;
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(urns); }

    void validate() const {
        if (urns < 1) throw ConfigError("urn count must be positive");
        if (memory < 1) throw ConfigError("memory must be positive");
        const auto n = size();
        if (rho.size() != n || sigma.size() != n || delta_r.size() != n || delta_b.size() != n)
            throw ConfigError("parameter vectors must all have one entry per urn");
        for (std::size_t i = 0; i < n; ++i) {
            if (!(rho[i] >= 0.0 && rho[i] <= 1.0))
                throw ConfigError("rho[" + std::to_string(i + 1) + "] outside [0,1]");
            if (rho[i] + sigma[i] != 1.0)
                throw ConfigError("sigma[" + std::to_string(i + 1) + "] != 1 - rho");
            if (!(delta_r[i] >= 0.0) || !(delta_b[i] >= 0.0) || !std::isfinite(delta_r[i]) ||
                !std::isfinite(delta_b[i]))
                throw ConfigError("delta for urn " + std::to_string(i + 1) + " must be finite and >= 0");
        }
    }
};

/// The single conversion point from ball counts to normalized parameters.
inline NetworkParams normalize(const RawConfig& raw) {
    raw.validate();
    const auto n = static_cast<std::size_t>(raw.urns);
    std::vector<double> rho(n), dr(n), db(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = static_cast<double>(raw.total[i]);
        rho[i] = static_cast<double>(raw.red[i]) / t;
        dr[i] = static_cast<double>(raw.delta_r[i]) / t;
        db[i] = static_cast<double>(raw.delta_b[i]) / t;
    }
    return NetworkParams::heterogeneous(raw.memory, std::move(rho), std::move(dr), std::move(db));
}

/// Conditional red-draw contribution of urn j when k of its last M draws
/// were red: (rho_j + k dr_j) / (1 + k dr_j + (M - k) db_j).
inline double beta(const NetworkParams& p, std::size_t j, int k) {
    if (j >= p.size()) throw std::out_of_range("beta: urn index out of range");
    if (k < 0 || k > p.memory)
        throw std::out_of_range("beta: red count " + std::to_string(k) + " outside [0, M]");
    const double num = p.rho[j] + k * p.delta_r[j];
    const double den = 1.0 + k * p.delta_r[j] + (p.memory - k) * p.delta_b[j];
    return clamp_probability(num / den);
}

/// Red-ball ratio of urn i given its window of the last M draws (t >= M+1).
inline double red_ratio(const NetworkParams& p, std::size_t i, std::span<const std::uint8_t> window) {
    if (window.size() != static_cast<std::size_t>(p.memory))
        throw std::invalid_argument("red_ratio: window must hold exactly M draws");
    double num = p.rho[i];
    double den = 1.0;
    for (auto z : window) {
        if (z > 1) throw std::invalid_argument("red_ratio: draws must be binary");
        num += p.delta_r[i] * z;
        den += p.delta_r[i] * z + p.delta_b[i] * (1 - z);
    }
    return clamp_probability(num / den);
}

/// Probability that urn i draws red: sum_j s_ij U_j.
inline double draw_probability(std::size_t i, std::span<const double> U, const InteractionMatrix& S) {
    if (U.size() != S.size() || i >= S.size())
        throw std::invalid_argument("draw_probability: dimension mismatch");
    double acc = 0.0;
    const auto row = S.row(i);
    for (std::size_t j = 0; j < U.size(); ++j) acc += row[j] * U[j];
    return clamp_probability(acc);
}

}  // namespace ipcn
