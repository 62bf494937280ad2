#pragma once

// Exact treatment of the expanded first-order chain over windows of the last
// M network draws. A state packs N*M bits, urn-major and lag-minor:
//
//     bit(i, k) = M * i + k,   i = 0..N-1,  k = 0..M-1,  k = 0 is the oldest lag.
//
// A step shifts every urn block one lag towards the oldest end and writes the
// new draw into lag M-1. The transition a -> b is therefore possible only when
// b's lags 0..M-2 equal a's lags 1..M-1, and each state has at most 2^N
// successors and 2^N predecessors.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipcn/core.hpp"
#include "ipcn/parallel.hpp"

namespace ipcn {

using ChainState = std::uint64_t;

inline constexpr int kDefaultStateCapBits = 24;
inline constexpr int kMaterializeCapBits = 12;

/// Probability vector over the 2^(NM) chain states.
using DistributionVector = std::vector<double>;

struct SparseKernel {
    std::size_t states = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<ChainState> col;
    std::vector<double> value;
};

class TransitionKernel {
public:
    TransitionKernel(NetworkParams params, InteractionMatrix S, int cap_bits = kDefaultStateCapBits)
        : params_(std::move(params)), S_(std::move(S)) {
        params_.validate();
        if (S_.size() != params_.size())
            throw ConfigError("interaction matrix dimension does not match urn count");
        bits_ = params_.urns * params_.memory;
        if (bits_ > cap_bits || bits_ > 62)
            throw CapExceeded("exact chain needs " + std::to_string(bits_) + " state bits, cap is " +
                              std::to_string(cap_bits));
        urns_ = params_.size();
        memory_ = params_.memory;
        block_mask_ = (ChainState{1} << memory_) - 1;

        betas_.resize(urns_ * (memory_ + 1));
        for (std::size_t j = 0; j < urns_; ++j)
            for (int k = 0; k <= memory_; ++k) betas_[j * (memory_ + 1) + k] = beta(params_, j, k);

        // Predecessor offsets: every combination of the oldest-lag bits.
        first_lag_offsets_.resize(std::size_t{1} << urns_);
        for (std::size_t x = 0; x < first_lag_offsets_.size(); ++x) {
            ChainState off = 0;
            for (std::size_t i = 0; i < urns_; ++i)
                if ((x >> i) & 1u) off |= ChainState{1} << (memory_ * i);
            first_lag_offsets_[x] = off;
        }

        // Red probabilities depend on a state only through its per-urn red
        // counts, so tabulate them by count vector when that table is small.
        double combos = std::pow(static_cast<double>(memory_ + 1), static_cast<double>(urns_));
        if (combos * static_cast<double>(urns_) <= static_cast<double>(1u << 24)) {
            const auto n_combos = static_cast<std::size_t>(combos);
            prob_table_.resize(n_combos * urns_);
            std::vector<int> counts(urns_, 0);
            for (std::size_t c = 0; c < n_combos; ++c) {
                std::size_t rest = c;
                for (std::size_t j = 0; j < urns_; ++j) {
                    counts[j] = static_cast<int>(rest % (memory_ + 1));
                    rest /= (memory_ + 1);
                }
                for (std::size_t d = 0; d < urns_; ++d)
                    prob_table_[c * urns_ + d] = red_probability_from_counts(d, counts);
            }
        }
    }

    const NetworkParams& params() const noexcept { return params_; }
    const InteractionMatrix& interaction() const noexcept { return S_; }
    std::size_t urns() const noexcept { return urns_; }
    int memory() const noexcept { return memory_; }
    int state_bits() const noexcept { return bits_; }
    std::size_t state_count() const noexcept { return std::size_t{1} << bits_; }

    static constexpr int bit_index(int memory, std::size_t urn, int lag) noexcept {
        return memory * static_cast<int>(urn) + lag;
    }

    /// Window block of one urn (M bits, bit k = lag k).
    ChainState block(ChainState a, std::size_t urn) const noexcept {
        return (a >> (memory_ * urn)) & block_mask_;
    }

    /// Red-draw probability of every urn given window state a.
    void red_probabilities(ChainState a, std::span<double> out) const {
        if (!prob_table_.empty()) {
            const auto* p = &prob_table_[count_index(a) * urns_];
            std::copy(p, p + urns_, out.begin());
            return;
        }
        std::vector<int> counts(urns_);
        for (std::size_t j = 0; j < urns_; ++j) counts[j] = std::popcount(block(a, j));
        for (std::size_t d = 0; d < urns_; ++d) out[d] = red_probability_from_counts(d, counts);
    }

    bool shift_compatible(ChainState a, ChainState b) const noexcept {
        for (std::size_t i = 0; i < urns_; ++i)
            if (((block(a, i) >> 1) ^ block(b, i)) & (block_mask_ >> 1)) return false;
        return true;
    }

    /// Newest draws of b, one bit per urn.
    std::uint64_t newest_draws(ChainState b) const noexcept {
        std::uint64_t z = 0;
        for (std::size_t i = 0; i < urns_; ++i)
            if ((b >> (memory_ * i + memory_ - 1)) & 1u) z |= std::uint64_t{1} << i;
        return z;
    }

    /// Successor of a when the network draws z (bit i = urn i).
    ChainState successor(ChainState a, std::uint64_t z) const noexcept {
        ChainState b = 0;
        for (std::size_t i = 0; i < urns_; ++i) {
            ChainState blk = block(a, i) >> 1;
            if ((z >> i) & 1u) blk |= ChainState{1} << (memory_ - 1);
            b |= blk << (memory_ * i);
        }
        return b;
    }

    double transition_prob(ChainState a, ChainState b) const {
        if (!shift_compatible(a, b)) return 0.0;
        std::vector<double> p(urns_);
        red_probabilities(a, p);
        return draw_product(p, newest_draws(b));
    }

    /// out = mu * Q, computed by pulling from the predecessors of every
    /// destination state. Destinations are split across threads.
    void apply(std::span<const double> mu, std::span<double> out, unsigned threads = 0) const {
        const std::size_t n = state_count();
        if (mu.size() != n || out.size() != n)
            throw std::invalid_argument("kernel apply: vector length does not match state count");
        parallel_chunks(0, n, threads, [&](std::size_t lo, std::size_t hi, unsigned) {
            std::vector<double> p(urns_);
            for (std::size_t b = lo; b < hi; ++b) {
                const ChainState base = predecessor_base(b);
                const std::uint64_t z = newest_draws(b);
                double acc = 0.0;
                for (ChainState off : first_lag_offsets_) {
                    const ChainState a = base | off;
                    const double m = mu[a];
                    if (m == 0.0) continue;
                    red_probabilities(a, p);
                    acc += m * draw_product(p, z);
                }
                out[b] = acc;
            }
        });
    }

    /// Visits (successor, probability) for every successor of a with nonzero probability.
    template <class Visit>
    void for_each_successor(ChainState a, Visit&& visit) const {
        std::vector<double> p(urns_);
        red_probabilities(a, p);
        const std::uint64_t n_draws = std::uint64_t{1} << urns_;
        for (std::uint64_t z = 0; z < n_draws; ++z) {
            const double q = draw_product(p, z);
            if (q > 0.0) visit(successor(a, z), q);
        }
    }

    template <class Visit>
    void for_each_predecessor(ChainState b, Visit&& visit) const {
        const ChainState base = predecessor_base(b);
        const std::uint64_t z = newest_draws(b);
        std::vector<double> p(urns_);
        for (ChainState off : first_lag_offsets_) {
            const ChainState a = base | off;
            red_probabilities(a, p);
            const double q = draw_product(p, z);
            if (q > 0.0) visit(a, q);
        }
    }

    /// Sparse row-major matrix; restricted to small chains.
    SparseKernel materialize(int cap_bits = kMaterializeCapBits) const {
        if (bits_ > cap_bits)
            throw CapExceeded("kernel materialization limited to " + std::to_string(cap_bits) +
                              " state bits, chain has " + std::to_string(bits_));
        SparseKernel k;
        k.states = state_count();
        k.row_ptr.reserve(k.states + 1);
        k.row_ptr.push_back(0);
        for (ChainState a = 0; a < k.states; ++a) {
            std::vector<std::pair<ChainState, double>> row;
            for_each_successor(a, [&](ChainState b, double q) { row.emplace_back(b, q); });
            std::sort(row.begin(), row.end());
            for (auto& [b, q] : row) {
                k.col.push_back(b);
                k.value.push_back(q);
            }
            k.row_ptr.push_back(k.col.size());
        }
        return k;
    }

private:
    double red_probability_from_counts(std::size_t d, const std::vector<int>& counts) const {
        double acc = 0.0;
        const auto row = S_.row(d);
        for (std::size_t j = 0; j < urns_; ++j)
            acc += row[j] * betas_[j * (memory_ + 1) + counts[j]];
        return clamp_probability(acc);
    }

    std::size_t count_index(ChainState a) const noexcept {
        std::size_t idx = 0;
        std::size_t mult = 1;
        for (std::size_t j = 0; j < urns_; ++j) {
            idx += mult * static_cast<std::size_t>(std::popcount(block(a, j)));
            mult *= static_cast<std::size_t>(memory_ + 1);
        }
        return idx;
    }

    /// Predecessor of b with all oldest-lag bits cleared.
    ChainState predecessor_base(ChainState b) const noexcept {
        ChainState a = 0;
        for (std::size_t i = 0; i < urns_; ++i)
            a |= ((block(b, i) << 1) & block_mask_) << (memory_ * i);
        return a;
    }

    double draw_product(std::span<const double> p, std::uint64_t z) const noexcept {
        double q = 1.0;
        for (std::size_t i = 0; i < urns_; ++i) q *= ((z >> i) & 1u) ? p[i] : 1.0 - p[i];
        return q;
    }

    NetworkParams params_;
    InteractionMatrix S_;
    std::size_t urns_ = 0;
    int memory_ = 0;
    int bits_ = 0;
    ChainState block_mask_ = 0;
    std::vector<double> betas_;
    std::vector<ChainState> first_lag_offsets_;
    std::vector<double> prob_table_;
};

inline TransitionKernel build_kernel(const NetworkParams& params, const InteractionMatrix& S,
                                     int cap_bits = kDefaultStateCapBits) {
    return TransitionKernel(params, S, cap_bits);
}

inline double transition_prob(ChainState a, ChainState b, const NetworkParams& params,
                              const InteractionMatrix& S) {
    return TransitionKernel(params, S, 62).transition_prob(a, b);
}

/// Point mass on the all-zeros window (no red draws yet).
inline DistributionVector all_zeros_distribution(const TransitionKernel& kernel) {
    DistributionVector mu(kernel.state_count(), 0.0);
    mu[0] = 1.0;
    return mu;
}

struct StationaryOptions {
    double tol = 1e-12;
    std::size_t max_iters = 1'000'000;
    unsigned threads = 0;
    std::optional<DistributionVector> start;
};

struct StationaryResult {
    DistributionVector pi;
    std::size_t iterations = 0;
    double residual = 0.0;  // ||pi Q - pi||_inf
};

/// Power iteration until ||mu Q - mu||_inf <= tol.
inline StationaryResult stationary_distribution(const TransitionKernel& kernel,
                                                const StationaryOptions& opt = {}) {
    const std::size_t n = kernel.state_count();
    DistributionVector mu = opt.start.value_or(DistributionVector(n, 1.0 / static_cast<double>(n)));
    if (mu.size() != n) throw std::invalid_argument("start vector length does not match state count");
    DistributionVector next(n);
    for (std::size_t it = 0; it < opt.max_iters; ++it) {
        kernel.apply(mu, next, opt.threads);
        double resid = 0.0;
        for (std::size_t s = 0; s < n; ++s) resid = std::max(resid, std::abs(next[s] - mu[s]));
        if (resid <= opt.tol) return {std::move(mu), it, resid};
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        for (auto& v : next) v /= total;
        std::swap(mu, next);
    }
    throw NumericalError("stationary distribution did not converge within " +
                         std::to_string(opt.max_iters) + " iterations");
}

inline DistributionVector evolve_distribution(const TransitionKernel& kernel, DistributionVector mu,
                                              std::size_t steps, unsigned threads = 0) {
    DistributionVector next(mu.size());
    for (std::size_t t = 0; t < steps; ++t) {
        kernel.apply(mu, next, threads);
        std::swap(mu, next);
    }
    return mu;
}

/// P(bit (urn, lag) = 1) under mu.
inline double marginal_infection(std::span<const double> mu, const TransitionKernel& kernel,
                                 std::size_t urn, int lag) {
    if (urn >= kernel.urns() || lag < 0 || lag >= kernel.memory())
        throw std::out_of_range("marginal_infection: urn or lag out of range");
    if (mu.size() != kernel.state_count())
        throw std::invalid_argument("marginal_infection: distribution length mismatch");
    const ChainState bit = ChainState{1} << TransitionKernel::bit_index(kernel.memory(), urn, lag);
    double acc = 0.0;
    for (ChainState s = 0; s < mu.size(); ++s)
        if (s & bit) acc += mu[s];
    return acc;
}

/// Newest-lag marginals of every urn.
inline std::vector<double> newest_marginals(std::span<const double> mu, const TransitionKernel& kernel) {
    std::vector<double> out(kernel.urns(), 0.0);
    const int m = kernel.memory();
    for (ChainState s = 0; s < mu.size(); ++s) {
        if (mu[s] == 0.0) continue;
        for (std::size_t i = 0; i < kernel.urns(); ++i)
            if ((s >> (m * i + m - 1)) & 1u) out[i] += mu[s];
    }
    return out;
}

/// Per-step newest-lag marginals: row s holds P(Z_i = 1) after s steps from mu0.
inline std::vector<std::vector<double>> transient_marginals(const TransitionKernel& kernel,
                                                            DistributionVector mu, std::size_t steps,
                                                            unsigned threads = 0) {
    std::vector<std::vector<double>> rows;
    rows.reserve(steps + 1);
    rows.push_back(newest_marginals(mu, kernel));
    DistributionVector next(mu.size());
    for (std::size_t t = 0; t < steps; ++t) {
        kernel.apply(mu, next, threads);
        std::swap(mu, next);
        rows.push_back(newest_marginals(mu, kernel));
    }
    return rows;
}

/// Joint law of two consecutive draws of one urn under pi: joint[a][b] =
/// P(Z_{i,t} = a, Z_{i,t+1} = b). Memory-one chains only.
inline std::array<std::array<double, 2>, 2> two_fold_joint(std::span<const double> pi,
                                                           const TransitionKernel& kernel,
                                                           std::size_t urn) {
    if (kernel.memory() != 1) throw std::invalid_argument("two_fold_joint requires memory 1");
    if (urn >= kernel.urns()) throw std::out_of_range("two_fold_joint: urn out of range");
    std::array<std::array<double, 2>, 2> joint{};
    std::vector<double> p(kernel.urns());
    for (ChainState s = 0; s < pi.size(); ++s) {
        kernel.red_probabilities(s, p);
        const int a = static_cast<int>((s >> urn) & 1u);
        joint[a][1] += pi[s] * p[urn];
        joint[a][0] += pi[s] * (1.0 - p[urn]);
    }
    return joint;
}

struct ChainStructure {
    bool irreducible = false;
    bool aperiodic = false;
    std::size_t period = 0;  // 0 when not irreducible
    std::optional<std::size_t> diameter;  // longest shortest path, small chains only
    std::optional<bool> m_step_paths;      // every pair joined by the shift path of length M
};

namespace detail {

inline std::vector<std::int64_t> bfs_levels(const TransitionKernel& k, ChainState root, bool forward) {
    std::vector<std::int64_t> level(k.state_count(), -1);
    std::deque<ChainState> queue{root};
    level[root] = 0;
    while (!queue.empty()) {
        const ChainState u = queue.front();
        queue.pop_front();
        auto push = [&](ChainState v, double) {
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        };
        if (forward)
            k.for_each_successor(u, push);
        else
            k.for_each_predecessor(u, push);
    }
    return level;
}

}  // namespace detail

/// Strong connectivity by forward and backward search from state 0; period
/// as the gcd of level[u] + 1 - level[v] over all edges of the BFS tree's
/// graph.
inline ChainStructure check_irreducible_aperiodic(const TransitionKernel& k,
                                                  std::size_t certificate_work_cap = std::size_t{1} << 26) {
    ChainStructure out;
    const std::size_t n = k.state_count();
    const auto fwd = detail::bfs_levels(k, 0, true);
    const auto bwd = detail::bfs_levels(k, 0, false);
    out.irreducible = std::all_of(fwd.begin(), fwd.end(), [](auto l) { return l >= 0; }) &&
                      std::all_of(bwd.begin(), bwd.end(), [](auto l) { return l >= 0; });
    if (!out.irreducible) return out;

    std::size_t g = 0;
    for (ChainState u = 0; u < n; ++u) {
        k.for_each_successor(u, [&](ChainState v, double) {
            const auto d = fwd[u] + 1 - fwd[v];
            g = std::gcd(g, static_cast<std::size_t>(d < 0 ? -d : d));
        });
    }
    out.period = g;
    out.aperiodic = g == 1;

    const std::size_t edges_per_state = std::size_t{1} << k.urns();
    if (n * n * edges_per_state <= certificate_work_cap) {
        std::size_t diam = 0;
        for (ChainState s = 0; s < n; ++s) {
            const auto lv = detail::bfs_levels(k, s, true);
            diam = std::max<std::size_t>(diam, static_cast<std::size_t>(*std::max_element(lv.begin(), lv.end())));
        }
        out.diameter = diam;
    }

    // Shift path from a to b: at step s the network draws b's lag s-1.
    const std::size_t m = static_cast<std::size_t>(k.memory());
    if (n * n * m * k.urns() <= certificate_work_cap) {
        bool ok = true;
        std::vector<double> p(k.urns());
        for (ChainState a = 0; a < n && ok; ++a) {
            for (ChainState b = 0; b < n && ok; ++b) {
                ChainState cur = a;
                for (int lag = 0; lag < k.memory() && ok; ++lag) {
                    std::uint64_t z = 0;
                    for (std::size_t i = 0; i < k.urns(); ++i)
                        if ((b >> (k.memory() * i + lag)) & 1u) z |= std::uint64_t{1} << i;
                    k.red_probabilities(cur, p);
                    for (std::size_t i = 0; i < k.urns(); ++i) {
                        const double f = ((z >> i) & 1u) ? p[i] : 1.0 - p[i];
                        if (f <= 0.0) ok = false;
                    }
                    cur = k.successor(cur, z);
                }
            }
        }
        out.m_step_paths = ok;
    }
    return out;
}

}  // namespace ipcn
