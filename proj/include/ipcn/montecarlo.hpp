#pragma once

// Monte Carlo simulation of the urn network in raw ball units, including the
// warm-up phase t <= M in which reinforcement balls accumulate and none are
// removed yet.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ipcn/core.hpp"
#include "ipcn/parallel.hpp"
#include "ipcn/philox.hpp"

namespace ipcn {

/// Urn contents after `time` draws. window holds the last min(time, M)
/// draws of every urn in a per-urn circular buffer.
struct SimState {
    std::int64_t time = 0;
    std::vector<std::int64_t> red;
    std::vector<std::int64_t> total;
    std::vector<std::uint8_t> window;  // urns * M, urn-major
    int head = 0;                      // slot of the oldest draw once the buffer is full
    int filled = 0;

    /// Draw of urn i at lag k (k = 0 oldest of the retained draws).
    std::uint8_t draw_at(std::size_t i, int k, int memory) const {
        const int start = filled < memory ? 0 : head;
        return window[i * static_cast<std::size_t>(memory) + static_cast<std::size_t>((start + k) % memory)];
    }

    double ratio(std::size_t i) const {
        return static_cast<double>(red[i]) / static_cast<double>(total[i]);
    }
};

inline SimState initial_state(const RawConfig& raw) {
    SimState s;
    s.red = raw.red;
    s.total = raw.total;
    s.window.assign(static_cast<std::size_t>(raw.urns) * static_cast<std::size_t>(raw.memory), 0);
    return s;
}

/// Draw probabilities of every urn from the current (time t-1) contents.
inline void draw_probabilities(const SimState& state, const InteractionMatrix& S, std::span<double> out) {
    const std::size_t n = S.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = S.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * state.ratio(j);
        out[i] = clamp_probability(acc);
    }
}

/// Advances the network by one simultaneous draw. All probabilities are
/// taken from the pre-step state before any urn is sampled; reinforcements
/// from time t - M are removed once t >= M + 1. Returns the draws via `draws`.
inline void step(SimState& state, const RawConfig& raw, const ReplicateStream& rng,
                 std::span<std::uint8_t> draws, std::vector<double>& scratch) {
    const std::size_t n = static_cast<std::size_t>(raw.urns);
    const int m = raw.memory;
    scratch.resize(n);
    draw_probabilities(state, raw.S, scratch);
    const std::int64_t t = state.time + 1;
    for (std::size_t i = 0; i < n; ++i)
        draws[i] = rng.uniform(static_cast<std::uint64_t>(t), static_cast<std::uint32_t>(i)) < scratch[i] ? 1 : 0;

    const bool full = state.filled == m;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t z = draws[i];
        state.red[i] += z ? raw.delta_r[i] : 0;
        state.total[i] += z ? raw.delta_r[i] : raw.delta_b[i];
        auto& slot = state.window[i * static_cast<std::size_t>(m) +
                                  static_cast<std::size_t>(full ? state.head : state.filled)];
        if (full) {
            const std::uint8_t old = slot;
            state.red[i] -= old ? raw.delta_r[i] : 0;
            state.total[i] -= old ? raw.delta_r[i] : raw.delta_b[i];
        }
        slot = z;
    }
    if (full)
        state.head = (state.head + 1) % m;
    else
        ++state.filled;
    state.time = t;
}

inline void step(SimState& state, const RawConfig& raw, const ReplicateStream& rng) {
    std::vector<std::uint8_t> draws(static_cast<std::size_t>(raw.urns));
    std::vector<double> scratch;
    step(state, raw, rng, draws, scratch);
}

/// Draws Z(t, i) for t = 1..T, stored row-major by time.
struct Trajectory {
    std::size_t urns = 0;
    std::size_t steps = 0;
    std::vector<std::uint8_t> draws;
    std::vector<double> ratios;  // U(t, i) after step t, when recorded

    std::uint8_t z(std::size_t t, std::size_t i) const { return draws[(t - 1) * urns + i]; }
};

inline Trajectory simulate(const RawConfig& raw, std::size_t t_max, std::uint64_t seed,
                           std::uint64_t replicate = 0, bool record_ratios = false) {
    raw.validate();
    const std::size_t n = static_cast<std::size_t>(raw.urns);
    Trajectory traj{n, t_max, std::vector<std::uint8_t>(n * t_max), {}};
    if (record_ratios) traj.ratios.resize(n * t_max);
    SimState state = initial_state(raw);
    const ReplicateStream rng(seed, replicate);
    std::vector<double> scratch;
    for (std::size_t t = 1; t <= t_max; ++t) {
        std::span<std::uint8_t> row(traj.draws.data() + (t - 1) * n, n);
        step(state, raw, rng, row, scratch);
        if (record_ratios)
            for (std::size_t i = 0; i < n; ++i) traj.ratios[(t - 1) * n + i] = state.ratio(i);
    }
    return traj;
}

/// Running means I_t(i) = (1/t) sum_{s<=t} Z(s, i) and their network average.
struct EmpiricalSums {
    std::size_t urns = 0;
    std::size_t steps = 0;
    std::vector<double> per_urn;  // (t-1) * urns + i
    std::vector<double> network_average;
};

inline EmpiricalSums empirical_sum(const Trajectory& traj) {
    if (traj.steps == 0) throw std::invalid_argument("empirical_sum: empty trajectory");
    EmpiricalSums out{traj.urns, traj.steps, std::vector<double>(traj.urns * traj.steps),
                      std::vector<double>(traj.steps)};
    std::vector<std::int64_t> count(traj.urns, 0);
    for (std::size_t t = 1; t <= traj.steps; ++t) {
        double avg = 0.0;
        for (std::size_t i = 0; i < traj.urns; ++i) {
            count[i] += traj.z(t, i);
            const double v = static_cast<double>(count[i]) / static_cast<double>(t);
            out.per_urn[(t - 1) * traj.urns + i] = v;
            avg += v;
        }
        out.network_average[t - 1] = avg / static_cast<double>(traj.urns);
    }
    return out;
}

/// Replicate means of the empirical sums. Red counts are accumulated as
/// exact integers, so the result does not depend on scheduling.
struct ReplicateSummary {
    std::size_t urns = 0;
    std::size_t steps = 0;
    std::size_t replicates = 0;
    std::uint64_t master_seed = 0;
    std::vector<double> empirical;        // mean I_t(i), (t-1) * urns + i
    std::vector<double> network_average;  // mean (1/N) sum_i I_t(i)
    std::vector<double> infection_rate;   // mean (1/N) sum_i Z(t, i)
};

inline ReplicateSummary average_replicates(const RawConfig& raw, std::size_t t_max, std::size_t runs,
                                           std::uint64_t master_seed, unsigned threads = 0) {
    raw.validate();
    if (runs == 0) throw std::invalid_argument("average_replicates: need at least one replicate");
    if (t_max == 0) throw std::invalid_argument("average_replicates: horizon must be positive");
    const std::size_t n = static_cast<std::size_t>(raw.urns);
    const std::size_t workers = worker_count(runs, threads);
    // cumulative[w][(t-1)*n + i] = sum over replicates of sum_{s<=t} Z(s, i)
    std::vector<std::vector<std::int64_t>> cumulative(workers, std::vector<std::int64_t>(n * t_max, 0));
    std::vector<std::vector<std::int64_t>> instant(workers, std::vector<std::int64_t>(t_max, 0));

    parallel_chunks(0, runs, static_cast<unsigned>(workers), [&](std::size_t lo, std::size_t hi, unsigned w) {
        auto& cum = cumulative[w];
        auto& inst = instant[w];
        std::vector<std::uint8_t> draws(n);
        std::vector<std::int64_t> count(n);
        std::vector<double> scratch;
        for (std::size_t r = lo; r < hi; ++r) {
            SimState state = initial_state(raw);
            const ReplicateStream rng(master_seed, r);
            std::fill(count.begin(), count.end(), 0);
            for (std::size_t t = 1; t <= t_max; ++t) {
                step(state, raw, rng, draws, scratch);
                std::int64_t reds = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    count[i] += draws[i];
                    reds += draws[i];
                    cum[(t - 1) * n + i] += count[i];
                }
                inst[t - 1] += reds;
            }
        }
    });

    for (std::size_t w = 1; w < workers; ++w) {
        for (std::size_t k = 0; k < n * t_max; ++k) cumulative[0][k] += cumulative[w][k];
        for (std::size_t t = 0; t < t_max; ++t) instant[0][t] += instant[w][t];
    }

    ReplicateSummary s{n, t_max, runs, master_seed, std::vector<double>(n * t_max),
                       std::vector<double>(t_max), std::vector<double>(t_max)};
    const double R = static_cast<double>(runs);
    for (std::size_t t = 1; t <= t_max; ++t) {
        double avg = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = static_cast<double>(cumulative[0][(t - 1) * n + i]) / (R * static_cast<double>(t));
            s.empirical[(t - 1) * n + i] = v;
            avg += v;
        }
        s.network_average[t - 1] = avg / static_cast<double>(n);
        s.infection_rate[t - 1] = static_cast<double>(instant[0][t - 1]) / (R * static_cast<double>(n));
    }
    return s;
}

/// Per-urn long-run red frequency over t in (burn_in, t_max], with the mean
/// and standard error taken across replicates.
struct LongRunMarginals {
    std::vector<double> mean;
    std::vector<double> standard_error;
    std::size_t replicates = 0;
};

inline LongRunMarginals long_run_marginals(const RawConfig& raw, std::size_t burn_in, std::size_t t_max,
                                           std::size_t runs, std::uint64_t master_seed,
                                           unsigned threads = 0) {
    raw.validate();
    if (runs < 2 || t_max <= burn_in)
        throw std::invalid_argument("long_run_marginals: need >= 2 replicates and t_max > burn_in");
    const std::size_t n = static_cast<std::size_t>(raw.urns);
    std::vector<double> freq(runs * n);
    parallel_for(0, runs, threads, [&](std::size_t r) {
        SimState state = initial_state(raw);
        const ReplicateStream rng(master_seed, r);
        std::vector<std::uint8_t> draws(n);
        std::vector<std::int64_t> count(n, 0);
        std::vector<double> scratch;
        for (std::size_t t = 1; t <= t_max; ++t) {
            step(state, raw, rng, draws, scratch);
            if (t > burn_in)
                for (std::size_t i = 0; i < n; ++i) count[i] += draws[i];
        }
        for (std::size_t i = 0; i < n; ++i)
            freq[r * n + i] = static_cast<double>(count[i]) / static_cast<double>(t_max - burn_in);
    });
    LongRunMarginals out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), runs};
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (std::size_t r = 0; r < runs; ++r) mean += freq[r * n + i];
        mean /= static_cast<double>(runs);
        double ss = 0.0;
        for (std::size_t r = 0; r < runs; ++r) ss += (freq[r * n + i] - mean) * (freq[r * n + i] - mean);
        out.mean[i] = mean;
        out.standard_error[i] = std::sqrt(ss / static_cast<double>(runs - 1) / static_cast<double>(runs));
    }
    return out;
}

}  // namespace ipcn
