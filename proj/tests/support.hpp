#pragma once

#include <random>

#include "ipcn/core.hpp"
#include "oracles.hpp"

namespace testing_support {

inline oracle::Network random_network(std::mt19937_64& g, int n, int m, double zero_prob = 0.0) {
    std::uniform_int_distribution<int> total(5, 40), delta(0, 30);
    oracle::Network net{n, m, {}, {}, {}, {}, oracle::random_stochastic(g, n, zero_prob)};
    for (int i = 0; i < n; ++i) {
        const int T = total(g);
        net.T.push_back(T);
        net.R.push_back(std::uniform_int_distribution<int>(1, T - 1)(g));
        net.dr.push_back(delta(g) + 1);
        net.db.push_back(delta(g) + 1);
    }
    return net;
}

inline ipcn::RawConfig to_raw(const oracle::Network& net) {
    ipcn::RawConfig raw;
    raw.urns = net.n;
    raw.memory = net.m;
    for (int i = 0; i < net.n; ++i) {
        raw.red.push_back(static_cast<std::int64_t>(net.R[i]));
        raw.total.push_back(static_cast<std::int64_t>(net.T[i]));
        raw.delta_r.push_back(static_cast<std::int64_t>(net.dr[i]));
        raw.delta_b.push_back(static_cast<std::int64_t>(net.db[i]));
    }
    raw.S = ipcn::InteractionMatrix(static_cast<std::size_t>(net.n), net.S);
    return raw;
}

inline ipcn::NetworkParams to_params(const oracle::Network& net) { return ipcn::normalize(to_raw(net)); }

}  // namespace testing_support
