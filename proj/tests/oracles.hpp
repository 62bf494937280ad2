#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library's numerics; the urn composition is recomputed from raw
// ball counts and linear algebra goes through dense Eigen solves.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Red fraction of an urn whose last draws are `window` (any order), from
// raw ball counts: R + dr*reds over T + dr*reds + db*blacks.
inline double urn_ratio(double R, double T, double dr, double db, const std::vector<int>& window) {
    double red = R, total = T;
    for (int z : window) {
        red += z ? dr : 0.0;
        total += z ? dr : db;
    }
    return red / total;
}

struct Network {
    int n = 0;
    int m = 0;
    std::vector<double> R, T, dr, db;
    std::vector<double> S;  // row-major
};

// Window bit of urn i at lag k (k = 0 oldest) in state a.
inline int bit(std::uint64_t a, int m, int i, int k) { return static_cast<int>((a >> (m * i + k)) & 1u); }

inline std::vector<double> red_probs(const Network& net, std::uint64_t a) {
    std::vector<double> U(net.n), p(net.n, 0.0);
    for (int j = 0; j < net.n; ++j) {
        std::vector<int> w;
        for (int k = 0; k < net.m; ++k) w.push_back(bit(a, net.m, j, k));
        U[j] = urn_ratio(net.R[j], net.T[j], net.dr[j], net.db[j], w);
    }
    for (int i = 0; i < net.n; ++i)
        for (int j = 0; j < net.n; ++j) p[i] += net.S[i * net.n + j] * U[j];
    return p;
}

// Dense Q[a][b]: b must be a shifted by one lag with the new draws on top.
inline Eigen::MatrixXd dense_kernel(const Network& net) {
    const int bits = net.n * net.m;
    const std::uint64_t states = std::uint64_t{1} << bits;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
    for (std::uint64_t a = 0; a < states; ++a) {
        const auto p = red_probs(net, a);
        for (std::uint64_t b = 0; b < states; ++b) {
            double prob = 1.0;
            for (int i = 0; i < net.n && prob > 0.0; ++i) {
                for (int k = 0; k + 1 < net.m; ++k)
                    if (bit(b, net.m, i, k) != bit(a, net.m, i, k + 1)) prob = 0.0;
                const int z = bit(b, net.m, i, net.m - 1);
                prob *= z ? p[i] : 1.0 - p[i];
            }
            Q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = prob;
        }
    }
    return Q;
}

// Left Perron vector of a stochastic matrix via the null space of Q^T - I.
inline Eigen::VectorXd stationary(const Eigen::MatrixXd& Q) {
    const auto n = Q.rows();
    Eigen::MatrixXd A = Q.transpose() - Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    return A.fullPivLu().solve(rhs);
}

// Nonlinear mean-field step by brute force over all window configurations.
// lags[j][k-1] = P_j(t-k).
inline std::vector<double> meanfield_step(const Network& net, const std::vector<std::vector<double>>& lags) {
    const int bits = net.n * net.m;
    std::vector<double> out(net.n, 0.0);
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << bits); ++a) {
        double w = 1.0;
        for (int j = 0; j < net.n; ++j)
            for (int k = 0; k < net.m; ++k) w *= bit(a, net.m, j, k) ? lags[j][k] : 1.0 - lags[j][k];
        const auto p = red_probs(net, a);
        for (int i = 0; i < net.n; ++i) out[i] += w * p[i];
    }
    return out;
}

inline std::vector<double> random_stochastic(std::mt19937_64& g, int n, double zero_prob = 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> S(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            S[i * n + j] = (u(g) < zero_prob && j != i) ? 0.0 : u(g) + 1e-3;
            sum += S[i * n + j];
        }
        for (int j = 0; j < n; ++j) S[i * n + j] /= sum;
    }
    return S;
}

}  // namespace oracle
