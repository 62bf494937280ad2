#pragma once

// Interaction-matrix construction: preferential-attachment graphs, the
// directed ring, complete and identity interactions, and row normalization
// of weighted adjacency with optional self-weight.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "ipcn/core.hpp"
#include "ipcn/csv.hpp"
#include "ipcn/philox.hpp"

namespace ipcn {

/// Dense N x N nonnegative weights.
class Adjacency {
public:
    Adjacency() = default;
    explicit Adjacency(std::size_t n, bool undirected = true) : n_(n), undirected_(undirected), w_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    bool undirected() const noexcept { return undirected_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return w_[i * n_ + j]; }

    void set(std::size_t i, std::size_t j, double w) {
        if (i >= n_ || j >= n_) throw std::out_of_range("adjacency index out of range");
        if (!(w >= 0.0)) throw ConfigError("edge weights must be nonnegative");
        w_[i * n_ + j] = w;
        if (undirected_) w_[j * n_ + i] = w;
    }

    std::size_t degree(std::size_t i) const {
        std::size_t d = 0;
        for (std::size_t j = 0; j < n_; ++j)
            if (j != i && w_[i * n_ + j] > 0.0) ++d;
        return d;
    }

    /// Edges (u, v, w), u < v for undirected graphs.
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges() const {
        std::vector<std::tuple<std::size_t, std::size_t, double>> out;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = undirected_ ? i : 0; j < n_; ++j)
                if (w_[i * n_ + j] > 0.0) out.emplace_back(i, j, w_[i * n_ + j]);
        return out;
    }

    std::size_t edge_count() const { return edges().size(); }

private:
    std::size_t n_ = 0;
    bool undirected_ = true;
    std::vector<double> w_;
};

/// Preferential attachment: start from the complete graph on m+1 nodes, then
/// each new node links to m distinct existing nodes drawn without replacement
/// with probability proportional to current degree.
inline Adjacency barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m < 1 || m >= n) throw ConfigError("barabasi_albert: need 1 <= m < n");
    Adjacency g(n, true);
    std::vector<std::size_t> deg(n, 0);
    for (std::size_t u = 0; u <= m; ++u)
        for (std::size_t v = u + 1; v <= m; ++v) {
            g.set(u, v, 1.0);
            ++deg[u];
            ++deg[v];
        }
    PhiloxEngine rng(seed);
    std::vector<std::size_t> chosen;
    for (std::size_t v = m + 1; v < n; ++v) {
        chosen.clear();
        std::vector<std::size_t> weight(deg.begin(), deg.begin() + static_cast<std::ptrdiff_t>(v));
        std::size_t total = 0;
        for (auto w : weight) total += w;
        for (std::size_t e = 0; e < m; ++e) {
            auto r = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(total) - 1));
            std::size_t pick = 0;
            while (r >= weight[pick]) {
                r -= weight[pick];
                ++pick;
            }
            chosen.push_back(pick);
            total -= weight[pick];
            weight[pick] = 0;
        }
        for (auto u : chosen) {
            g.set(u, v, 1.0);
            ++deg[u];
            ++deg[v];
        }
    }
    return g;
}

/// Directed n-cycle: urn i draws through urn i+1, the last urn through the first.
inline InteractionMatrix ring(std::size_t n) {
    if (n < 2) throw ConfigError("ring: need at least 2 nodes");
    std::vector<double> e(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) e[i * n + (i + 1) % n] = 1.0;
    return {n, std::move(e)};
}

inline Adjacency complete_graph(std::size_t n) {
    Adjacency g(n, true);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) g.set(u, v, 1.0);
    return g;
}

inline InteractionMatrix row_normalize(const Adjacency& adj, double self_weight) {
    if (!(self_weight >= 0.0)) throw ConfigError("self_weight must be nonnegative");
    const std::size_t n = adj.size();
    std::vector<double> e(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = (i == j ? self_weight : adj(i, j));
            e[i * n + j] = w;
            total += w;
        }
        if (!(total > 0.0))
            throw ConfigError("node " + std::to_string(i + 1) + " is isolated and has zero self-weight");
        for (std::size_t j = 0; j < n; ++j) e[i * n + j] /= total;
    }
    return {n, std::move(e)};
}

// File formats: edge list "u,v,weight" with 1-based node labels, and dense
// matrices with one row per line and no header.

inline void write_edge_list(const Adjacency& g, const std::string& path) {
    csv::Writer w(path);
    w.row("u", "v", "weight");
    for (auto [u, v, wt] : g.edges()) w.row(u + 1, v + 1, wt);
}

inline Adjacency read_edge_list(const std::string& path, std::size_t n = 0, bool undirected = true) {
    const auto t = csv::read(path);
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    std::size_t max_node = 0;
    for (const auto& r : t.rows) {
        if (r.size() < 2) throw ConfigError("edge list row needs at least u,v in '" + path + "'");
        const auto u = static_cast<std::size_t>(csv::parse_double(r[0]));
        const auto v = static_cast<std::size_t>(csv::parse_double(r[1]));
        const double w = r.size() > 2 ? csv::parse_double(r[2]) : 1.0;
        if (u < 1 || v < 1) throw ConfigError("edge list node labels are 1-based in '" + path + "'");
        edges.emplace_back(u - 1, v - 1, w);
        max_node = std::max({max_node, u, v});
    }
    Adjacency g(std::max(n, max_node), undirected);
    for (auto [u, v, w] : edges) g.set(u, v, w);
    return g;
}

inline void write_matrix(const InteractionMatrix& S, const std::string& path) {
    csv::Writer w(path);
    const std::size_t n = S.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::string line;
        for (std::size_t j = 0; j < n; ++j) {
            if (j) line += ',';
            line += csv::format_double(S(i, j));
        }
        w.row(line);
    }
}

inline InteractionMatrix read_matrix(const std::string& path) {
    const auto t = csv::read(path, false);
    const std::size_t n = t.rows.size();
    std::vector<double> e;
    e.reserve(n * n);
    for (const auto& r : t.rows) {
        if (r.size() != n) throw ConfigError("matrix file '" + path + "' is not square");
        for (const auto& f : r) e.push_back(csv::parse_double(f));
    }
    return {n, std::move(e)};
}

}  // namespace ipcn
