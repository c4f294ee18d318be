#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ckms/cluster.hpp"
#include "ckms/deploy.hpp"
#include "ckms/rng.hpp"

namespace ckms {

/// Number of distinct pairwise keys in a population of n: n(n-1)/2, exact.
inline std::uint64_t pool_size(std::uint64_t n) {
    if (n < 2) return 0;
    return (n % 2 == 0) ? (n / 2) * (n - 1) : n * ((n - 1) / 2);
}

/// Birthday approximation 1 - (1 - 1/n)^C(s,2): the probability that some
/// pair collides among s draws over n slots.
inline double birthday_probability(std::uint64_t n, std::uint64_t s) {
    if (n < 2) throw std::invalid_argument("birthday_probability: population must be at least 2");
    const std::uint64_t pairs = pool_size(s);
    return -std::expm1(static_cast<double>(pairs) *
                       std::log1p(-1.0 / static_cast<double>(n)));
}

/// Exact birthday collision probability for n people over `days` days,
/// 1 - prod_{i<n}(1 - i/days). Serves as the oracle for the approximation.
/// n > days returns 1 (pigeonhole) rather than erroring.
inline double exact_birthday_probability(std::uint64_t days, std::uint64_t n) {
    if (days == 0)
        throw std::invalid_argument("exact_birthday_probability: day count must be at least 1");
    if (n > days) return 1.0;
    double no_collision = 1.0;
    for (std::uint64_t i = 1; i < n; ++i)
        no_collision *= 1.0 - static_cast<double>(i) / static_cast<double>(days);
    return 1.0 - no_collision;
}

/// Inverts p = 1 - (1 - 1/n)^{s(s-1)/2} for real s and floors, clamped to
/// [0, n-1]: the number of key-share partners per node that hits target
/// probability p in a population of n.
inline std::uint32_t key_set_size(std::uint64_t n, double p) {
    if (n < 2) throw std::invalid_argument("key_set_size: population must be at least 2");
    if (!(p > 0.0) || !(p < 1.0))
        throw std::invalid_argument("key_set_size: probability must lie strictly inside (0, 1)");
    const double pair_target = std::log1p(-p) / std::log1p(-1.0 / static_cast<double>(n));
    double s = std::floor((1.0 + std::sqrt(1.0 + 8.0 * pair_target)) / 2.0);
    if (s < 0.0) s = 0.0;
    const double cap = static_cast<double>(n - 1);
    if (s > cap) s = cap;
    return static_cast<std::uint32_t>(s);
}

/// Opaque identifier of one pairwise key: canonical endpoint order plus the
/// scope it was issued under (a cluster, or the controller tier).
struct KeyId {
    static constexpr std::uint32_t kControllerScope = 0xffffffffu;

    std::uint32_t scope = 0;  // cluster index, or kControllerScope
    std::uint32_t a = 0;      // endpoint ids, a < b
    std::uint32_t b = 0;

    static KeyId node_pair(std::uint32_t cluster, std::uint32_t x, std::uint32_t y) {
        if (x == y) throw std::invalid_argument("KeyId: endpoints must differ");
        return {cluster, std::min(x, y), std::max(x, y)};
    }
    static KeyId controller_pair(std::uint32_t x, std::uint32_t y) {
        if (x == y) throw std::invalid_argument("KeyId: endpoints must differ");
        return {kControllerScope, std::min(x, y), std::max(x, y)};
    }
    friend auto operator<=>(const KeyId&, const KeyId&) = default;
};

/// Undirected "shares a pairwise key" relation among nodes, kept per
/// cluster. Edges never cross clusters; both endpoints store the key.
struct KeyShareGraph {
    std::vector<std::uint32_t> nominal_s;  // target partners per node, per cluster
    std::vector<std::vector<std::pair<NodeId, NodeId>>> cluster_edges;  // canonical a < b
    std::vector<std::vector<NodeId>> adjacency;  // per node, ascending

    bool shares_key(NodeId a, NodeId b) const {
        const auto& nb = adjacency[a];
        return std::binary_search(nb.begin(), nb.end(), b);
    }
    std::size_t degree(NodeId i) const { return adjacency[i].size(); }
    std::size_t edge_count() const {
        std::size_t total = 0;
        for (const auto& edges : cluster_edges) total += edges.size();
        return total;
    }
    double mean_degree() const {
        if (adjacency.empty()) return 0.0;
        return 2.0 * static_cast<double>(edge_count()) / static_cast<double>(adjacency.size());
    }
};

/// Draws `shares` distinct partners for every cluster member in ascending
/// id order and returns the resulting undirected edge set (canonical,
/// sorted, deduplicated). Reciprocal draws collapse into one edge.
inline std::vector<std::pair<NodeId, NodeId>> distribute_node_keys(
    const std::vector<NodeId>& members, std::uint32_t shares, RandomEngine& rng) {
    if (shares != 0 && shares >= members.size())
        throw std::invalid_argument(
            "distribute_node_keys: a node cannot share keys with more partners than peers");
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(members.size() * shares);
    for (const NodeId node : members) {
        std::vector<NodeId> pool;
        pool.reserve(members.size() - 1);
        for (const NodeId other : members)
            if (other != node) pool.push_back(other);
        for (const NodeId partner : sample_without_replacement(rng, std::move(pool), shares))
            edges.emplace_back(std::min(node, partner), std::max(node, partner));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

/// Builds the per-cluster key graphs for one sharing probability. Each
/// cluster uses its own child seed, so clusters could be processed in any
/// order (or in parallel) with identical results.
inline KeyShareGraph build_key_share_graph(const Clustering& clustering, double p,
                                           std::uint64_t seed) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::invalid_argument(
            "build_key_share_graph: probability must lie strictly inside (0, 1)");
    const auto members = members_by_cluster(clustering.assignment, clustering.cluster_count);
    KeyShareGraph graph;
    graph.adjacency.resize(clustering.assignment.size());
    for (std::uint32_t c = 0; c < clustering.cluster_count; ++c) {
        const std::size_t n = members[c].size();
        const std::uint32_t s = n < 2 ? 0 : key_set_size(n, p);
        graph.nominal_s.push_back(s);
        RandomEngine rng(derive_seed(seed, c));
        auto edges = distribute_node_keys(members[c], s, rng);
        for (const auto& [a, b] : edges) {
            graph.adjacency[a].push_back(b);
            graph.adjacency[b].push_back(a);
        }
        graph.cluster_edges.push_back(std::move(edges));
    }
    for (auto& nb : graph.adjacency) std::sort(nb.begin(), nb.end());
    return graph;
}

/// Which controllers can hear each other: {a,b} iff distance <= range_d
/// (boundary inclusive). in_range holds peers only, ascending.
struct ControllerRangeGraph {
    double range_d = 0.0;
    std::vector<std::vector<std::uint32_t>> in_range;

    std::size_t size() const { return in_range.size(); }
};

inline ControllerRangeGraph controller_range_graph(const std::vector<Position>& controllers,
                                                   double range_d) {
    if (!(range_d > 0.0))
        throw std::invalid_argument("controller_range_graph: range must be positive");
    ControllerRangeGraph graph{range_d, {}};
    graph.in_range.resize(controllers.size());
    for (std::uint32_t a = 0; a < controllers.size(); ++a)
        for (std::uint32_t b = a + 1; b < controllers.size(); ++b)
            if (distance(controllers[a], controllers[b]) <= range_d) {
                graph.in_range[a].push_back(b);
                graph.in_range[b].push_back(a);
            }
    return graph;
}

/// Key-sharing relation among sub-controllers. l counts the clusters within
/// range including the controller's own, mirroring the population term of
/// the birthday sizing, so partners are drawn from the l-1 in-range peers.
struct ControllerKeyGraph {
    double range_d = 0.0;
    std::vector<std::uint32_t> l_per_controller;
    std::vector<std::uint32_t> nominal_ss;
    std::vector<std::vector<std::uint32_t>> adjacency;  // key-sharing peers, ascending
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // canonical a < b

    std::size_t size() const { return adjacency.size(); }
    bool shares_key(std::uint32_t a, std::uint32_t b) const {
        const auto& nb = adjacency[a];
        return std::binary_search(nb.begin(), nb.end(), b);
    }
};

/// Sizes ss = key_set_size(l, p) per controller (clamped to its peer count)
/// and draws that many distinct in-range partners; edges accumulate
/// undirected. A controller with no in-range peer shares nothing.
inline ControllerKeyGraph distribute_controller_keys(const ControllerRangeGraph& range,
                                                     double p, RandomEngine& rng) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::invalid_argument(
            "distribute_controller_keys: probability must lie strictly inside (0, 1)");
    ControllerKeyGraph graph;
    graph.range_d = range.range_d;
    graph.adjacency.resize(range.size());
    for (std::uint32_t c = 0; c < range.size(); ++c) {
        const auto& peers = range.in_range[c];
        const auto l = static_cast<std::uint32_t>(peers.size() + 1);
        graph.l_per_controller.push_back(l);
        std::uint32_t ss = 0;
        if (!peers.empty()) ss = key_set_size(l, p);  // key_set_size caps at l-1
        graph.nominal_ss.push_back(ss);
        for (const std::uint32_t partner : sample_without_replacement(rng, peers, ss))
            graph.edges.emplace_back(std::min(c, partner), std::max(c, partner));
    }
    std::sort(graph.edges.begin(), graph.edges.end());
    graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end()), graph.edges.end());
    for (const auto& [a, b] : graph.edges) {
        graph.adjacency[a].push_back(b);
        graph.adjacency[b].push_back(a);
    }
    for (auto& nb : graph.adjacency) std::sort(nb.begin(), nb.end());
    return graph;
}

/// Dump of both key graphs: scope is the cluster index for node-tier keys
/// and "ctrl" for controller-tier keys.
inline void dump_key_graphs_csv(const KeyShareGraph& node_keys,
                                const ControllerKeyGraph& controller_keys,
                                std::ostream& out) {
    out << "scope,endpoint_a,endpoint_b\n";
    for (std::uint32_t c = 0; c < node_keys.cluster_edges.size(); ++c)
        for (const auto& [a, b] : node_keys.cluster_edges[c]) {
            const KeyId key = KeyId::node_pair(c, a, b);
            out << key.scope << ',' << key.a << ',' << key.b << '\n';
        }
    for (const auto& [a, b] : controller_keys.edges) {
        const KeyId key = KeyId::controller_pair(a, b);
        out << "ctrl," << key.a << ',' << key.b << '\n';
    }
}

}  // namespace ckms
