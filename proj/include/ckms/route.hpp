#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ckms/cluster.hpp"
#include "ckms/deploy.hpp"
#include "ckms/keys.hpp"

namespace ckms {

enum class HopKind : std::uint8_t { node, controller };

struct Hop {
    HopKind kind = HopKind::node;
    std::uint32_t id = 0;
    friend bool operator==(const Hop&, const Hop&) = default;
};

inline Hop node_hop(NodeId id) { return {HopKind::node, id}; }
inline Hop controller_hop(std::uint32_t c) { return {HopKind::controller, c}; }

enum class RouteKind : std::uint8_t { intra, inter };

enum class RouteOutcome : std::uint8_t {
    delivered,
    dead_end,            // greedy forwarding ran out of unvisited key neighbours
    hop_limit,           // greedy forwarding exceeded the cluster-size budget
    no_controller_path,  // source and destination controllers are disconnected
};

inline const char* to_string(RouteOutcome outcome) {
    switch (outcome) {
        case RouteOutcome::delivered: return "delivered";
        case RouteOutcome::dead_end: return "dead_end";
        case RouteOutcome::hop_limit: return "hop_limit";
        case RouteOutcome::no_controller_path: return "no_controller_path";
    }
    return "unknown";
}

/// An established path. Consecutive node-node hops share a key edge,
/// controller-controller hops share a controller key edge, and node to
/// controller hops only join a node with its own cluster's controller.
struct RoutePath {
    RouteKind kind = RouteKind::intra;
    bool from_cache = false;
    std::vector<Hop> hops;

    std::size_t hop_count() const { return hops.empty() ? 0 : hops.size() - 1; }
};

struct RouteResult {
    RouteOutcome outcome = RouteOutcome::dead_end;
    RoutePath path;  // meaningful when delivered; partial walk otherwise

    bool delivered() const { return outcome == RouteOutcome::delivered; }
};

/// All-pairs unit-weight shortest paths over the controller key graph.
/// Unreachable pairs carry distance -1.
struct ControllerRouteTable {
    std::vector<std::vector<std::int32_t>> dist;
    std::vector<std::vector<std::uint32_t>> adjacency;

    std::int32_t distance_between(std::uint32_t a, std::uint32_t b) const { return dist[a][b]; }

    /// Canonical shortest path from a to b: each hop advances one level
    /// toward b, taking the lowest next controller id among equals.
    std::optional<std::vector<std::uint32_t>> path_between(std::uint32_t a,
                                                           std::uint32_t b) const {
        if (dist[a][b] < 0) return std::nullopt;
        std::vector<std::uint32_t> path{a};
        std::uint32_t current = a;
        while (current != b) {
            for (const std::uint32_t next : adjacency[current]) {  // ascending ids
                if (dist[next][b] == dist[current][b] - 1) {
                    current = next;
                    break;
                }
            }
            path.push_back(current);
        }
        return path;
    }
};

/// Dijkstra from every controller, all weights 1. The priority queue orders
/// by (distance, id) so discovery is deterministic.
inline ControllerRouteTable controller_paths(const ControllerKeyGraph& graph) {
    const std::size_t k = graph.size();
    ControllerRouteTable table;
    table.adjacency = graph.adjacency;
    table.dist.assign(k, std::vector<std::int32_t>(k, -1));
    using Entry = std::pair<std::int32_t, std::uint32_t>;
    for (std::uint32_t src = 0; src < k; ++src) {
        auto& dist = table.dist[src];
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
        dist[src] = 0;
        queue.push({0, src});
        while (!queue.empty()) {
            const auto [d, u] = queue.top();
            queue.pop();
            if (d > dist[u]) continue;
            for (const std::uint32_t v : graph.adjacency[u]) {
                const std::int32_t nd = d + 1;
                if (dist[v] < 0 || nd < dist[v]) {
                    dist[v] = nd;
                    queue.push({nd, v});
                }
            }
        }
    }
    return table;
}

/// Greedy key-graph forwarding between same-cluster nodes: when the current
/// node shares a key with the destination the message goes straight there,
/// otherwise it moves to the unvisited key neighbour geographically nearest
/// the destination (ties to the lowest id). Nodes already on the path are
/// never revisited; running out of candidates is a dead end, and the walk
/// gives up once it exceeds `cluster_size` hops.
inline RouteResult greedy_route(NodeId src, NodeId dst, const KeyShareGraph& keys,
                                const std::vector<Position>& positions,
                                const std::vector<std::uint32_t>& assignment,
                                std::size_t cluster_size) {
    if (src == dst) throw std::invalid_argument("greedy_route: source equals destination");
    if (src >= positions.size() || dst >= positions.size())
        throw std::invalid_argument("greedy_route: node id out of range");
    if (assignment[src] != assignment[dst])
        throw std::invalid_argument("greedy_route: endpoints lie in different clusters");
    RouteResult result;
    result.path.kind = RouteKind::intra;
    result.path.hops.push_back(node_hop(src));
    std::vector<std::uint8_t> visited(positions.size(), 0);
    visited[src] = 1;
    NodeId current = src;
    for (;;) {
        if (keys.shares_key(current, dst)) {
            result.path.hops.push_back(node_hop(dst));
            result.outcome = RouteOutcome::delivered;
            return result;
        }
        NodeId best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        bool found = false;
        for (const NodeId neighbour : keys.adjacency[current]) {  // ascending ids
            if (visited[neighbour]) continue;
            const double d2 = distance_squared(positions[neighbour], positions[dst]);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = neighbour;
                found = true;
            }
        }
        if (!found) {
            result.outcome = RouteOutcome::dead_end;
            return result;
        }
        visited[best] = 1;
        result.path.hops.push_back(node_hop(best));
        current = best;
        if (result.path.hop_count() > cluster_size) {
            result.outcome = RouteOutcome::hop_limit;
            return result;
        }
    }
}

/// Everything a routing query needs, bundled by value.
struct World {
    Deployment deployment;
    Clustering clustering;
    std::vector<std::vector<NodeId>> cluster_members;
    KeyShareGraph node_keys;
    ControllerKeyGraph controller_keys;
    ControllerRouteTable controller_routes;
};

inline World build_world(Deployment deployment, Clustering clustering,
                         KeyShareGraph node_keys, ControllerKeyGraph controller_keys) {
    World world{std::move(deployment), std::move(clustering), {}, std::move(node_keys),
                std::move(controller_keys), {}};
    world.cluster_members =
        members_by_cluster(world.clustering.assignment, world.clustering.cluster_count);
    world.controller_routes = controller_paths(world.controller_keys);
    return world;
}

/// How the final leg of an inter-cluster path enters the destination
/// cluster: `direct` hops controller -> destination; `greedy` enters at the
/// member nearest the destination and forwards greedily from there.
enum class EntryPolicy : std::uint8_t { direct, greedy };

/// Source -> own controller -> controller path -> destination cluster.
/// A node reaches its own sub-controller (and vice versa) in one hop; those
/// hops count. Fails when the controllers are disconnected or when the
/// greedy tail fails, reported distinctly.
inline RouteResult inter_cluster_route(NodeId src, NodeId dst, const World& world,
                                       EntryPolicy policy) {
    if (src == dst)
        throw std::invalid_argument("inter_cluster_route: source equals destination");
    const std::uint32_t src_cluster = world.clustering.assignment[src];
    const std::uint32_t dst_cluster = world.clustering.assignment[dst];
    if (src_cluster == dst_cluster)
        throw std::invalid_argument("inter_cluster_route: endpoints share a cluster");
    RouteResult result;
    result.path.kind = RouteKind::inter;
    const auto controller_path =
        world.controller_routes.path_between(src_cluster, dst_cluster);
    if (!controller_path) {
        result.outcome = RouteOutcome::no_controller_path;
        return result;
    }
    result.path.hops.push_back(node_hop(src));
    for (const std::uint32_t c : *controller_path)
        result.path.hops.push_back(controller_hop(c));
    if (policy == EntryPolicy::direct) {
        result.path.hops.push_back(node_hop(dst));
        result.outcome = RouteOutcome::delivered;
        return result;
    }
    // Entry node: the destination-cluster member nearest the destination,
    // destination excluded, ties to the lowest id.
    const Position dst_pos = world.deployment.positions[dst];
    NodeId entry = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    bool found = false;
    for (const NodeId member : world.cluster_members[dst_cluster]) {
        if (member == dst) continue;
        const double d2 = distance_squared(world.deployment.positions[member], dst_pos);
        if (d2 < best_d2) {
            best_d2 = d2;
            entry = member;
            found = true;
        }
    }
    if (!found) {  // destination is alone in its cluster; its controller reaches it directly
        result.path.hops.push_back(node_hop(dst));
        result.outcome = RouteOutcome::delivered;
        return result;
    }
    const RouteResult tail =
        greedy_route(entry, dst, world.node_keys, world.deployment.positions,
                     world.clustering.assignment, world.cluster_members[dst_cluster].size());
    if (!tail.delivered()) {
        result.outcome = tail.outcome;
        result.path.hops.clear();
        return result;
    }
    result.path.hops.insert(result.path.hops.end(), tail.path.hops.begin(),
                            tail.path.hops.end());
    result.outcome = RouteOutcome::delivered;
    return result;
}

/// Memo of delivered routes keyed by the ordered (source, destination)
/// pair. Greedy routes are not symmetric, so there is no reverse reuse.
struct PathCache {
    std::unordered_map<std::uint64_t, RoutePath> entries;

    static std::uint64_t key(NodeId src, NodeId dst) {
        return (static_cast<std::uint64_t>(src) << 32) | dst;
    }
    const RoutePath* find(NodeId src, NodeId dst) const {
        const auto it = entries.find(key(src, dst));
        return it == entries.end() ? nullptr : &it->second;
    }
    void store(NodeId src, NodeId dst, const RoutePath& path) {
        entries.emplace(key(src, dst), path);
    }
    std::size_t size() const { return entries.size(); }
};

/// On-demand routing: consult the cache, otherwise dispatch on whether the
/// endpoints share a cluster. Delivered paths are cached and repeat queries
/// return them verbatim with from_cache set; failures are not cached.
inline RouteResult route(const World& world, PathCache& cache, NodeId src, NodeId dst,
                         EntryPolicy policy = EntryPolicy::direct) {
    if (src == dst) throw std::invalid_argument("route: source equals destination");
    if (src >= world.deployment.size() || dst >= world.deployment.size())
        throw std::invalid_argument("route: node id out of range");
    if (const RoutePath* hit = cache.find(src, dst)) {
        RouteResult result{RouteOutcome::delivered, *hit};
        result.path.from_cache = true;
        return result;
    }
    const std::uint32_t src_cluster = world.clustering.assignment[src];
    const std::uint32_t dst_cluster = world.clustering.assignment[dst];
    RouteResult result =
        src_cluster == dst_cluster
            ? greedy_route(src, dst, world.node_keys, world.deployment.positions,
                           world.clustering.assignment,
                           world.cluster_members[src_cluster].size())
            : inter_cluster_route(src, dst, world, policy);
    if (result.delivered()) cache.store(src, dst, result.path);
    return result;
}

}  // namespace ckms
