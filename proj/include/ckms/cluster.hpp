#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ckms/deploy.hpp"
#include "ckms/rng.hpp"

namespace ckms {

inline constexpr double kDefaultMeanTolerance = 1e-9;
inline constexpr std::uint32_t kDefaultMaxIterations = 100;

/// Result of clustering a deployment. The means double as the locations of
/// the per-cluster sub-controllers (controller c heads cluster c).
struct Clustering {
    std::uint32_t cluster_count = 0;
    std::vector<std::uint32_t> assignment;  // node id -> cluster index
    std::vector<Position> means;
    double objective = 0.0;  // sum of squared node-to-mean distances
    std::uint32_t iterations = 0;
};

/// Incremental state of k-means++ seeding: the centres chosen so far and
/// each point's squared distance to the nearest of them.
struct SeedingState {
    std::vector<Position> chosen;
    std::vector<double> d2;

    explicit SeedingState(std::size_t point_count)
        : d2(point_count, std::numeric_limits<double>::infinity()) {}

    void add_center(const std::vector<Position>& points, Position center) {
        chosen.push_back(center);
        for (std::size_t j = 0; j < points.size(); ++j) {
            const double d = distance_squared(points[j], center);
            if (d < d2[j]) d2[j] = d;
        }
    }

    double total_weight() const {
        double total = 0.0;
        for (double w : d2) total += w;
        return total;
    }
};

/// k-means++ seeding: first centre uniform over the points, every further
/// centre drawn with probability proportional to its squared distance from
/// the nearest centre already chosen. Centres are always input points.
inline std::vector<Position> seed_centers(const std::vector<Position>& points,
                                          std::uint32_t k, RandomEngine& rng) {
    if (k == 0) throw std::invalid_argument("seed_centers: k must be at least 1");
    if (points.empty() || k > points.size())
        throw std::invalid_argument("seed_centers: k exceeds the number of points");
    SeedingState state(points.size());
    state.add_center(points, points[uniform_below(rng, points.size())]);
    while (state.chosen.size() < k) {
        const double total = state.total_weight();
        if (!(total > 0.0))
            throw std::invalid_argument("seed_centers: k exceeds the number of distinct points");
        const double r = uniform_unit(rng) * total;
        // Prefix walk over the D^2 weights. Points colocated with a chosen
        // centre carry zero weight and are never selected.
        std::size_t pick = points.size();
        std::size_t last_positive = points.size();
        double acc = 0.0;
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (!(state.d2[j] > 0.0)) continue;
            last_positive = j;
            acc += state.d2[j];
            if (r < acc) {
                pick = j;
                break;
            }
        }
        if (pick == points.size()) pick = last_positive;  // r hit the top edge
        state.add_center(points, points[pick]);
    }
    return state.chosen;
}

/// Binds every point to its nearest mean; ties go to the lowest cluster
/// index so the result is a partition.
inline std::vector<std::uint32_t> assign_points(const std::vector<Position>& points,
                                                const std::vector<Position>& means) {
    if (means.empty()) throw std::invalid_argument("assign_points: means must be non-empty");
    std::vector<std::uint32_t> assignment(points.size(), 0);
    for (std::size_t j = 0; j < points.size(); ++j) {
        double best = distance_squared(points[j], means[0]);
        std::uint32_t best_cluster = 0;
        for (std::uint32_t c = 1; c < means.size(); ++c) {
            const double d = distance_squared(points[j], means[c]);
            if (d < best) {
                best = d;
                best_cluster = c;
            }
        }
        assignment[j] = best_cluster;
    }
    return assignment;
}

/// Recomputes each cluster mean as the centroid of its members. A cluster
/// left empty is relocated onto the point currently farthest from its own
/// cluster's fresh mean (distinct point per empty cluster, ascending
/// cluster order, ties to the lowest node id), preserving k clusters.
inline std::vector<Position> update_means(const std::vector<Position>& points,
                                          const std::vector<std::uint32_t>& assignment,
                                          std::uint32_t k) {
    if (assignment.size() != points.size())
        throw std::invalid_argument("update_means: assignment must cover all points");
    std::vector<double> sum_x(k, 0.0), sum_y(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t j = 0; j < points.size(); ++j) {
        const std::uint32_t c = assignment[j];
        if (c >= k) throw std::invalid_argument("update_means: cluster index out of range");
        sum_x[c] += points[j].x;
        sum_y[c] += points[j].y;
        ++count[c];
    }
    std::vector<Position> means(k);
    for (std::uint32_t c = 0; c < k; ++c)
        if (count[c] > 0)
            means[c] = {sum_x[c] / static_cast<double>(count[c]),
                        sum_y[c] / static_cast<double>(count[c])};
    std::vector<std::uint8_t> taken(points.size(), 0);
    for (std::uint32_t c = 0; c < k; ++c) {
        if (count[c] > 0) continue;
        std::size_t farthest = points.size();
        double farthest_d = -1.0;
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (taken[j]) continue;
            const double d = distance_squared(points[j], means[assignment[j]]);
            if (d > farthest_d) {
                farthest_d = d;
                farthest = j;
            }
        }
        if (farthest == points.size()) break;  // fewer points than empty clusters
        means[c] = points[farthest];
        taken[farthest] = 1;
    }
    return means;
}

/// Sum of squared distances from each point to its assigned mean.
inline double objective(const std::vector<Position>& points,
                        const std::vector<std::uint32_t>& assignment,
                        const std::vector<Position>& means) {
    double total = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j)
        total += distance_squared(points[j], means[assignment[j]]);
    return total;
}

/// Lloyd iteration from explicit starting means: bind, update, repeat until
/// no mean coordinate moves more than `tol` or `max_iter` is reached. When
/// `objective_trace` is given it receives the objective at each binding
/// (a non-increasing sequence ending at the converged value).
inline Clustering lloyd(const std::vector<Position>& points, std::vector<Position> means,
                        std::uint32_t max_iter = kDefaultMaxIterations,
                        double tol = kDefaultMeanTolerance,
                        std::vector<double>* objective_trace = nullptr) {
    if (means.empty()) throw std::invalid_argument("lloyd: means must be non-empty");
    const auto k = static_cast<std::uint32_t>(means.size());
    std::uint32_t iterations = 0;
    while (iterations < max_iter) {
        const auto assignment = assign_points(points, means);
        if (objective_trace)
            objective_trace->push_back(objective(points, assignment, means));
        auto updated = update_means(points, assignment, k);
        double moved = 0.0;
        for (std::uint32_t c = 0; c < k; ++c) {
            moved = std::max(moved, std::abs(updated[c].x - means[c].x));
            moved = std::max(moved, std::abs(updated[c].y - means[c].y));
        }
        means = std::move(updated);
        ++iterations;
        if (moved <= tol) break;
    }
    Clustering result;
    result.cluster_count = k;
    result.assignment = assign_points(points, means);  // rebind to the final means
    result.means = std::move(means);
    result.objective = objective(points, result.assignment, result.means);
    result.iterations = iterations;
    if (objective_trace) objective_trace->push_back(result.objective);
    return result;
}

/// k-means++ seeding followed by Lloyd iterations.
inline Clustering kmeanspp(const std::vector<Position>& points, std::uint32_t k,
                           RandomEngine& rng, std::uint32_t max_iter = kDefaultMaxIterations,
                           double tol = kDefaultMeanTolerance,
                           std::vector<double>* objective_trace = nullptr) {
    return lloyd(points, seed_centers(points, k, rng), max_iter, tol, objective_trace);
}

/// Per-cluster member lists, each ascending by node id.
inline std::vector<std::vector<NodeId>> members_by_cluster(
    const std::vector<std::uint32_t>& assignment, std::uint32_t k) {
    std::vector<std::vector<NodeId>> members(k);
    for (std::size_t i = 0; i < assignment.size(); ++i)
        members[assignment[i]].push_back(static_cast<NodeId>(i));
    return members;
}

inline void dump_clustering_csv(const Clustering& clustering, std::ostream& assignments_out,
                                std::ostream& means_out) {
    assignments_out << "node_id,cluster\n";
    for (std::size_t i = 0; i < clustering.assignment.size(); ++i)
        assignments_out << i << ',' << clustering.assignment[i] << '\n';
    means_out << "cluster,mean_x,mean_y\n";
    for (std::size_t c = 0; c < clustering.means.size(); ++c)
        means_out << c << ',' << format_double(clustering.means[c].x) << ','
                  << format_double(clustering.means[c].y) << '\n';
}

}  // namespace ckms
