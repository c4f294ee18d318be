#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ckms/cluster.hpp"
#include "ckms/csv.hpp"
#include "ckms/deploy.hpp"
#include "ckms/keys.hpp"
#include "ckms/rng.hpp"
#include "ckms/route.hpp"

namespace ckms {

/// The probability sweep used by the headline experiments.
inline std::vector<double> default_probability_sweep() {
    return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 0.9999, 0.999999999};
}

struct SimConfig {
    std::size_t nodes = 4000;
    std::uint32_t clusters = 4;
    double area_side = 1000.0;
    std::vector<double> probabilities = default_probability_sweep();
    std::optional<double> controller_range;  // defaults to the area diagonal
    std::uint32_t queries_per_trial = 10000;
    std::uint32_t trials = 10;
    std::uint64_t seed = 1;
    EntryPolicy entry_policy = EntryPolicy::direct;

    double effective_controller_range() const {
        return controller_range.value_or(std::hypot(area_side, area_side));
    }

    void validate() const {
        if (nodes < 2) throw std::invalid_argument("config: at least 2 nodes required");
        if (nodes > std::numeric_limits<NodeId>::max())
            throw std::invalid_argument("config: node count exceeds the id space");
        if (clusters == 0) throw std::invalid_argument("config: at least 1 cluster required");
        if (clusters > nodes)
            throw std::invalid_argument("config: cluster count cannot exceed node count");
        if (!std::isfinite(area_side) || !(area_side > 0.0))
            throw std::invalid_argument("config: area side must be positive");
        for (const double p : probabilities)
            if (!(p > 0.0) || !(p < 1.0))
                throw std::invalid_argument(
                    "config: probabilities must lie strictly inside (0, 1)");
        if (controller_range &&
            (!std::isfinite(*controller_range) || !(*controller_range > 0.0)))
            throw std::invalid_argument("config: controller range must be positive");
        if (queries_per_trial == 0)
            throw std::invalid_argument("config: at least 1 query per trial required");
        if (trials == 0) throw std::invalid_argument("config: at least 1 trial required");
    }
};

/// One probability's aggregated row: the quantities plotted per sweep point.
struct MetricsRecord {
    double probability = 0.0;
    std::uint32_t clusters = 0;
    std::uint64_t nodes = 0;
    std::uint32_t s_nominal = 0;   // key_set_size at the equal-split cluster size
    double mean_degree = 0.0;      // realized mean key-share degree
    double avg_hops = 0.0;         // over delivered queries only
    double intra_avg_hops = 0.0;
    double inter_avg_hops = 0.0;
    double delivery_rate = 0.0;
    std::uint64_t pool_keys_cluster = 0;
    std::uint64_t pool_keys_network = 0;
    std::uint32_t trials = 0;
    std::uint64_t seed = 0;
};

struct QueryTally {
    std::uint64_t intra_queries = 0;
    std::uint64_t inter_queries = 0;
    std::uint64_t intra_delivered = 0;
    std::uint64_t inter_delivered = 0;
    std::uint64_t intra_hop_sum = 0;
    std::uint64_t inter_hop_sum = 0;
    std::uint64_t dead_ends = 0;
    std::uint64_t hop_limits = 0;
    std::uint64_t controller_failures = 0;

    std::uint64_t queries() const { return intra_queries + inter_queries; }
    std::uint64_t delivered() const { return intra_delivered + inter_delivered; }
    std::uint64_t failures() const { return dead_ends + hop_limits + controller_failures; }
};

struct ProbabilityCell {
    double probability = 0.0;
    double mean_degree = 0.0;
    QueryTally tally;
};

struct TrialResult {
    std::uint32_t trial_index = 0;
    std::uint64_t trial_seed = 0;
    std::vector<ProbabilityCell> cells;  // one per probability, sweep order
};

inline constexpr std::string_view kTraceCsvHeader = "src,dst,kind,hops,from_cache,outcome";

/// Runs one trial: a fresh deployment and clustering from the trial's child
/// seed, then key graphs and the same fixed query set for every probability
/// in the sweep, so sharing probability is the only varying factor.
inline TrialResult run_trial(const SimConfig& config, std::uint32_t trial_index,
                             std::ostream* trace = nullptr) {
    config.validate();
    const std::uint64_t trial_seed = derive_seed(config.seed, trial_index);
    const Deployment deployment = generate_deployment(
        config.nodes, config.area_side, derive_seed(trial_seed, SeedStream::deployment));
    RandomEngine clustering_rng(derive_seed(trial_seed, SeedStream::clustering));
    const Clustering clustering =
        kmeanspp(deployment.positions, config.clusters, clustering_rng);
    const ControllerRangeGraph range =
        controller_range_graph(clustering.means, config.effective_controller_range());

    RandomEngine query_rng(derive_seed(trial_seed, SeedStream::queries));
    std::vector<std::pair<NodeId, NodeId>> queries;
    queries.reserve(config.queries_per_trial);
    for (std::uint32_t q = 0; q < config.queries_per_trial; ++q) {
        const auto src = static_cast<NodeId>(uniform_below(query_rng, config.nodes));
        auto dst = static_cast<NodeId>(uniform_below(query_rng, config.nodes - 1));
        if (dst >= src) ++dst;
        queries.emplace_back(src, dst);
    }

    TrialResult result{trial_index, trial_seed, {}};
    for (std::size_t ip = 0; ip < config.probabilities.size(); ++ip) {
        const double p = config.probabilities[ip];
        KeyShareGraph node_keys = build_key_share_graph(
            clustering, p, derive_seed(trial_seed, SeedStream::node_keys, ip));
        RandomEngine controller_rng(
            derive_seed(trial_seed, SeedStream::controller_keys, ip));
        ControllerKeyGraph controller_keys = distribute_controller_keys(range, p, controller_rng);
        const World world = build_world(deployment, clustering, std::move(node_keys),
                                        std::move(controller_keys));
        PathCache cache;
        ProbabilityCell cell{p, world.node_keys.mean_degree(), {}};
        for (const auto& [src, dst] : queries) {
            const RouteResult outcome = route(world, cache, src, dst, config.entry_policy);
            const bool inter =
                world.clustering.assignment[src] != world.clustering.assignment[dst];
            auto& tally = cell.tally;
            (inter ? tally.inter_queries : tally.intra_queries) += 1;
            if (outcome.delivered()) {
                (inter ? tally.inter_delivered : tally.intra_delivered) += 1;
                (inter ? tally.inter_hop_sum : tally.intra_hop_sum) +=
                    outcome.path.hop_count();
            } else {
                switch (outcome.outcome) {
                    case RouteOutcome::dead_end: ++tally.dead_ends; break;
                    case RouteOutcome::hop_limit: ++tally.hop_limits; break;
                    case RouteOutcome::no_controller_path: ++tally.controller_failures; break;
                    case RouteOutcome::delivered: break;
                }
            }
            if (trace)
                *trace << src << ',' << dst << ',' << (inter ? "inter" : "intra") << ','
                       << (outcome.delivered() ? outcome.path.hop_count() : 0) << ','
                       << (outcome.path.from_cache ? "true" : "false") << ','
                       << to_string(outcome.outcome) << '\n';
        }
        result.cells.push_back(cell);
    }
    return result;
}

namespace detail {
inline double ratio_or_nan(std::uint64_t numerator, std::uint64_t denominator) {
    if (denominator == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}
}  // namespace detail

/// Merges trials into one record per probability. Hop averages pool the
/// delivered queries of all trials (failures excluded before averaging);
/// trials merge in index order, so the result is order-independent.
inline std::vector<MetricsRecord> aggregate(const SimConfig& config,
                                            const std::vector<TrialResult>& trials) {
    if (trials.empty()) throw std::invalid_argument("aggregate: at least one trial required");
    for (const TrialResult& trial : trials)
        if (trial.cells.size() != config.probabilities.size())
            throw std::invalid_argument("aggregate: trial is missing probability cells");
    const std::uint64_t cluster_slot = config.nodes / config.clusters;
    std::vector<MetricsRecord> records;
    records.reserve(config.probabilities.size());
    for (std::size_t ip = 0; ip < config.probabilities.size(); ++ip) {
        const double p = config.probabilities[ip];
        QueryTally total;
        double degree_sum = 0.0;
        for (const TrialResult& trial : trials) {
            const ProbabilityCell& cell = trial.cells[ip];
            total.intra_queries += cell.tally.intra_queries;
            total.inter_queries += cell.tally.inter_queries;
            total.intra_delivered += cell.tally.intra_delivered;
            total.inter_delivered += cell.tally.inter_delivered;
            total.intra_hop_sum += cell.tally.intra_hop_sum;
            total.inter_hop_sum += cell.tally.inter_hop_sum;
            total.dead_ends += cell.tally.dead_ends;
            total.hop_limits += cell.tally.hop_limits;
            total.controller_failures += cell.tally.controller_failures;
            degree_sum += cell.mean_degree;
        }
        MetricsRecord record;
        record.probability = p;
        record.clusters = config.clusters;
        record.nodes = config.nodes;
        record.s_nominal = cluster_slot < 2 ? 0 : key_set_size(cluster_slot, p);
        record.mean_degree = degree_sum / static_cast<double>(trials.size());
        record.avg_hops =
            detail::ratio_or_nan(total.intra_hop_sum + total.inter_hop_sum, total.delivered());
        record.intra_avg_hops =
            detail::ratio_or_nan(total.intra_hop_sum, total.intra_delivered);
        record.inter_avg_hops =
            detail::ratio_or_nan(total.inter_hop_sum, total.inter_delivered);
        record.delivery_rate =
            static_cast<double>(total.delivered()) / static_cast<double>(total.queries());
        record.pool_keys_cluster = pool_size(cluster_slot);
        record.pool_keys_network = pool_size(config.nodes);
        record.trials = static_cast<std::uint32_t>(trials.size());
        record.seed = config.seed;
        records.push_back(record);
    }
    return records;
}

/// Runs all configured trials and aggregates them.
inline std::vector<MetricsRecord> run_simulation(const SimConfig& config,
                                                 std::ostream* trace = nullptr) {
    config.validate();
    if (trace) *trace << kTraceCsvHeader << '\n';
    std::vector<TrialResult> trials;
    trials.reserve(config.trials);
    for (std::uint32_t t = 0; t < config.trials; ++t)
        trials.push_back(run_trial(config, t, trace));
    return aggregate(config, trials);
}

inline constexpr std::string_view kMetricsCsvHeader =
    "prob,clusters,nodes,s_nominal,mean_degree,avg_hops,intra_hops,inter_hops,"
    "delivery_rate,pool_cluster,pool_network,trials,seed";

inline void write_metrics_csv(const std::vector<MetricsRecord>& records, std::ostream& out) {
    out << kMetricsCsvHeader << '\n';
    for (const MetricsRecord& r : records)
        out << format_double(r.probability) << ',' << r.clusters << ',' << r.nodes << ','
            << r.s_nominal << ',' << format_double(r.mean_degree) << ','
            << format_double(r.avg_hops) << ',' << format_double(r.intra_avg_hops) << ','
            << format_double(r.inter_avg_hops) << ',' << format_double(r.delivery_rate)
            << ',' << r.pool_keys_cluster << ',' << r.pool_keys_network << ',' << r.trials
            << ',' << r.seed << '\n';
}

inline void write_metrics_csv(const std::vector<MetricsRecord>& records,
                              const std::filesystem::path& destination) {
    std::ofstream out(destination, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open metrics output file: " + destination.string());
    write_metrics_csv(records, out);
    out.flush();
    if (!out)
        throw std::runtime_error("failed while writing metrics to: " + destination.string());
}

}  // namespace ckms
