#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "fskg/kg/triple_store.hpp"

namespace fskg::eval {

enum class RankMode { Raw, Filtered };

struct RankRecord {
    kg::Triple query;
    std::size_t rank = 0;          // 1-based
    std::size_t n_candidates = 0;
};

// Rank of the true tail among all candidate entities by ascending score.
// Filtered mode removes the other known true tails of (h, r) from the pool.
// Ties break by ascending entity id.
RankRecord rank_true_tail(const std::vector<double>& scores, const kg::Triple& query,
                          const std::unordered_set<kg::EntityId>& known_tails, RankMode mode);

double mrr(const std::vector<RankRecord>& ranks);
double hits_at(const std::vector<RankRecord>& ranks, std::size_t n);

struct MetricBlock {
    double mrr = 0.0;
    double hit1 = 0.0;
    double hit5 = 0.0;
    double hit10 = 0.0;
};

MetricBlock metric_block(const std::vector<RankRecord>& ranks);

struct RelationBlock {
    std::string relation;
    std::size_t n_queries = 0;
    MetricBlock filtered;
    MetricBlock raw;
};

struct MetricsReport {
    std::string config_fingerprint;
    std::vector<std::uint64_t> seeds;
    std::size_t n_queries = 0;
    MetricBlock metrics;       // filtered (the headline mode)
    MetricBlock metrics_raw;
    std::vector<RelationBlock> per_relation;
    std::optional<MetricBlock> stddev;      // across seeds, when aggregated
    std::optional<MetricBlock> stddev_raw;
};

// Mean +- std across per-seed reports (micro metrics and per-relation blocks
// averaged; seeds concatenated).
MetricsReport aggregate_reports(const std::vector<MetricsReport>& reports);

std::string report_to_json(const MetricsReport& report);
void write_report(const std::string& path, const MetricsReport& report);

} // namespace fskg::eval
