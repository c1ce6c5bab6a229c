#include <fstream>

#include <nlohmann/json.hpp>

#include "fskg/eval/metrics.hpp"

namespace fskg::eval {

namespace {

nlohmann::json block_json(const MetricBlock& b) {
    return {{"mrr", b.mrr}, {"hit1", b.hit1}, {"hit5", b.hit5}, {"hit10", b.hit10}};
}

} // namespace

std::string report_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["config_fingerprint"] = report.config_fingerprint;
    j["seeds"] = report.seeds;
    j["n_queries"] = report.n_queries;
    j["metrics"] = block_json(report.metrics);
    j["metrics_raw"] = block_json(report.metrics_raw);
    j["per_relation"] = nlohmann::json::array();
    for (const auto& rb : report.per_relation) {
        j["per_relation"].push_back({{"relation", rb.relation},
                                     {"n_queries", rb.n_queries},
                                     {"mrr", rb.filtered.mrr},
                                     {"hit1", rb.filtered.hit1},
                                     {"hit5", rb.filtered.hit5},
                                     {"hit10", rb.filtered.hit10},
                                     {"raw", block_json(rb.raw)}});
    }
    if (report.stddev) j["std"] = block_json(*report.stddev);
    if (report.stddev_raw) j["std_raw"] = block_json(*report.stddev_raw);
    return j.dump(2) + "\n";
}

void write_report(const std::string& path, const MetricsReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report: " + path);
    out << report_to_json(report);
}

} // namespace fskg::eval
