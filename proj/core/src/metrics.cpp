#include "fskg/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fskg::eval {

RankRecord rank_true_tail(const std::vector<double>& scores, const kg::Triple& query,
                          const std::unordered_set<kg::EntityId>& known_tails, RankMode mode) {
    const auto true_tail = static_cast<std::size_t>(query.tail);
    if (true_tail >= scores.size()) {
        throw ContractError("rank_true_tail: true tail not in the candidate scores");
    }
    const double true_score = scores[true_tail];
    std::size_t rank = 1;
    std::size_t n_candidates = 1;
    for (std::size_t e = 0; e < scores.size(); ++e) {
        if (e == true_tail) continue;
        if (mode == RankMode::Filtered && known_tails.contains(static_cast<kg::EntityId>(e))) {
            continue;
        }
        ++n_candidates;
        if (scores[e] < true_score || (scores[e] == true_score && e < true_tail)) ++rank;
    }
    return {query, rank, n_candidates};
}

double mrr(const std::vector<RankRecord>& ranks) {
    if (ranks.empty()) throw ContractError("mrr: empty rank list");
    double s = 0.0;
    for (const RankRecord& r : ranks) s += 1.0 / static_cast<double>(r.rank);
    return s / static_cast<double>(ranks.size());
}

double hits_at(const std::vector<RankRecord>& ranks, std::size_t n) {
    if (ranks.empty()) throw ContractError("hits_at: empty rank list");
    if (n < 1) throw ContractError("hits_at: N must be >= 1");
    std::size_t hits = 0;
    for (const RankRecord& r : ranks) {
        if (r.rank <= n) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

MetricBlock metric_block(const std::vector<RankRecord>& ranks) {
    return {mrr(ranks), hits_at(ranks, 1), hits_at(ranks, 5), hits_at(ranks, 10)};
}

MetricsReport aggregate_reports(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw ContractError("aggregate_reports: no reports");
    if (reports.size() == 1) return reports.front();

    const double n = static_cast<double>(reports.size());
    auto mean_of = [&](auto get) {
        MetricBlock m;
        for (const auto& r : reports) {
            const MetricBlock b = get(r);
            m.mrr += b.mrr / n;
            m.hit1 += b.hit1 / n;
            m.hit5 += b.hit5 / n;
            m.hit10 += b.hit10 / n;
        }
        return m;
    };
    auto std_of = [&](auto get, const MetricBlock& mean) {
        MetricBlock s;
        for (const auto& r : reports) {
            const MetricBlock b = get(r);
            s.mrr += (b.mrr - mean.mrr) * (b.mrr - mean.mrr) / n;
            s.hit1 += (b.hit1 - mean.hit1) * (b.hit1 - mean.hit1) / n;
            s.hit5 += (b.hit5 - mean.hit5) * (b.hit5 - mean.hit5) / n;
            s.hit10 += (b.hit10 - mean.hit10) * (b.hit10 - mean.hit10) / n;
        }
        s.mrr = std::sqrt(s.mrr);
        s.hit1 = std::sqrt(s.hit1);
        s.hit5 = std::sqrt(s.hit5);
        s.hit10 = std::sqrt(s.hit10);
        return s;
    };

    MetricsReport out;
    out.config_fingerprint = reports.front().config_fingerprint;
    for (const auto& r : reports) {
        out.seeds.insert(out.seeds.end(), r.seeds.begin(), r.seeds.end());
        out.n_queries += r.n_queries;
    }
    out.metrics = mean_of([](const MetricsReport& r) { return r.metrics; });
    out.metrics_raw = mean_of([](const MetricsReport& r) { return r.metrics_raw; });
    out.stddev = std_of([](const MetricsReport& r) { return r.metrics; }, out.metrics);
    out.stddev_raw = std_of([](const MetricsReport& r) { return r.metrics_raw; }, out.metrics_raw);

    // per-relation blocks averaged by relation name over the seeds where it appears
    for (const auto& r : reports) {
        for (const auto& rb : r.per_relation) {
            auto it = std::find_if(out.per_relation.begin(), out.per_relation.end(),
                                   [&](const RelationBlock& b) { return b.relation == rb.relation; });
            if (it == out.per_relation.end()) {
                out.per_relation.push_back(rb);
            } else {
                it->n_queries += rb.n_queries;
                it->filtered.mrr += rb.filtered.mrr;
                it->filtered.hit1 += rb.filtered.hit1;
                it->filtered.hit5 += rb.filtered.hit5;
                it->filtered.hit10 += rb.filtered.hit10;
                it->raw.mrr += rb.raw.mrr;
                it->raw.hit1 += rb.raw.hit1;
                it->raw.hit5 += rb.raw.hit5;
                it->raw.hit10 += rb.raw.hit10;
            }
        }
    }
    for (auto& rb : out.per_relation) {
        rb.filtered.mrr /= n;
        rb.filtered.hit1 /= n;
        rb.filtered.hit5 /= n;
        rb.filtered.hit10 /= n;
        rb.raw.mrr /= n;
        rb.raw.hit1 /= n;
        rb.raw.hit5 /= n;
        rb.raw.hit10 /= n;
    }
    return out;
}

} // namespace fskg::eval
