#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fskg/eval/metrics.hpp"
#include "fskg/rng.hpp"

using namespace fskg;
using namespace fskg::eval;

namespace {

// Brute-force oracle: sort candidates by (score, id), find the true tail.
std::size_t oracle_rank(const std::vector<double>& scores, kg::EntityId true_tail,
                        const std::unordered_set<kg::EntityId>& known_tails, RankMode mode) {
    std::vector<kg::EntityId> pool;
    for (std::size_t e = 0; e < scores.size(); ++e) {
        const auto id = static_cast<kg::EntityId>(e);
        if (mode == RankMode::Filtered && id != true_tail && known_tails.contains(id)) continue;
        pool.push_back(id);
    }
    std::sort(pool.begin(), pool.end(), [&](kg::EntityId a, kg::EntityId b) {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)]) {
            return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
        }
        return a < b;
    });
    const auto it = std::find(pool.begin(), pool.end(), true_tail);
    return static_cast<std::size_t>(it - pool.begin()) + 1;
}

} // namespace

TEST_CASE("rank_true_tail on hand examples") {
    // scores (lower better): entity 2 is best, entity 0 second, entity 1 last
    const std::vector<double> scores = {0.5, 0.9, 0.1};
    const kg::Triple q{3, 0, 0};

    SUBCASE("raw") {
        const RankRecord rec = rank_true_tail(scores, q, {}, RankMode::Raw);
        CHECK(rec.rank == 2);
        CHECK(rec.n_candidates == 3);
    }
    SUBCASE("filtered removes the other true tail") {
        const RankRecord rec = rank_true_tail(scores, q, {0, 2}, RankMode::Filtered);
        CHECK(rec.rank == 1);
        CHECK(rec.n_candidates == 2);
    }
    SUBCASE("ties break by ascending id") {
        const std::vector<double> tied = {0.5, 0.5, 0.5};
        CHECK(rank_true_tail(tied, {9, 0, 0}, {}, RankMode::Raw).rank == 1);
        CHECK(rank_true_tail(tied, {9, 0, 1}, {}, RankMode::Raw).rank == 2);
        CHECK(rank_true_tail(tied, {9, 0, 2}, {}, RankMode::Raw).rank == 3);
    }
    SUBCASE("true tail out of range throws") {
        CHECK_THROWS_AS(rank_true_tail(scores, {0, 0, 5}, {}, RankMode::Raw), ContractError);
    }
}

TEST_CASE("rank_true_tail agrees with the brute-force oracle") {
    Rng rng(123);
    int cases = 0;
    for (int iter = 0; iter < 400; ++iter) {
        const std::size_t n = 2 + rng.uniform_index(5);  // 2..6 entities
        std::vector<double> scores(n);
        for (double& s : scores) {
            // coarse grid to force frequent ties
            s = static_cast<double>(rng.uniform_index(4)) * 0.25;
        }
        const auto true_tail = static_cast<kg::EntityId>(rng.uniform_index(n));
        std::unordered_set<kg::EntityId> known = {true_tail};
        for (std::size_t e = 0; e < n; ++e) {
            if (rng.uniform_index(3) == 0) known.insert(static_cast<kg::EntityId>(e));
        }
        const kg::Triple q{0, 0, true_tail};
        for (RankMode mode : {RankMode::Raw, RankMode::Filtered}) {
            const RankRecord rec = rank_true_tail(scores, q, known, mode);
            CHECK(rec.rank == oracle_rank(scores, true_tail, known, mode));
            ++cases;
        }
    }
    CHECK(cases == 800);
}

TEST_CASE("mrr and hits on frozen examples") {
    std::vector<RankRecord> ranks;
    for (std::size_t r : {1, 2, 4}) ranks.push_back({{0, 0, 0}, r, 10});

    CHECK(mrr(ranks) == doctest::Approx((1.0 + 0.5 + 0.25) / 3.0).epsilon(1e-15));
    CHECK(mrr(ranks) == doctest::Approx(0.5833333333333334).epsilon(1e-12));
    CHECK(hits_at(ranks, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(hits_at(ranks, 2) == doctest::Approx(2.0 / 3.0));
    CHECK(hits_at(ranks, 4) == doctest::Approx(1.0));
    CHECK(hits_at(ranks, 10) == doctest::Approx(1.0));

    CHECK_THROWS_AS(mrr({}), ContractError);
    CHECK_THROWS_AS(hits_at({}, 1), ContractError);
}

TEST_CASE("metric_block aggregates the four headline metrics") {
    std::vector<RankRecord> ranks;
    for (std::size_t r : {1, 3, 6, 11}) ranks.push_back({{0, 0, 0}, r, 20});
    const MetricBlock b = metric_block(ranks);
    CHECK(b.mrr == doctest::Approx((1.0 + 1.0 / 3 + 1.0 / 6 + 1.0 / 11) / 4.0));
    CHECK(b.hit1 == doctest::Approx(0.25));
    CHECK(b.hit5 == doctest::Approx(0.5));
    CHECK(b.hit10 == doctest::Approx(0.75));
}

TEST_CASE("aggregate_reports takes mean and population std across seeds") {
    MetricsReport a;
    a.seeds = {1};
    a.n_queries = 10;
    a.metrics = {0.6, 0.4, 0.7, 0.9};
    a.metrics_raw = {0.5, 0.3, 0.6, 0.8};
    a.per_relation.push_back({"r0", 5, {0.6, 0.4, 0.7, 0.9}, {0.5, 0.3, 0.6, 0.8}});

    MetricsReport b = a;
    b.seeds = {2};
    b.metrics = {0.8, 0.6, 0.9, 1.0};

    const MetricsReport agg = aggregate_reports({a, b});
    CHECK(agg.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(agg.n_queries == 20);
    CHECK(agg.metrics.mrr == doctest::Approx(0.7));
    CHECK(agg.stddev.has_value());
    CHECK(agg.stddev->mrr == doctest::Approx(0.1));

    // single-seed aggregation carries no stddev
    const MetricsReport single = aggregate_reports({a});
    CHECK_FALSE(single.stddev.has_value());
    CHECK(single.metrics.mrr == doctest::Approx(0.6));

    CHECK_THROWS_AS(aggregate_reports({}), ContractError);
}

TEST_CASE("report json is stable and parseable") {
    MetricsReport r;
    r.config_fingerprint = "abc123";
    r.seeds = {1, 2};
    r.n_queries = 4;
    r.metrics = {0.5, 0.25, 0.5, 0.75};
    r.metrics_raw = {0.4, 0.2, 0.4, 0.7};
    r.per_relation.push_back({"rel_x", 4, r.metrics, r.metrics_raw});

    const std::string j1 = report_to_json(r);
    const std::string j2 = report_to_json(r);
    CHECK(j1 == j2);
    CHECK(j1.find("\"config_fingerprint\": \"abc123\"") != std::string::npos);
    CHECK(j1.find("rel_x") != std::string::npos);
    CHECK(j1.back() == '\n');

    namespace fs = std::filesystem;
    const fs::path p = fs::temp_directory_path() / "fskg_test_report.json";
    write_report(p.string(), r);
    std::ifstream in(p);
    std::string on_disk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(on_disk == j1);
    fs::remove(p);
}
