#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "fskg/kg/embeddings.hpp"
#include "fskg/kg/sampling.hpp"
#include "fskg/kg/synthetic.hpp"
#include "fskg/kg/triple_store.hpp"
#include "fskg/num/ops.hpp"

using namespace fskg;
using namespace fskg::kg;

namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("fskg_test_" + name);
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

} // namespace

TEST_CASE("triple store loads TSV, skips comments, dedups") {
    const fs::path p = temp_file("triples.tsv");
    write_file(p,
               "# a comment\n"
               "a\tr1\tb\n"
               "a\tr1\tc\n"
               "a\tr1\tb\n"
               "\n"
               "b\tr2\tc\n");
    const TripleStore store = TripleStore::load(p.string());
    CHECK(store.n_entities() == 3);
    CHECK(store.n_relations() == 2);
    CHECK(store.triples().size() == 3);

    // first-appearance id order
    CHECK(store.entity_name(0) == "a");
    CHECK(store.entity_name(1) == "b");
    CHECK(store.relation_name(0) == "r1");

    const auto& tails = store.true_tails(0, 0);
    CHECK(tails.size() == 2);
    CHECK(tails.contains(1));
    CHECK(tails.contains(2));
    CHECK(store.true_tails(1, 0).empty());
    fs::remove(p);
}

TEST_CASE("triple store load errors carry line numbers") {
    const fs::path p = temp_file("bad_triples.tsv");
    write_file(p, "a\tr1\tb\nmalformed line\n");
    CHECK_THROWS_WITH_AS(TripleStore::load(p.string()), doctest::Contains(":2:"), ParseError);
    CHECK_THROWS_AS(TripleStore::load("/nonexistent/file.tsv"), IoError);
    fs::remove(p);
}

TEST_CASE("prune_rare_relations keeps entities, re-interns relations") {
    TripleStore store;
    const EntityId a = store.intern_entity("a");
    const EntityId b = store.intern_entity("b");
    const EntityId c = store.intern_entity("c");
    const RelationId rare = store.intern_relation("rare");
    const RelationId common = store.intern_relation("common");
    store.add_triple(a, rare, b);
    store.add_triple(a, common, b);
    store.add_triple(a, common, c);
    store.add_triple(b, common, c);

    const TripleStore pruned = store.prune_rare_relations(2);
    CHECK(pruned.n_entities() == 3);
    CHECK(pruned.entity_name(a) == "a");
    CHECK(pruned.n_relations() == 1);
    CHECK(pruned.relation_name(0) == "common");
    CHECK(pruned.triples().size() == 3);
    CHECK(pruned.triples_of(0).size() == 3);
}

TEST_CASE("splits round-trip through files") {
    TripleStore store;
    for (int i = 0; i < 4; ++i) store.intern_relation("r" + std::to_string(i));
    RelationSplits splits;
    splits.train = {0, 2};
    splits.valid = {1};
    splits.test = {3};

    const fs::path p = temp_file("splits.tsv");
    save_splits(p.string(), store, splits);
    const RelationSplits loaded = load_splits(p.string(), store);
    CHECK(loaded.train == splits.train);
    CHECK(loaded.valid == splits.valid);
    CHECK(loaded.test == splits.test);
    fs::remove(p);
}

TEST_CASE("embeddings load zero-fills missing entities and counts them") {
    TripleStore store;
    store.intern_entity("a");
    store.intern_entity("b");
    store.intern_entity("c");

    const fs::path p = temp_file("emb.tsv");
    write_file(p,
               "a\t1.0 2.0\n"
               "c\t-1.5 0.25\n"
               "ghost\t9.0 9.0\n");
    const LoadedTable loaded = load_embeddings(p.string(), store);
    CHECK(loaded.n_missing == 1);
    CHECK(loaded.table.rows == 3);
    CHECK(loaded.table.cols == 2);
    CHECK(loaded.table.row(0) == num::Vector{1.0, 2.0});
    CHECK(loaded.table.row(1) == num::Vector{0.0, 0.0});
    CHECK(loaded.table.row(2) == num::Vector{-1.5, 0.25});
    fs::remove(p);
}

TEST_CASE("embeddings save/load round-trips exactly") {
    TripleStore store;
    store.intern_entity("x");
    store.intern_entity("y");
    num::Matrix table(2, 3);
    table.set_row(0, {0.1, -2.25, 1e-17});
    table.set_row(1, {3.5, 0.0, -7.125});

    const fs::path p = temp_file("emb_rt.tsv");
    save_embeddings(p.string(), store, table);
    const LoadedTable loaded = load_embeddings(p.string(), store);
    CHECK(loaded.n_missing == 0);
    CHECK(loaded.table.data == table.data);
    fs::remove(p);
}

TEST_CASE("embeddings width mismatch throws") {
    TripleStore store;
    store.intern_entity("a");
    store.intern_entity("b");
    const fs::path p = temp_file("emb_bad.tsv");
    write_file(p, "a\t1.0 2.0\nb\t1.0\n");
    CHECK_THROWS_AS(load_embeddings(p.string(), store), ParseError);
    fs::remove(p);
}

TEST_CASE("mask_modality zeroes exactly floor(fraction*n) rows") {
    ModalityEmbeddings emb;
    emb.structural = num::Matrix(10, 2);
    emb.textual = num::Matrix(10, 2);
    emb.visual = num::Matrix(10, 2);
    for (std::size_t r = 0; r < 10; ++r) {
        emb.textual.set_row(r, {1.0, 1.0});
        emb.visual.set_row(r, {1.0, 1.0});
    }

    Rng rng(1);
    const ModalityEmbeddings masked = mask_modality(emb, Modality::Textual, 0.37, rng);
    std::size_t zeroed = 0;
    for (std::size_t r = 0; r < 10; ++r) {
        if (masked.textual.row(r) == num::Vector{0.0, 0.0}) ++zeroed;
    }
    CHECK(zeroed == 3);  // floor(0.37 * 10)
    // other modalities untouched
    CHECK(masked.visual.data == emb.visual.data);
    CHECK(masked.structural.data == emb.structural.data);

    Rng rng2(1);
    const ModalityEmbeddings all = mask_modality(emb, Modality::Visual, 1.0, rng2);
    for (std::size_t r = 0; r < 10; ++r) CHECK(all.visual.row(r) == num::Vector{0.0, 0.0});
}

TEST_CASE("sample_task draws disjoint support and query, capped query") {
    TripleStore store;
    for (int i = 0; i < 12; ++i) store.intern_entity("e" + std::to_string(i));
    const RelationId r = store.intern_relation("r");
    for (int i = 0; i < 10; ++i) store.add_triple(i, r, i + 1);

    Rng rng(9);
    const Task task = sample_task(store, r, 5, 100, rng);
    CHECK(task.support.size() == 5);
    CHECK(task.query.size() == 5);  // capped at the remaining triples
    for (const Triple& s : task.support) {
        for (const Triple& q : task.query) CHECK_FALSE(s == q);
    }

    // deterministic under the same rng state
    Rng rng2(9);
    const Task again = sample_task(store, r, 5, 100, rng2);
    CHECK(again.support == task.support);
    CHECK(again.query == task.query);

    // K+1 triples required
    CHECK_THROWS_AS(sample_task(store, r, 10, 1, rng), SamplingError);
}

TEST_CASE("sample_negative avoids true tails and is near-uniform") {
    TripleStore store;
    for (int i = 0; i < 20; ++i) store.intern_entity("e" + std::to_string(i));
    const RelationId r = store.intern_relation("r");
    store.add_triple(0, r, 1);
    store.add_triple(0, r, 2);

    Rng rng(17);
    std::map<EntityId, int> counts;
    const int n = 18000;
    for (int i = 0; i < n; ++i) {
        const EntityId t = sample_negative(store, 0, r, rng);
        CHECK(t != 1);
        CHECK(t != 2);
        ++counts[t];
    }
    // 18 valid candidates, expectation 1000 each; binomial sd ~ sqrt(n p (1-p)) ~ 30.7
    const double expect = static_cast<double>(n) / 18.0;
    const double sd = std::sqrt(n * (1.0 / 18.0) * (17.0 / 18.0));
    CHECK(counts.size() == 18);
    for (const auto& [tail, count] : counts) {
        CHECK(std::abs(count - expect) < 5.0 * sd);
    }
}

TEST_CASE("synthetic generator obeys its configuration") {
    SyntheticConfig cfg;
    cfg.n_entities = 50;
    cfg.n_relations = 10;
    cfg.triples_per_relation = 15;
    const SyntheticData data = generate_synthetic(cfg);

    CHECK(data.store.n_entities() == 50);
    CHECK(data.store.n_relations() == 10);
    for (RelationId r = 0; r < 10; ++r) {
        CHECK(data.store.triples_of(r).size() == 15);
    }
    CHECK(data.embeddings.structural.rows == 50);
    CHECK(data.embeddings.structural.cols == cfg.d_s);
    CHECK(data.embeddings.textual.cols == cfg.d_t);
    CHECK(data.embeddings.visual.cols == cfg.d_v);
    CHECK(data.splits.train.size() == 6);
    CHECK(data.splits.valid.size() == 2);
    CHECK(data.splits.test.size() == 2);
    CHECK(data.truth.latents.rows == 50);
    CHECK(data.truth.offsets.rows == 10);

    // deterministic in the seed
    const SyntheticData again = generate_synthetic(cfg);
    CHECK(again.store.triples() == data.store.triples());
    CHECK(again.embeddings.structural.data == data.embeddings.structural.data);

    cfg.seed = 2;
    const SyntheticData other = generate_synthetic(cfg);
    CHECK(other.embeddings.structural.data != data.embeddings.structural.data);
}

TEST_CASE("synthetic tails are nearest neighbours of head + offset") {
    SyntheticConfig cfg;
    cfg.n_entities = 40;
    cfg.n_relations = 5;
    cfg.triples_per_relation = 10;
    const SyntheticData data = generate_synthetic(cfg);

    std::size_t correct = 0, total = 0;
    for (const Triple& t : data.store.triples()) {
        num::Vector target = data.truth.latents.row(static_cast<std::size_t>(t.head));
        const num::Vector off = data.truth.offsets.row(static_cast<std::size_t>(t.rel));
        for (std::size_t i = 0; i < target.size(); ++i) target[i] += off[i];

        double best = 1e300;
        EntityId best_e = -1;
        for (std::size_t e = 0; e < data.store.n_entities(); ++e) {
            const double d = num::l2_distance(target, data.truth.latents.row(e));
            if (d < best) {
                best = d;
                best_e = static_cast<EntityId>(e);
            }
        }
        ++total;
        if (best_e == t.tail) ++correct;
    }
    // dedup can drop the argmin for repeated (h, r); everything else matches
    CHECK(correct == total);
}

TEST_CASE("synthetic config validation") {
    SyntheticConfig cfg;
    cfg.n_entities = 0;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
    cfg = {};
    cfg.complementarity = 1.5;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
    cfg = {};
    cfg.noise_scale = -0.1;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
    cfg = {};
    cfg.triples_per_relation = cfg.n_entities + 1;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
}
