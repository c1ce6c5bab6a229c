#include "fskg/kg/sampling.hpp"

namespace fskg::kg {

Task sample_task(const TripleStore& store, RelationId rel, std::size_t k, std::size_t n_query,
                 Rng& rng) {
    const auto& triples = store.triples_of(rel);
    if (n_query < 1) throw ContractError("sample_task: n_query must be >= 1");
    if (triples.size() < k + 1) {
        throw SamplingError("sample_task: relation '" + store.relation_name(rel) + "' has " +
                            std::to_string(triples.size()) + " triples, need >= " +
                            std::to_string(k + 1) + " for K=" + std::to_string(k));
    }
    const std::size_t nq = std::min(n_query, triples.size() - k);
    auto idx = rng.sample_without_replacement(triples.size(), k + nq);
    Task task;
    task.rel = rel;
    for (std::size_t i = 0; i < k; ++i) task.support.push_back(triples[idx[i]]);
    for (std::size_t i = k; i < k + nq; ++i) task.query.push_back(triples[idx[i]]);
    return task;
}

EntityId sample_negative(const TripleStore& store, EntityId h, RelationId r, Rng& rng) {
    const auto& tails = store.true_tails(h, r);
    const std::size_t n = store.n_entities();
    if (tails.size() >= n) {
        throw SamplingError("sample_negative: every entity is a true tail of (" +
                            store.entity_name(h) + ", " + store.relation_name(r) + ")");
    }
    for (;;) {
        const EntityId cand = static_cast<EntityId>(rng.uniform_index(n));
        if (!tails.contains(cand)) return cand;
    }
}

} // namespace fskg::kg
