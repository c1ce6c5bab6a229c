#pragma once

#include "fskg/kg/triple_store.hpp"
#include "fskg/rng.hpp"

namespace fskg::kg {

// One relation's episode: K support triples plus a query set, disjoint.
struct Task {
    RelationId rel;
    std::vector<Triple> support;
    std::vector<Triple> query;
};

// Draws K support and up to n_query query triples of `rel` without
// replacement. Deterministic under the rng state.
Task sample_task(const TripleStore& store, RelationId rel, std::size_t k, std::size_t n_query,
                 Rng& rng);

// Uniform over entities that are not true tails of (h, r).
EntityId sample_negative(const TripleStore& store, EntityId h, RelationId r, Rng& rng);

} // namespace fskg::kg
