#pragma once

#include <unordered_map>

#include "fskg/kg/sampling.hpp"
#include "fskg/model/model.hpp"

namespace fskg::objective {

using model::GradTape;
using model::ModelState;
using model::NodeId;

struct LossBreakdown {
    double task_loss = 0.0;
    double diversity_loss = 0.0;
    double total = 0.0;  // task_loss + alpha * diversity_loss
};

struct ObjectiveResult {
    LossBreakdown breakdown;
    NodeId total;  // scalar node on the caller's tape
};

// Caches one fused / adapted node per entity so each entity's forward pass
// is recorded once per tape.
class EntityNodeCache {
public:
    EntityNodeCache(GradTape& tape, const ModelState& state) : tape_(&tape), state_(&state) {}

    NodeId fused(kg::EntityId e);
    NodeId structural(kg::EntityId e);
    NodeId adapted_textual(kg::EntityId e);
    NodeId adapted_visual(kg::EntityId e);

private:
    GradTape* tape_;
    const ModelState* state_;
    std::unordered_map<kg::EntityId, NodeId> fused_, structural_, adapted_t_, adapted_v_;
};

// Mean over the entity bag (with multiplicity) of
// [cos(e'_V, e_S) - gamma]_+ + [cos(e'_T, e_S) - gamma]_+.
NodeId diversity_loss(GradTape& tape, EntityNodeCache& cache, const std::vector<kg::EntityId>& bag,
                      double gamma);

// Mean over positives of the per-positive mean over its negatives of
// [s(h,r,t) - s(h,r,t') + epsilon]_+ with fused embeddings.
NodeId ranking_loss(GradTape& tape, EntityNodeCache& cache, NodeId r_meta,
                    const std::vector<kg::Triple>& positives,
                    const std::vector<std::vector<kg::EntityId>>& negatives, double epsilon);

// Eq-style meta-training objective for one task: ranking loss over the query
// set with fresh negatives, plus alpha times the diversity loss over the
// entities of support and query.
ObjectiveResult meta_train_objective(GradTape& tape, const kg::Task& task, const ModelState& state,
                                     const kg::TripleStore& store, Rng& rng);

// Meta-testing objective: ranking loss over the support set, diversity over
// the support entities. Only the adapters may be stepped from this loss;
// the optimizer registry enforces that.
ObjectiveResult meta_test_objective(GradTape& tape, const kg::Task& task, const ModelState& state,
                                    const kg::TripleStore& store, Rng& rng);

// Entities of a triple list, with multiplicity (the paper's V_r bag).
std::vector<kg::EntityId> entity_bag(const std::vector<kg::Triple>& triples);

} // namespace fskg::objective
