#include "fskg/objective/objective.hpp"

namespace fskg::objective {

NodeId EntityNodeCache::structural(kg::EntityId e) {
    auto it = structural_.find(e);
    if (it != structural_.end()) return it->second;
    const NodeId n = tape_->param_row(state_->emb_s, static_cast<std::size_t>(e));
    structural_.emplace(e, n);
    return n;
}

NodeId EntityNodeCache::adapted_textual(kg::EntityId e) {
    auto it = adapted_t_.find(e);
    if (it != adapted_t_.end()) return it->second;
    const NodeId n = state_->adapt_textual(*tape_, e);
    adapted_t_.emplace(e, n);
    return n;
}

NodeId EntityNodeCache::adapted_visual(kg::EntityId e) {
    auto it = adapted_v_.find(e);
    if (it != adapted_v_.end()) return it->second;
    const NodeId n = state_->adapt_visual(*tape_, e);
    adapted_v_.emplace(e, n);
    return n;
}

NodeId EntityNodeCache::fused(kg::EntityId e) {
    auto it = fused_.find(e);
    if (it != fused_.end()) return it->second;
    const NodeId s = structural(e);
    const NodeId n = state_->use_adapters
                         ? model::fuse(*tape_, s, adapted_textual(e), adapted_visual(e))
                         : s;
    fused_.emplace(e, n);
    return n;
}

NodeId diversity_loss(GradTape& tape, EntityNodeCache& cache, const std::vector<kg::EntityId>& bag,
                      double gamma) {
    if (bag.empty()) throw ContractError("diversity_loss: empty entity bag");
    std::vector<NodeId> terms;
    terms.reserve(bag.size());
    for (kg::EntityId e : bag) {
        const NodeId s = cache.structural(e);
        const NodeId sim_v = tape.cosine(cache.adapted_visual(e), s);
        const NodeId sim_t = tape.cosine(cache.adapted_textual(e), s);
        terms.push_back(tape.scalar_add(tape.hinge(tape.scalar_add_const(sim_v, -gamma)),
                                        tape.hinge(tape.scalar_add_const(sim_t, -gamma))));
    }
    return tape.scalar_mean(terms);
}

NodeId ranking_loss(GradTape& tape, EntityNodeCache& cache, NodeId r_meta,
                    const std::vector<kg::Triple>& positives,
                    const std::vector<std::vector<kg::EntityId>>& negatives, double epsilon) {
    if (positives.empty()) throw ContractError("ranking_loss: empty triple list");
    if (negatives.size() != positives.size()) {
        throw ContractError("ranking_loss: one negative list per positive required");
    }
    if (epsilon < 0.0) throw ContractError("ranking_loss: epsilon must be >= 0");
    std::vector<NodeId> per_positive;
    per_positive.reserve(positives.size());
    for (std::size_t i = 0; i < positives.size(); ++i) {
        if (negatives[i].empty()) throw ContractError("ranking_loss: empty negative list");
        const NodeId h = cache.fused(positives[i].head);
        const NodeId s_pos = model::score(tape, h, r_meta, cache.fused(positives[i].tail));
        std::vector<NodeId> hinges;
        hinges.reserve(negatives[i].size());
        for (kg::EntityId neg : negatives[i]) {
            const NodeId s_neg = model::score(tape, h, r_meta, cache.fused(neg));
            hinges.push_back(
                tape.hinge(tape.scalar_add_const(tape.scalar_sub(s_pos, s_neg), epsilon)));
        }
        per_positive.push_back(tape.scalar_mean(hinges));
    }
    return tape.scalar_mean(per_positive);
}

std::vector<kg::EntityId> entity_bag(const std::vector<kg::Triple>& triples) {
    std::vector<kg::EntityId> bag;
    bag.reserve(triples.size() * 2);
    for (const kg::Triple& t : triples) {
        bag.push_back(t.head);
        bag.push_back(t.tail);
    }
    return bag;
}

namespace {

std::vector<std::vector<kg::EntityId>> sample_negatives(const kg::TripleStore& store,
                                                        const std::vector<kg::Triple>& positives,
                                                        std::size_t n_neg, Rng& rng) {
    std::vector<std::vector<kg::EntityId>> out;
    out.reserve(positives.size());
    for (const kg::Triple& t : positives) {
        std::vector<kg::EntityId> negs;
        negs.reserve(n_neg);
        for (std::size_t i = 0; i < n_neg; ++i) {
            negs.push_back(kg::sample_negative(store, t.head, t.rel, rng));
        }
        out.push_back(std::move(negs));
    }
    return out;
}

// Shared pipeline: fuse, relation meta from the support pairs, one-step
// refinement against the support loss, then the task ranking loss.
ObjectiveResult task_objective(GradTape& tape, const kg::Task& task, const ModelState& state,
                               const kg::TripleStore& store,
                               const std::vector<kg::Triple>& loss_triples,
                               const std::vector<kg::EntityId>& div_bag, Rng& rng) {
    if (task.support.empty()) throw ContractError("task objective: empty support set");

    EntityNodeCache cache(tape, state);

    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<NodeId> sup_h, sup_t, sup_neg;
    pairs.reserve(task.support.size());
    for (const kg::Triple& t : task.support) {
        pairs.emplace_back(cache.fused(t.head), cache.fused(t.tail));
    }
    const NodeId r_meta = state.relation_meta(tape, pairs);

    // one sampled negative per support triple drives the refinement gradient
    for (const kg::Triple& t : task.support) {
        sup_h.push_back(cache.fused(t.head));
        sup_t.push_back(cache.fused(t.tail));
        sup_neg.push_back(cache.fused(kg::sample_negative(store, t.head, t.rel, rng)));
    }
    const NodeId refined = state.refine_relation_meta(tape, r_meta, sup_h, sup_t, sup_neg);

    const auto negatives = sample_negatives(store, loss_triples, state.hyper.n_neg, rng);
    const NodeId task_loss = ranking_loss(tape, cache, refined, loss_triples, negatives,
                                          state.hyper.epsilon);

    ObjectiveResult res;
    res.breakdown.task_loss = tape.scalar_value(task_loss);
    if (state.use_adapters) {
        const NodeId div = diversity_loss(tape, cache, div_bag, state.hyper.gamma);
        res.breakdown.diversity_loss = tape.scalar_value(div);
        res.total = tape.scalar_add(task_loss, tape.scalar_scale(div, state.hyper.alpha));
    } else {
        res.total = task_loss;
    }
    res.breakdown.total = tape.scalar_value(res.total);
    return res;
}

} // namespace

ObjectiveResult meta_train_objective(GradTape& tape, const kg::Task& task, const ModelState& state,
                                     const kg::TripleStore& store, Rng& rng) {
    if (task.query.empty()) throw ContractError("meta_train_objective: empty query set");
    std::vector<kg::Triple> all = task.support;
    all.insert(all.end(), task.query.begin(), task.query.end());
    return task_objective(tape, task, state, store, task.query, entity_bag(all), rng);
}

ObjectiveResult meta_test_objective(GradTape& tape, const kg::Task& task, const ModelState& state,
                                    const kg::TripleStore& store, Rng& rng) {
    // query tails are unknown at adaptation time: loss and bag use support only
    return task_objective(tape, task, state, store, task.support, entity_bag(task.support), rng);
}

} // namespace fskg::objective
