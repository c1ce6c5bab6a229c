#include "fskg/model/model.hpp"

#include <cmath>
#include <cstring>

#include "fskg/num/ops.hpp"

namespace fskg::model {

namespace {

void init_uniform(std::vector<double>& v, double bound, Rng& rng) {
    for (double& x : v) x = rng.uniform(-bound, bound);
}

} // namespace

ModelState::ModelState(const kg::ModalityEmbeddings& emb, Hyper hp, bool adapters, Rng& init_rng)
    : hyper(hp), use_adapters(adapters) {
    n_entities = emb.structural.rows;
    d_s = emb.structural.cols;
    d_t = emb.textual.cols;
    d_v = emb.visual.cols;
    h_meta = 2 * d_s;

    emb_s = params.add("embeddings.S", n_entities, d_s, ParamGroup::Embeddings);
    emb_t = params.add("embeddings.T", n_entities, d_t, ParamGroup::Embeddings);
    emb_v = params.add("embeddings.V", n_entities, d_v, ParamGroup::Embeddings);
    params.values(emb_s) = emb.structural.data;
    params.values(emb_t) = emb.textual.data;
    params.values(emb_v) = emb.visual.data;

    adapter_t.w_down = params.add("adapter.T.w_down", hyper.m, d_t, ParamGroup::Adapter);
    adapter_t.b_down = params.add("adapter.T.b_down", hyper.m, 1, ParamGroup::Adapter);
    adapter_t.w_up = params.add("adapter.T.w_up", d_s, hyper.m, ParamGroup::Adapter);
    adapter_t.b_up = params.add("adapter.T.b_up", d_s, 1, ParamGroup::Adapter);
    adapter_v.w_down = params.add("adapter.V.w_down", hyper.m, d_v, ParamGroup::Adapter);
    adapter_v.b_down = params.add("adapter.V.b_down", hyper.m, 1, ParamGroup::Adapter);
    adapter_v.w_up = params.add("adapter.V.w_up", d_s, hyper.m, ParamGroup::Adapter);
    adapter_v.b_up = params.add("adapter.V.b_up", d_s, 1, ParamGroup::Adapter);

    ml_w1 = params.add("meta_learner.w1", h_meta, 2 * d_s, ParamGroup::Meta);
    ml_b1 = params.add("meta_learner.b1", h_meta, 1, ParamGroup::Meta);
    ml_w2 = params.add("meta_learner.w2", d_s, h_meta, ParamGroup::Meta);
    ml_b2 = params.add("meta_learner.b2", d_s, 1, ParamGroup::Meta);
    init_uniform(params.values(ml_w1), 1.0 / std::sqrt(static_cast<double>(2 * d_s)), init_rng);
    init_uniform(params.values(ml_w2), 1.0 / std::sqrt(static_cast<double>(h_meta)), init_rng);

    reinit_adapters(init_rng);
}

void ModelState::reinit_adapters(Rng& rng) {
    // near-zero up-projection: initial fused embeddings start at the
    // structural embeddings, i.e. at the structural-only baseline
    init_uniform(params.values(adapter_t.w_down), 1.0 / std::sqrt(static_cast<double>(d_t)), rng);
    std::fill(params.values(adapter_t.b_down).begin(), params.values(adapter_t.b_down).end(), 0.0);
    init_uniform(params.values(adapter_t.w_up), 1e-3, rng);
    std::fill(params.values(adapter_t.b_up).begin(), params.values(adapter_t.b_up).end(), 0.0);
    init_uniform(params.values(adapter_v.w_down), 1.0 / std::sqrt(static_cast<double>(d_v)), rng);
    std::fill(params.values(adapter_v.b_down).begin(), params.values(adapter_v.b_down).end(), 0.0);
    init_uniform(params.values(adapter_v.w_up), 1e-3, rng);
    std::fill(params.values(adapter_v.b_up).begin(), params.values(adapter_v.b_up).end(), 0.0);
}

void ModelState::set_embeddings(const kg::ModalityEmbeddings& emb) {
    if (emb.structural.rows != n_entities || emb.structural.cols != d_s ||
        emb.textual.cols != d_t || emb.visual.cols != d_v) {
        throw ShapeError("set_embeddings: table shapes do not match model state");
    }
    params.values(emb_s) = emb.structural.data;
    params.values(emb_t) = emb.textual.data;
    params.values(emb_v) = emb.visual.data;
}

std::uint64_t ModelState::hash_group(ParamGroup g) const {
    std::uint64_t h = 14695981039346656037ull;
    for (ParamId id : params.ids_in_group(g)) {
        const auto& v = params.values(id);
        const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
        for (std::size_t i = 0; i < v.size() * sizeof(double); ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    }
    return h;
}

NodeId adapt_modality(GradTape& tape, NodeId e, const AdapterIds& ids) {
    const NodeId hidden = tape.relu(tape.linear(e, ids.w_down, ids.b_down));
    return tape.linear(hidden, ids.w_up, ids.b_up);
}

NodeId fuse(GradTape& tape, NodeId e_s, NodeId adapted_t, NodeId adapted_v) {
    return tape.add({e_s, adapted_t, adapted_v});
}

NodeId ModelState::adapt_textual(GradTape& tape, kg::EntityId e) const {
    return adapt_modality(tape, tape.param_row(emb_t, static_cast<std::size_t>(e)), adapter_t);
}

NodeId ModelState::adapt_visual(GradTape& tape, kg::EntityId e) const {
    return adapt_modality(tape, tape.param_row(emb_v, static_cast<std::size_t>(e)), adapter_v);
}

NodeId ModelState::fused(GradTape& tape, kg::EntityId e) const {
    const NodeId s = tape.param_row(emb_s, static_cast<std::size_t>(e));
    if (!use_adapters) return s;
    return fuse(tape, s, adapt_textual(tape, e), adapt_visual(tape, e));
}

NodeId ModelState::relation_meta(GradTape& tape,
                                 const std::vector<std::pair<NodeId, NodeId>>& pairs) const {
    if (pairs.empty()) throw ContractError("relation_meta: empty support set");
    std::vector<NodeId> per_pair;
    per_pair.reserve(pairs.size());
    for (const auto& [h, t] : pairs) {
        const NodeId x = tape.concat(h, t);
        const NodeId hid = tape.leaky_relu(tape.linear(x, ml_w1, ml_b1), 0.01);
        per_pair.push_back(tape.linear(hid, ml_w2, ml_b2));
    }
    return tape.mean(per_pair);
}

NodeId score(GradTape& tape, NodeId e_h, NodeId r_meta, NodeId e_t) {
    return tape.norm(tape.sub(tape.add({e_h, r_meta}), e_t));
}

NodeId ModelState::refine_relation_meta(GradTape& tape, NodeId r_meta,
                                        const std::vector<NodeId>& support_heads,
                                        const std::vector<NodeId>& support_tails,
                                        const std::vector<NodeId>& support_neg_tails) const {
    if (hyper.beta <= 0.0) throw ContractError("refine_relation_meta: beta must be > 0");
    if (support_heads.empty() || support_heads.size() != support_tails.size() ||
        support_heads.size() != support_neg_tails.size()) {
        throw ContractError("refine_relation_meta: support triples and negatives must pair up");
    }

    NodeId r = r_meta;
    for (std::size_t step = 0; step < hyper.refine_steps; ++step) {
        // closed-form gradient of the mean margin loss w.r.t. r:
        // per active pair, d_pos/||d_pos|| - d_neg/||d_neg||
        std::vector<NodeId> terms;
        for (std::size_t i = 0; i < support_heads.size(); ++i) {
            const NodeId translated = tape.add({support_heads[i], r});
            const NodeId d_pos = tape.sub(translated, support_tails[i]);
            const NodeId d_neg = tape.sub(translated, support_neg_tails[i]);
            const NodeId s_pos = tape.norm(d_pos);
            const NodeId s_neg = tape.norm(d_neg);
            const double margin =
                tape.scalar_value(s_pos) - tape.scalar_value(s_neg) + hyper.epsilon;
            if (margin <= 0.0) continue;  // inactive hinge contributes zero gradient
            NodeId term;
            const bool pos_zero = tape.scalar_value(s_pos) < 1e-12;
            const bool neg_zero = tape.scalar_value(s_neg) < 1e-12;
            if (pos_zero && neg_zero) continue;
            if (pos_zero) {
                term = tape.scale(tape.div_scalar(d_neg, s_neg), -1.0);
            } else if (neg_zero) {
                term = tape.div_scalar(d_pos, s_pos);
            } else {
                term = tape.sub(tape.div_scalar(d_pos, s_pos), tape.div_scalar(d_neg, s_neg));
            }
            terms.push_back(term);
        }
        if (terms.empty()) continue;  // zero gradient, r unchanged
        NodeId grad = tape.scale(tape.add(terms),
                                 1.0 / static_cast<double>(support_heads.size()));
        if (hyper.first_order) grad = tape.stop_gradient(grad);
        r = tape.sub(r, tape.scale(grad, hyper.beta));
    }
    return r;
}

num::Vector ModelState::adapted_value(kg::Modality m, kg::EntityId e) const {
    const bool textual = m == kg::Modality::Textual;
    const AdapterIds& ids = textual ? adapter_t : adapter_v;
    const ParamId table = textual ? emb_t : emb_v;
    const std::size_t d_in = textual ? d_t : d_v;

    const auto& emb = params.values(table);
    const auto& wd = params.values(ids.w_down);
    const auto& bd = params.values(ids.b_down);
    const auto& wu = params.values(ids.w_up);
    const auto& bu = params.values(ids.b_up);
    const double* row = emb.data() + static_cast<std::size_t>(e) * d_in;

    num::Vector hidden(hyper.m);
    for (std::size_t r = 0; r < hyper.m; ++r) {
        double s = bd[r];
        const double* wr = wd.data() + r * d_in;
        for (std::size_t c = 0; c < d_in; ++c) s += wr[c] * row[c];
        hidden[r] = s > 0.0 ? s : 0.0;
    }
    num::Vector out(d_s);
    for (std::size_t r = 0; r < d_s; ++r) {
        double s = bu[r];
        const double* wr = wu.data() + r * hyper.m;
        for (std::size_t c = 0; c < hyper.m; ++c) s += wr[c] * hidden[c];
        out[r] = s;
    }
    return out;
}

num::Vector ModelState::fused_value(kg::EntityId e) const {
    const auto& emb = params.values(emb_s);
    num::Vector out(emb.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(e) * d_s),
                    emb.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(e) + 1) * d_s));
    if (!use_adapters) return out;
    const num::Vector at = adapted_value(kg::Modality::Textual, e);
    const num::Vector av = adapted_value(kg::Modality::Visual, e);
    // same association order as the tape's add({s, at, av}), so the two
    // forward paths agree bitwise
    for (std::size_t i = 0; i < d_s; ++i) out[i] = (out[i] + at[i]) + av[i];
    return out;
}

} // namespace fskg::model
