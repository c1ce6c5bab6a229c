#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fskg/kg/embeddings.hpp"
#include "fskg/num/adam.hpp"
#include "fskg/num/tape.hpp"
#include "fskg/rng.hpp"

namespace fskg::model {

using num::GradTape;
using num::NodeId;
using num::ParamGroup;
using num::ParamId;

// Bottleneck adapter: W_up * relu(W_down * e + b_down) + b_up.
struct AdapterIds {
    ParamId w_down;
    ParamId b_down;
    ParamId w_up;
    ParamId b_up;
};

inline std::size_t count_adapter_params(std::size_t d_in, std::size_t m, std::size_t d_out) {
    return d_in * m + m + m * d_out + d_out;
}

struct Hyper {
    double alpha = 1.0;       // diversity coefficient
    double gamma = 0.0;       // diversity margin
    double epsilon = 1.0;     // ranking margin
    double beta = 5.0;        // relation-meta refinement step size
    std::size_t m = 50;       // adapter bottleneck width
    double lr_main = 1e-3;
    double lr_adapter = 1e-4;
    std::size_t refine_steps = 1;
    bool first_order = true;  // stop-gradient through the refinement gradient
    std::size_t n_neg = 3;    // negatives per positive
};

// All learnable state: the modality tables M, the two adapters Theta_A and
// the relation-meta learner prior Theta, plus hyperparameters.
class ModelState {
public:
    ModelState(const kg::ModalityEmbeddings& emb, Hyper hyper, bool use_adapters, Rng& init_rng);

    num::ParamStore params;
    ParamId emb_s, emb_t, emb_v;
    AdapterIds adapter_t, adapter_v;
    ParamId ml_w1, ml_b1, ml_w2, ml_b2;

    std::size_t n_entities = 0;
    std::size_t d_s = 0, d_t = 0, d_v = 0;
    std::size_t h_meta = 0;
    Hyper hyper;
    bool use_adapters = true;

    void reinit_adapters(Rng& rng);

    // Swaps in a (possibly masked) copy of the modality tables; shapes must match.
    void set_embeddings(const kg::ModalityEmbeddings& emb);

    // FNV-1a over the raw bytes of every parameter in the group; used to
    // prove that meta-testing leaves Theta and M untouched.
    std::uint64_t hash_group(ParamGroup g) const;

    std::size_t adapter_scalar_count() const {
        return count_adapter_params(d_t, hyper.m, d_s) + count_adapter_params(d_v, hyper.m, d_s);
    }

    // --- tape forward ---
    NodeId adapt_textual(GradTape& tape, kg::EntityId e) const;
    NodeId adapt_visual(GradTape& tape, kg::EntityId e) const;
    NodeId fused(GradTape& tape, kg::EntityId e) const;
    // mean over support pairs of learner(concat(e_h, e_t))
    NodeId relation_meta(GradTape& tape, const std::vector<std::pair<NodeId, NodeId>>& pairs) const;
    // R' = R - beta * grad_R of the support margin loss, `refine_steps` times
    NodeId refine_relation_meta(GradTape& tape, NodeId r_meta,
                                const std::vector<NodeId>& support_heads,
                                const std::vector<NodeId>& support_tails,
                                const std::vector<NodeId>& support_neg_tails) const;

    // --- plain fast path (evaluation-time ranking; no gradients) ---
    num::Vector adapted_value(kg::Modality m, kg::EntityId e) const;
    num::Vector fused_value(kg::EntityId e) const;
};

// Translational score ||e_h + R' - e_t|| as a tape node.
NodeId score(GradTape& tape, NodeId e_h, NodeId r_meta, NodeId e_t);

// Generic bottleneck adapter application (tape).
NodeId adapt_modality(GradTape& tape, NodeId e, const AdapterIds& ids);

// Elementwise fusion; the structural input passes through unchanged.
NodeId fuse(GradTape& tape, NodeId e_s, NodeId adapted_t, NodeId adapted_v);

} // namespace fskg::model
