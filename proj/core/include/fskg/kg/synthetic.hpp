#pragma once

#include <cstdint>

#include "fskg/kg/embeddings.hpp"
#include "fskg/kg/triple_store.hpp"

namespace fskg::kg {

// Desk-scale generator with a planted, recoverable relation structure.
//
// Every entity has a latent z in R^{d_S}; every relation is a fixed offset o
// in latent space, and the tail of (h, r, .) is the entity nearest to
// z_h + o. The latent coordinates are split into a structural part and a
// complementary part: structural embeddings are a random projection of the
// structural coordinates only, while textual/visual embeddings project the
// complementary coordinates (split between the two). `complementarity`
// controls the fraction of discriminative signal that lives only in the
// textual/visual channels, so structural-only models are strictly
// handicapped when it is > 0.
struct SyntheticConfig {
    std::size_t n_entities = 200;
    std::size_t n_relations = 20;
    std::size_t triples_per_relation = 60;
    std::size_t d_s = 16;
    std::size_t d_t = 12;
    std::size_t d_v = 12;
    double noise_scale = 0.05;
    double complementarity = 0.5;
    std::uint64_t seed = 1;
};

// Planted structure, exposed for oracle tests.
struct SyntheticGroundTruth {
    num::Matrix latents;      // n_entities x d_s
    num::Matrix offsets;      // n_relations x d_s
};

struct SyntheticData {
    TripleStore store;
    ModalityEmbeddings embeddings;
    RelationSplits splits;
    SyntheticGroundTruth truth;
};

SyntheticData generate_synthetic(const SyntheticConfig& cfg);

} // namespace fskg::kg
