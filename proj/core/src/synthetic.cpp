#include "fskg/kg/synthetic.hpp"

#include <cmath>
#include <limits>

namespace fskg::kg {

namespace {

num::Matrix random_projection(std::size_t rows, std::size_t cols, Rng& rng) {
    num::Matrix q(rows, cols);
    const double scale = cols > 0 ? 1.0 / std::sqrt(static_cast<double>(cols)) : 0.0;
    for (double& x : q.data) x = rng.normal(0.0, scale);
    return q;
}

// y = Q * x over a coordinate subset of the latent.
num::Vector project(const num::Matrix& q, const num::Matrix& latents, std::size_t entity,
                    const std::vector<std::size_t>& coords) {
    num::Vector y(q.rows, 0.0);
    for (std::size_t r = 0; r < q.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < coords.size(); ++c) {
            s += q.at(r, c) * latents.at(entity, coords[c]);
        }
        y[r] = s;
    }
    return y;
}

} // namespace

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.n_entities == 0 || cfg.n_relations == 0 || cfg.triples_per_relation == 0 ||
        cfg.d_s == 0 || cfg.d_t == 0 || cfg.d_v == 0) {
        throw ConfigError("generate_synthetic: counts and dimensions must be positive");
    }
    if (cfg.complementarity < 0.0 || cfg.complementarity > 1.0) {
        throw ConfigError("generate_synthetic: complementarity must be in [0,1]");
    }
    if (cfg.noise_scale < 0.0) {
        throw ConfigError("generate_synthetic: noise_scale must be >= 0");
    }
    // each (head, relation) pair has exactly one planted tail
    if (cfg.triples_per_relation > cfg.n_entities) {
        throw ConfigError("generate_synthetic: triples_per_relation (" +
                          std::to_string(cfg.triples_per_relation) + ") exceeds n_entities (" +
                          std::to_string(cfg.n_entities) + ")");
    }

    const std::size_t d_l = cfg.d_s;  // latent width
    SyntheticData out;

    Rng rng = Rng::stream(cfg.seed, "synthetic");

    // latents and relation offsets
    out.truth.latents = num::Matrix(cfg.n_entities, d_l);
    for (double& x : out.truth.latents.data) x = rng.normal();
    out.truth.offsets = num::Matrix(cfg.n_relations, d_l);
    for (double& x : out.truth.offsets.data) x = rng.normal(0.0, 0.5);

    // entities / relations, first-appearance order
    for (std::size_t e = 0; e < cfg.n_entities; ++e) out.store.intern_entity("e" + std::to_string(e));
    for (std::size_t r = 0; r < cfg.n_relations; ++r) out.store.intern_relation("r" + std::to_string(r));

    // triples: distinct heads per relation, tail = nearest latent to z_h + o_r
    for (std::size_t r = 0; r < cfg.n_relations; ++r) {
        auto heads = rng.sample_without_replacement(cfg.n_entities, cfg.triples_per_relation);
        for (std::size_t h : heads) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t tail = 0;
            for (std::size_t t = 0; t < cfg.n_entities; ++t) {
                double d2 = 0.0;
                for (std::size_t c = 0; c < d_l; ++c) {
                    const double d = out.truth.latents.at(h, c) + out.truth.offsets.at(r, c) -
                                     out.truth.latents.at(t, c);
                    d2 += d * d;
                }
                if (d2 < best) {
                    best = d2;
                    tail = t;
                }
            }
            out.store.add_triple(static_cast<EntityId>(h), static_cast<RelationId>(r),
                                 static_cast<EntityId>(tail));
        }
    }

    // coordinate split: first n_struct coords are structural-informative,
    // the rest carry the complementary signal, alternating textual/visual
    const std::size_t n_struct =
        static_cast<std::size_t>(std::lround((1.0 - cfg.complementarity) * static_cast<double>(d_l)));
    std::vector<std::size_t> coords_s, coords_t, coords_v;
    for (std::size_t c = 0; c < n_struct; ++c) coords_s.push_back(c);
    for (std::size_t c = n_struct; c < d_l; ++c) {
        ((c - n_struct) % 2 == 0 ? coords_t : coords_v).push_back(c);
    }

    const num::Matrix q_s = random_projection(cfg.d_s, coords_s.size(), rng);
    const num::Matrix q_t = random_projection(cfg.d_t, coords_t.size(), rng);
    const num::Matrix q_v = random_projection(cfg.d_v, coords_v.size(), rng);

    out.embeddings.structural = num::Matrix(cfg.n_entities, cfg.d_s);
    out.embeddings.textual = num::Matrix(cfg.n_entities, cfg.d_t);
    out.embeddings.visual = num::Matrix(cfg.n_entities, cfg.d_v);
    for (std::size_t e = 0; e < cfg.n_entities; ++e) {
        out.embeddings.structural.set_row(e, project(q_s, out.truth.latents, e, coords_s));
        out.embeddings.textual.set_row(e, project(q_t, out.truth.latents, e, coords_t));
        out.embeddings.visual.set_row(e, project(q_v, out.truth.latents, e, coords_v));
    }
    if (cfg.noise_scale > 0.0) {
        for (double& x : out.embeddings.structural.data) x += rng.normal(0.0, cfg.noise_scale);
        for (double& x : out.embeddings.textual.data) x += rng.normal(0.0, cfg.noise_scale);
        for (double& x : out.embeddings.visual.data) x += rng.normal(0.0, cfg.noise_scale);
    }

    // relation splits, 60/20/20 over a shuffled order
    std::vector<RelationId> order(cfg.n_relations);
    for (std::size_t r = 0; r < cfg.n_relations; ++r) order[r] = static_cast<RelationId>(r);
    rng.shuffle(order);
    const std::size_t n_train = cfg.n_relations * 3 / 5;
    const std::size_t n_valid = (cfg.n_relations - n_train) / 2;
    for (std::size_t i = 0; i < cfg.n_relations; ++i) {
        if (i < n_train) out.splits.train.push_back(order[i]);
        else if (i < n_train + n_valid) out.splits.valid.push_back(order[i]);
        else out.splits.test.push_back(order[i]);
    }
    return out;
}

} // namespace fskg::kg
