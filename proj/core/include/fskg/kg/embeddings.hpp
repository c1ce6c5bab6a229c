#pragma once

#include <string>

#include "fskg/kg/triple_store.hpp"
#include "fskg/num/tensor.hpp"
#include "fskg/rng.hpp"

namespace fskg::kg {

enum class Modality { Structural, Textual, Visual };

Modality modality_from_name(const std::string& name);
const char* modality_name(Modality m);

// One dense table per modality; every entity of the store has a row in all
// three (missing-modality entities get an explicit all-zero row).
struct ModalityEmbeddings {
    num::Matrix structural;
    num::Matrix textual;
    num::Matrix visual;

    const num::Matrix& table(Modality m) const {
        switch (m) {
        case Modality::Structural: return structural;
        case Modality::Textual: return textual;
        default: return visual;
        }
    }
    num::Matrix& table(Modality m) {
        return const_cast<num::Matrix&>(static_cast<const ModalityEmbeddings*>(this)->table(m));
    }
};

struct LoadedTable {
    num::Matrix table;
    std::size_t n_missing = 0;  // entities zero-filled because absent from the file
};

// `entity<TAB>f1 f2 ... fd`; entities absent from the file get a zero row.
LoadedTable load_embeddings(const std::string& path, const TripleStore& store);
void save_embeddings(const std::string& path, const TripleStore& store, const num::Matrix& table);

// Zeroes the rows of exactly floor(fraction * n_entities) uniformly chosen
// entities in the given modality.
ModalityEmbeddings mask_modality(const ModalityEmbeddings& emb, Modality m, double fraction,
                                 Rng& rng);

} // namespace fskg::kg
