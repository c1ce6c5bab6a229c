#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fskg/error.hpp"

namespace fskg::kg {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
    EntityId head;
    RelationId rel;
    EntityId tail;

    friend bool operator==(const Triple&, const Triple&) = default;
};

// Immutable-after-construction symbolic graph with per-relation and
// per-(head, relation) indexes. Ids are assigned in first-appearance order
// so runs are reproducible from the same files.
class TripleStore {
public:
    EntityId intern_entity(const std::string& name);
    RelationId intern_relation(const std::string& name);

    // Returns false when the triple is a duplicate.
    bool add_triple(EntityId h, RelationId r, EntityId t);

    // One triple per line, `head<TAB>relation<TAB>tail`; '#' lines ignored.
    static TripleStore load(const std::string& path);

    std::size_t n_entities() const { return entity_names_.size(); }
    std::size_t n_relations() const { return relation_names_.size(); }
    const std::vector<Triple>& triples() const { return triples_; }

    const std::string& entity_name(EntityId e) const { return entity_names_[static_cast<std::size_t>(e)]; }
    const std::string& relation_name(RelationId r) const { return relation_names_[static_cast<std::size_t>(r)]; }

    const std::vector<Triple>& triples_of(RelationId r) const {
        return by_relation_[static_cast<std::size_t>(r)];
    }

    // All t such that (h, r, t) is a known triple; empty set if none.
    const std::unordered_set<EntityId>& true_tails(EntityId h, RelationId r) const;

    // Drops relations with fewer than min_count triples (entities are kept,
    // and keep their ids; surviving relations are re-interned in order).
    TripleStore prune_rare_relations(std::size_t min_count) const;

private:
    static std::int64_t hr_key(EntityId h, RelationId r) {
        return (static_cast<std::int64_t>(h) << 32) | static_cast<std::uint32_t>(r);
    }

    std::vector<std::string> entity_names_;
    std::vector<std::string> relation_names_;
    std::unordered_map<std::string, EntityId> entity_ids_;
    std::unordered_map<std::string, RelationId> relation_ids_;
    std::vector<Triple> triples_;
    std::vector<std::vector<Triple>> by_relation_;
    std::unordered_map<std::int64_t, std::unordered_set<EntityId>> tails_by_hr_;
};

struct RelationSplits {
    std::vector<RelationId> train;
    std::vector<RelationId> valid;
    std::vector<RelationId> test;
};

// `relation<TAB>{train|valid|test}` per line.
RelationSplits load_splits(const std::string& path, const TripleStore& store);
void save_splits(const std::string& path, const TripleStore& store, const RelationSplits& splits);

} // namespace fskg::kg
