#include "fskg/kg/triple_store.hpp"

#include <fstream>
#include <sstream>

namespace fskg::kg {

EntityId TripleStore::intern_entity(const std::string& name) {
    auto it = entity_ids_.find(name);
    if (it != entity_ids_.end()) return it->second;
    const EntityId id = static_cast<EntityId>(entity_names_.size());
    entity_names_.push_back(name);
    entity_ids_.emplace(name, id);
    return id;
}

RelationId TripleStore::intern_relation(const std::string& name) {
    auto it = relation_ids_.find(name);
    if (it != relation_ids_.end()) return it->second;
    const RelationId id = static_cast<RelationId>(relation_names_.size());
    relation_names_.push_back(name);
    relation_ids_.emplace(name, id);
    by_relation_.emplace_back();
    return id;
}

bool TripleStore::add_triple(EntityId h, RelationId r, EntityId t) {
    auto& tails = tails_by_hr_[hr_key(h, r)];
    if (!tails.insert(t).second) return false;
    triples_.push_back({h, r, t});
    by_relation_[static_cast<std::size_t>(r)].push_back({h, r, t});
    return true;
}

const std::unordered_set<EntityId>& TripleStore::true_tails(EntityId h, RelationId r) const {
    static const std::unordered_set<EntityId> empty;
    auto it = tails_by_hr_.find(hr_key(h, r));
    return it == tails_by_hr_.end() ? empty : it->second;
}

TripleStore TripleStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open triples file: " + path);
    TripleStore store;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected head<TAB>relation<TAB>tail");
        }
        const std::string h = line.substr(0, tab1);
        const std::string r = line.substr(tab1 + 1, tab2 - tab1 - 1);
        std::string t = line.substr(tab2 + 1);
        if (!t.empty() && t.back() == '\r') t.pop_back();
        if (h.empty() || r.empty() || t.empty()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": empty field");
        }
        const EntityId head = store.intern_entity(h);
        const RelationId rel = store.intern_relation(r);
        const EntityId tail = store.intern_entity(t);
        store.add_triple(head, rel, tail);
    }
    return store;
}

TripleStore TripleStore::prune_rare_relations(std::size_t min_count) const {
    TripleStore out;
    // entities keep ids
    for (const auto& name : entity_names_) out.intern_entity(name);
    for (std::size_t r = 0; r < relation_names_.size(); ++r) {
        if (by_relation_[r].size() < min_count) continue;
        const RelationId nr = out.intern_relation(relation_names_[r]);
        for (const Triple& t : by_relation_[r]) out.add_triple(t.head, nr, t.tail);
    }
    return out;
}

RelationSplits load_splits(const std::string& path, const TripleStore& store) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open splits file: " + path);
    RelationSplits splits;
    std::string line;
    std::size_t lineno = 0;
    std::unordered_map<std::string, RelationId> by_name;
    for (std::size_t r = 0; r < store.n_relations(); ++r) {
        by_name.emplace(store.relation_name(static_cast<RelationId>(r)), static_cast<RelationId>(r));
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected relation<TAB>split");
        }
        const std::string rel = line.substr(0, tab);
        std::string split = line.substr(tab + 1);
        if (!split.empty() && split.back() == '\r') split.pop_back();
        auto it = by_name.find(rel);
        if (it == by_name.end()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": unknown relation '" + rel + "'");
        }
        if (split == "train") splits.train.push_back(it->second);
        else if (split == "valid") splits.valid.push_back(it->second);
        else if (split == "test") splits.test.push_back(it->second);
        else throw ParseError(path + ":" + std::to_string(lineno) + ": unknown split '" + split + "'");
    }
    return splits;
}

void save_splits(const std::string& path, const TripleStore& store, const RelationSplits& splits) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write splits file: " + path);
    auto dump = [&](const std::vector<RelationId>& rels, const char* name) {
        for (RelationId r : rels) out << store.relation_name(r) << '\t' << name << '\n';
    };
    dump(splits.train, "train");
    dump(splits.valid, "valid");
    dump(splits.test, "test");
}

} // namespace fskg::kg
