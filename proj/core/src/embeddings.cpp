#include "fskg/kg/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <vector>

namespace fskg::kg {

Modality modality_from_name(const std::string& name) {
    if (name == "structural" || name == "S") return Modality::Structural;
    if (name == "textual" || name == "T") return Modality::Textual;
    if (name == "visual" || name == "V") return Modality::Visual;
    throw ConfigError("unknown modality '" + name + "' (expected structural|textual|visual)");
}

const char* modality_name(Modality m) {
    switch (m) {
    case Modality::Structural: return "structural";
    case Modality::Textual: return "textual";
    default: return "visual";
    }
}

LoadedTable load_embeddings(const std::string& path, const TripleStore& store) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embeddings file: " + path);

    std::unordered_map<std::string, EntityId> ids;
    ids.reserve(store.n_entities());
    for (std::size_t e = 0; e < store.n_entities(); ++e) {
        ids.emplace(store.entity_name(static_cast<EntityId>(e)), static_cast<EntityId>(e));
    }

    std::vector<std::pair<EntityId, num::Vector>> rows;
    std::size_t width = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (line.back() == '\r') line.pop_back();
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected entity<TAB>values");
        }
        const std::string name = line.substr(0, tab);
        num::Vector vals;
        const char* p = line.data() + tab + 1;
        const char* end = line.data() + line.size();
        while (p < end) {
            while (p < end && *p == ' ') ++p;
            if (p >= end) break;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{}) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": non-numeric token at column " +
                                 std::to_string(p - line.data() + 1));
            }
            vals.push_back(v);
            p = next;
        }
        if (vals.empty()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": no values for entity '" + name + "'");
        }
        if (width == 0) {
            width = vals.size();
        } else if (vals.size() != width) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": row width " +
                             std::to_string(vals.size()) + " != " + std::to_string(width));
        }
        auto it = ids.find(name);
        if (it == ids.end()) continue;  // entities outside the store are ignored
        rows.emplace_back(it->second, std::move(vals));
    }

    LoadedTable out;
    out.table = num::Matrix(store.n_entities(), width == 0 ? 1 : width);
    std::vector<bool> covered(store.n_entities(), false);
    for (auto& [eid, vals] : rows) {
        out.table.set_row(static_cast<std::size_t>(eid), vals);
        covered[static_cast<std::size_t>(eid)] = true;
    }
    for (std::size_t e = 0; e < store.n_entities(); ++e) {
        if (!covered[e]) ++out.n_missing;
    }
    return out;
}

void save_embeddings(const std::string& path, const TripleStore& store, const num::Matrix& table) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write embeddings file: " + path);
    out.precision(17);
    for (std::size_t e = 0; e < table.rows; ++e) {
        out << store.entity_name(static_cast<EntityId>(e)) << '\t';
        for (std::size_t c = 0; c < table.cols; ++c) {
            if (c) out << ' ';
            out << table.at(e, c);
        }
        out << '\n';
    }
}

ModalityEmbeddings mask_modality(const ModalityEmbeddings& emb, Modality m, double fraction,
                                 Rng& rng) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw ConfigError("mask fraction must be in [0,1], got " + std::to_string(fraction));
    }
    ModalityEmbeddings out = emb;
    num::Matrix& table = out.table(m);
    const std::size_t n = table.rows;
    const std::size_t k = static_cast<std::size_t>(fraction * static_cast<double>(n));
    for (std::size_t idx : rng.sample_without_replacement(n, k)) {
        for (std::size_t c = 0; c < table.cols; ++c) table.at(idx, c) = 0.0;
    }
    return out;
}

} // namespace fskg::kg
