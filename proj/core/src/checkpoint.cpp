#include "fskg/model/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

namespace fskg::model {

namespace {

constexpr char kMagic[8] = {'F', 'S', 'K', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

struct Section {
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<double> data;
};

void write_section(std::ostream& out, const std::string& name, std::uint64_t rows,
                   std::uint64_t cols, const std::vector<double>& data) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(out, rows);
    write_u64(out, cols);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
}

} // namespace

void save_checkpoint(const std::string& path, const ModelState& state) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);

    const std::vector<std::pair<std::string, std::vector<double>>> hyper = {
        {"hyper.alpha", {state.hyper.alpha}},
        {"hyper.gamma", {state.hyper.gamma}},
        {"hyper.epsilon", {state.hyper.epsilon}},
        {"hyper.beta", {state.hyper.beta}},
        {"hyper.m", {static_cast<double>(state.hyper.m)}},
        {"hyper.lr_main", {state.hyper.lr_main}},
        {"hyper.lr_adapter", {state.hyper.lr_adapter}},
        {"hyper.refine_steps", {static_cast<double>(state.hyper.refine_steps)}},
        {"hyper.first_order", {state.hyper.first_order ? 1.0 : 0.0}},
        {"hyper.n_neg", {static_cast<double>(state.hyper.n_neg)}},
        {"hyper.use_adapters", {state.use_adapters ? 1.0 : 0.0}},
    };

    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(state.params.size() + hyper.size()));
    for (std::size_t i = 0; i < state.params.size(); ++i) {
        const auto id = static_cast<ParamId>(i);
        write_section(out, state.params.name(id), state.params.rows(id), state.params.cols(id),
                      state.params.values(id));
    }
    for (const auto& [name, data] : hyper) write_section(out, name, 1, 1, data);
    if (!out) throw IoError("write failure on checkpoint: " + path);
}

ModelState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ParseError("not a checkpoint file: " + path);
    }
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw ParseError("unsupported checkpoint version " + std::to_string(version) + " in " + path);
    }
    const std::uint32_t n_sections = read_u32(in);

    std::map<std::string, Section> sections;
    for (std::uint32_t i = 0; i < n_sections; ++i) {
        const std::uint32_t name_len = read_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        Section s;
        s.rows = read_u64(in);
        s.cols = read_u64(in);
        s.data.resize(s.rows * s.cols);
        in.read(reinterpret_cast<char*>(s.data.data()),
                static_cast<std::streamsize>(s.data.size() * sizeof(double)));
        if (!in) throw ParseError("truncated checkpoint: " + path);
        sections.emplace(std::move(name), std::move(s));
    }

    auto scalar = [&](const std::string& name) {
        auto it = sections.find(name);
        if (it == sections.end()) throw ParseError("checkpoint missing section " + name);
        return it->second.data.at(0);
    };

    Hyper hp;
    hp.alpha = scalar("hyper.alpha");
    hp.gamma = scalar("hyper.gamma");
    hp.epsilon = scalar("hyper.epsilon");
    hp.beta = scalar("hyper.beta");
    hp.m = static_cast<std::size_t>(scalar("hyper.m"));
    hp.lr_main = scalar("hyper.lr_main");
    hp.lr_adapter = scalar("hyper.lr_adapter");
    hp.refine_steps = static_cast<std::size_t>(scalar("hyper.refine_steps"));
    hp.first_order = scalar("hyper.first_order") != 0.0;
    hp.n_neg = static_cast<std::size_t>(scalar("hyper.n_neg"));
    const bool use_adapters = scalar("hyper.use_adapters") != 0.0;

    auto table = [&](const std::string& name) -> const Section& {
        auto it = sections.find(name);
        if (it == sections.end()) throw ParseError("checkpoint missing section " + name);
        return it->second;
    };

    kg::ModalityEmbeddings emb;
    const Section& es = table("embeddings.S");
    const Section& et = table("embeddings.T");
    const Section& ev = table("embeddings.V");
    emb.structural = num::Matrix(es.rows, es.cols);
    emb.structural.data = es.data;
    emb.textual = num::Matrix(et.rows, et.cols);
    emb.textual.data = et.data;
    emb.visual = num::Matrix(ev.rows, ev.cols);
    emb.visual.data = ev.data;

    Rng dummy(0);
    ModelState state(emb, hp, use_adapters, dummy);
    for (std::size_t i = 0; i < state.params.size(); ++i) {
        const auto id = static_cast<ParamId>(i);
        const Section& s = table(state.params.name(id));
        if (s.rows != state.params.rows(id) || s.cols != state.params.cols(id)) {
            throw ParseError("checkpoint section " + state.params.name(id) + " has wrong shape");
        }
        state.params.values(id) = s.data;
    }
    return state;
}

} // namespace fskg::model
