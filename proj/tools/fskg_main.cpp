// Command-line harness: dataset synthesis, meta-training, evaluation,
// ablations and sensitivity sweeps over few-shot multimodal KG models.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fskg/kg/synthetic.hpp"
#include "fskg/metalearn/metalearn.hpp"
#include "fskg/model/checkpoint.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fskg;

namespace {

struct RunConfig {
    metalearn::TrainConfig train;
    kg::SyntheticConfig synth;

    std::string triples_path;
    std::string emb_s_path;
    std::string emb_t_path;
    std::string emb_v_path;
    std::string splits_path;
    std::string checkpoint_path;
    std::string out_dir = "run";

    std::vector<std::uint64_t> seeds = {1};
    std::string ablation = "full";
    std::vector<std::string> ablation_modes = {"full", "no_div", "no_adapters", "frozen_adapters",
                                               "random_init_adapters"};
    double mask_fraction = 0.0;
    std::string mask_modality = "both";  // textual | visual | both
    std::size_t prune_min_count = 0;

    std::string sweep_axis;
    std::vector<double> sweep_values;
};

json config_json(const RunConfig& c) {
    json j;
    j["seed"] = c.train.seed;
    j["seeds"] = c.seeds;
    j["max_epochs"] = c.train.max_epochs;
    j["eval_every"] = c.train.eval_every;
    j["patience"] = c.train.patience;
    j["batch_size"] = c.train.batch_size;
    j["lr_main"] = c.train.lr_main;
    j["lr_adapter"] = c.train.lr_adapter;
    j["K"] = c.train.k;
    j["n_query"] = c.train.n_query;
    j["alpha"] = c.train.alpha;
    j["gamma"] = c.train.gamma;
    j["epsilon"] = c.train.epsilon;
    j["beta"] = c.train.beta;
    j["m"] = c.train.m;
    j["n_neg"] = c.train.n_neg;
    j["refine_steps"] = c.train.refine_steps;
    j["first_order"] = c.train.first_order;
    j["ablation_mode"] = c.ablation;
    j["max_adapt_steps"] = c.train.max_adapt_steps;
    j["adapt_tol"] = c.train.adapt_tol;
    j["eval_n_query"] = c.train.eval_n_query;
    j["threads"] = c.train.threads;
    j["synth"] = {{"n_entities", c.synth.n_entities},
                  {"n_relations", c.synth.n_relations},
                  {"triples_per_relation", c.synth.triples_per_relation},
                  {"d_S", c.synth.d_s},
                  {"d_T", c.synth.d_t},
                  {"d_V", c.synth.d_v},
                  {"noise_scale", c.synth.noise_scale},
                  {"complementarity", c.synth.complementarity},
                  {"seed", c.synth.seed}};
    // out_dir is deliberately not part of the resolved config: the same run
    // sent to a different directory must produce byte-identical artifacts
    j["paths"] = {{"triples", c.triples_path}, {"embeddings_structural", c.emb_s_path},
                  {"embeddings_textual", c.emb_t_path}, {"embeddings_visual", c.emb_v_path},
                  {"splits", c.splits_path}, {"checkpoint", c.checkpoint_path}};
    j["mask_fraction"] = c.mask_fraction;
    j["mask_modality"] = c.mask_modality;
    j["prune_min_count"] = c.prune_min_count;
    j["sweep_axis"] = c.sweep_axis;
    j["sweep_values"] = c.sweep_values;
    return j;
}

std::string fingerprint(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (char ch : s) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(ch));
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Pre-parse pass: apply --config file values underneath the CLI flags.
void apply_config_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    auto get = [&](const char* key, auto& target) {
        if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
    };
    get("seed", c.train.seed);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    get("max_epochs", c.train.max_epochs);
    get("eval_every", c.train.eval_every);
    get("patience", c.train.patience);
    get("batch_size", c.train.batch_size);
    get("lr_main", c.train.lr_main);
    get("lr_adapter", c.train.lr_adapter);
    get("K", c.train.k);
    get("n_query", c.train.n_query);
    get("alpha", c.train.alpha);
    get("gamma", c.train.gamma);
    get("epsilon", c.train.epsilon);
    get("beta", c.train.beta);
    get("m", c.train.m);
    get("n_neg", c.train.n_neg);
    get("refine_steps", c.train.refine_steps);
    get("first_order", c.train.first_order);
    get("ablation_mode", c.ablation);
    get("max_adapt_steps", c.train.max_adapt_steps);
    get("adapt_tol", c.train.adapt_tol);
    get("eval_n_query", c.train.eval_n_query);
    get("threads", c.train.threads);
    get("mask_fraction", c.mask_fraction);
    get("mask_modality", c.mask_modality);
    get("prune_min_count", c.prune_min_count);
    if (j.contains("synth")) {
        const json& s = j.at("synth");
        auto gs = [&](const char* key, auto& target) {
            if (s.contains(key)) target = s.at(key).get<std::decay_t<decltype(target)>>();
        };
        gs("n_entities", c.synth.n_entities);
        gs("n_relations", c.synth.n_relations);
        gs("triples_per_relation", c.synth.triples_per_relation);
        gs("d_S", c.synth.d_s);
        gs("d_T", c.synth.d_t);
        gs("d_V", c.synth.d_v);
        gs("noise_scale", c.synth.noise_scale);
        gs("complementarity", c.synth.complementarity);
        gs("seed", c.synth.seed);
    }
    if (j.contains("paths")) {
        const json& p = j.at("paths");
        auto gp = [&](const char* key, std::string& target) {
            if (p.contains(key)) target = p.at(key).get<std::string>();
        };
        gp("triples", c.triples_path);
        gp("embeddings_structural", c.emb_s_path);
        gp("embeddings_textual", c.emb_t_path);
        gp("embeddings_visual", c.emb_v_path);
        gp("splits", c.splits_path);
        gp("checkpoint", c.checkpoint_path);
        gp("out_dir", c.out_dir);
    }
}

void add_shared_options(CLI::App* cmd, RunConfig& c, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    cmd->add_option("--seed", c.train.seed, "root random seed");
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--threads", c.train.threads, "evaluation worker threads");
}

void add_train_options(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--max-epochs", c.train.max_epochs);
    cmd->add_option("--eval-every", c.train.eval_every);
    cmd->add_option("--patience", c.train.patience);
    cmd->add_option("--batch-size", c.train.batch_size);
    cmd->add_option("--lr-main", c.train.lr_main);
    cmd->add_option("--lr-adapter", c.train.lr_adapter);
    cmd->add_option("-K,--shots", c.train.k, "support set size");
    cmd->add_option("--n-query", c.train.n_query);
    cmd->add_option("--alpha", c.train.alpha, "diversity coefficient");
    cmd->add_option("--gamma", c.train.gamma, "diversity margin");
    cmd->add_option("--epsilon", c.train.epsilon, "ranking margin");
    cmd->add_option("--beta", c.train.beta, "relation-meta refinement intensity");
    cmd->add_option("-m,--adapter-neurons", c.train.m, "adapter bottleneck width");
    cmd->add_option("--n-neg", c.train.n_neg);
    cmd->add_option("--refine-steps", c.train.refine_steps);
    cmd->add_flag("--first-order,!--higher-order", c.train.first_order,
                  "stop gradients at the relation-meta refinement step");
    cmd->add_option("--max-adapt-steps", c.train.max_adapt_steps);
    cmd->add_option("--adapt-tol", c.train.adapt_tol);
    cmd->add_option("--eval-n-query", c.train.eval_n_query);
    cmd->add_option("--ablation", c.ablation,
                    "full|no_div|no_adapters|frozen_adapters|random_init_adapters");
}

void add_data_options(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--triples", c.triples_path, "triples TSV file");
    cmd->add_option("--emb-structural", c.emb_s_path);
    cmd->add_option("--emb-textual", c.emb_t_path);
    cmd->add_option("--emb-visual", c.emb_v_path);
    cmd->add_option("--splits", c.splits_path);
    cmd->add_option("--prune-min-count", c.prune_min_count,
                    "drop relations with fewer triples than this before use");
}

metalearn::Dataset load_dataset(const RunConfig& c) {
    for (const std::string* p : {&c.triples_path, &c.emb_s_path, &c.emb_t_path, &c.emb_v_path,
                                 &c.splits_path}) {
        if (p->empty()) throw ConfigError("missing data file option (triples/embeddings/splits)");
        if (!fs::exists(*p)) throw ConfigError("data file does not exist: " + *p);
    }
    metalearn::Dataset data;
    data.store = kg::TripleStore::load(c.triples_path);
    if (c.prune_min_count > 0) data.store = data.store.prune_rare_relations(c.prune_min_count);
    auto s = kg::load_embeddings(c.emb_s_path, data.store);
    auto t = kg::load_embeddings(c.emb_t_path, data.store);
    auto v = kg::load_embeddings(c.emb_v_path, data.store);
    const std::size_t missing = s.n_missing + t.n_missing + v.n_missing;
    if (missing > 0) {
        std::cerr << "warning: " << missing << " entity rows zero-filled across modalities\n";
    }
    data.embeddings = {std::move(s.table), std::move(t.table), std::move(v.table)};
    data.splits = kg::load_splits(c.splits_path, data.store);
    return data;
}

void echo_config(const json& resolved) {
    std::cout << "resolved config (fingerprint " << fingerprint(resolved)
              << "):\n" << resolved.dump(2) << "\n";
}

void write_config(const fs::path& dir, const json& resolved) {
    fs::create_directories(dir);
    std::ofstream out(dir / "config.json");
    if (!out) throw IoError("cannot write " + (dir / "config.json").string());
    out << resolved.dump(2) << "\n";
}

kg::ModalityEmbeddings apply_mask(const kg::ModalityEmbeddings& emb, const RunConfig& c,
                                  std::uint64_t seed) {
    if (c.mask_fraction == 0.0) return emb;
    kg::ModalityEmbeddings out = emb;
    if (c.mask_modality == "textual" || c.mask_modality == "both") {
        Rng rng = Rng::stream(seed, "mask-textual");
        out = kg::mask_modality(out, kg::Modality::Textual, c.mask_fraction, rng);
    }
    if (c.mask_modality == "visual" || c.mask_modality == "both") {
        Rng rng = Rng::stream(seed, "mask-visual");
        out = kg::mask_modality(out, kg::Modality::Visual, c.mask_fraction, rng);
    }
    if (c.mask_modality != "textual" && c.mask_modality != "visual" && c.mask_modality != "both") {
        throw ConfigError("unknown mask modality '" + c.mask_modality + "'");
    }
    return out;
}

// --- commands ---

int cmd_synth(RunConfig& c) {
    const json resolved = config_json(c);
    echo_config(resolved);
    const auto data = kg::generate_synthetic(c.synth);

    const fs::path dir = c.out_dir;
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "triples.tsv");
        if (!out) throw IoError("cannot write " + (dir / "triples.tsv").string());
        for (const kg::Triple& t : data.store.triples()) {
            out << data.store.entity_name(t.head) << '\t' << data.store.relation_name(t.rel) << '\t'
                << data.store.entity_name(t.tail) << '\n';
        }
    }
    kg::save_embeddings((dir / "emb_structural.tsv").string(), data.store,
                        data.embeddings.structural);
    kg::save_embeddings((dir / "emb_textual.tsv").string(), data.store, data.embeddings.textual);
    kg::save_embeddings((dir / "emb_visual.tsv").string(), data.store, data.embeddings.visual);
    kg::save_splits((dir / "splits.tsv").string(), data.store, data.splits);
    write_config(dir, resolved);

    std::cout << "entities=" << data.store.n_entities() << " triples=" << data.store.triples().size()
              << " relations=" << data.store.n_relations() << " train/valid/test="
              << data.splits.train.size() << "/" << data.splits.valid.size() << "/"
              << data.splits.test.size() << "\n";
    return 0;
}

int cmd_train(RunConfig& c) {
    c.train.ablation = metalearn::ablation_from_name(c.ablation);
    const json resolved = config_json(c);
    echo_config(resolved);
    const metalearn::Dataset data = load_dataset(c);

    const auto result = metalearn::meta_train(data, c.train);

    const fs::path dir = c.out_dir;
    write_config(dir, resolved);
    metalearn::write_history_csv((dir / "history.csv").string(), result.history);
    model::save_checkpoint((dir / "checkpoint.bin").string(), result.state);
    std::cout << "best validation MRR " << result.best_val_mrr << " after "
              << result.history.size() << " evaluations; checkpoint written to "
              << (dir / "checkpoint.bin").string() << "\n";
    return 0;
}

eval::MetricsReport test_report(const RunConfig& c, const metalearn::Dataset& data,
                                const model::ModelState& state, const std::string& fp) {
    std::vector<eval::MetricsReport> per_seed;
    for (std::uint64_t seed : c.seeds) {
        metalearn::TrainConfig tc = c.train;
        tc.seed = seed;
        metalearn::Dataset masked = data;
        masked.embeddings = apply_mask(data.embeddings, c, seed);
        model::ModelState st = state;
        st.set_embeddings(masked.embeddings);
        const auto tasks = metalearn::sample_eval_tasks(masked, masked.splits.test, tc, seed,
                                                        "eval-test");
        per_seed.push_back(metalearn::evaluate(tasks, st, masked, tc, seed));
    }
    auto report = eval::aggregate_reports(per_seed);
    report.config_fingerprint = fp;
    return report;
}

int cmd_test(RunConfig& c) {
    c.train.ablation = metalearn::ablation_from_name(c.ablation);
    const json resolved = config_json(c);
    echo_config(resolved);
    if (c.checkpoint_path.empty() || !fs::exists(c.checkpoint_path)) {
        throw ConfigError("checkpoint does not exist: " + c.checkpoint_path);
    }
    const metalearn::Dataset data = load_dataset(c);
    model::ModelState state = model::load_checkpoint(c.checkpoint_path);
    if (c.train.ablation == metalearn::AblationMode::RandomInitAdapters) {
        Rng reinit = Rng::stream(c.train.seed, "reinit-adapters");
        state.reinit_adapters(reinit);
    }

    const auto report = test_report(c, data, state, fingerprint(resolved));

    const fs::path dir = c.out_dir;
    write_config(dir, resolved);
    eval::write_report((dir / "report.json").string(), report);
    std::cout << "test MRR (filtered) " << report.metrics.mrr << " over " << report.n_queries
              << " queries; report written to " << (dir / "report.json").string() << "\n";
    return 0;
}

int cmd_ablate(RunConfig& c) {
    const json resolved = config_json(c);
    echo_config(resolved);
    const metalearn::Dataset data = load_dataset(c);

    std::vector<metalearn::AblationMode> modes;
    for (const std::string& name : c.ablation_modes) {
        modes.push_back(metalearn::ablation_from_name(name));
    }

    // one full train+test cycle per (seed, retrained mode)
    std::vector<std::vector<eval::MetricsReport>> per_mode(modes.size());
    for (std::uint64_t seed : c.seeds) {
        metalearn::TrainConfig tc = c.train;
        tc.seed = seed;
        const auto results = metalearn::run_ablation(data, tc, modes);
        for (std::size_t i = 0; i < modes.size(); ++i) per_mode[i].push_back(results[i].second);
    }

    json out_json;
    const fs::path dir = c.out_dir;
    write_config(dir, resolved);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        auto agg = eval::aggregate_reports(per_mode[i]);
        agg.config_fingerprint = fingerprint(resolved);
        out_json[metalearn::ablation_name(modes[i])] = json::parse(eval::report_to_json(agg));
        std::cout << metalearn::ablation_name(modes[i]) << ": MRR " << agg.metrics.mrr;
        if (agg.stddev) std::cout << " +- " << agg.stddev->mrr;
        std::cout << "\n";
    }
    std::ofstream out(dir / "report.json");
    if (!out) throw IoError("cannot write " + (dir / "report.json").string());
    out << out_json.dump(2) << "\n";
    return 0;
}

int cmd_sweep(RunConfig& c) {
    if (c.sweep_values.empty()) throw ConfigError("sweep: empty values list");
    static const std::vector<std::string> axes = {"K", "alpha", "gamma", "m", "mask_fraction"};
    if (std::find(axes.begin(), axes.end(), c.sweep_axis) == axes.end()) {
        throw ConfigError("sweep: unknown axis '" + c.sweep_axis + "'");
    }
    const json resolved = config_json(c);
    echo_config(resolved);
    const metalearn::Dataset data = load_dataset(c);
    const std::string fp = fingerprint(resolved);

    const fs::path dir = c.out_dir;
    write_config(dir, resolved);
    std::ofstream csv(dir / "sweep.csv");
    if (!csv) throw IoError("cannot write " + (dir / "sweep.csv").string());
    csv.precision(17);
    csv << "axis,value,mrr,mrr_std,hit1,hit5,hit10\n";
    csv.flush();

    for (double value : c.sweep_values) {
        RunConfig point = c;
        if (c.sweep_axis == "K") point.train.k = static_cast<std::size_t>(value);
        else if (c.sweep_axis == "alpha") point.train.alpha = value;
        else if (c.sweep_axis == "gamma") point.train.gamma = value;
        else if (c.sweep_axis == "m") point.train.m = static_cast<std::size_t>(value);
        else point.mask_fraction = value;

        std::vector<eval::MetricsReport> per_seed;
        for (std::uint64_t seed : c.seeds) {
            metalearn::TrainConfig tc = point.train;
            tc.seed = seed;
            if (c.sweep_axis == "mask_fraction" && !c.checkpoint_path.empty()) {
                // test-only sweep against an existing checkpoint
                model::ModelState state = model::load_checkpoint(c.checkpoint_path);
                RunConfig pc = point;
                pc.seeds = {seed};
                per_seed.push_back(test_report(pc, data, state, fp));
            } else {
                const auto train_result = metalearn::meta_train(data, tc);
                RunConfig pc = point;
                pc.seeds = {seed};
                per_seed.push_back(test_report(pc, data, train_result.state, fp));
            }
        }
        const auto agg = eval::aggregate_reports(per_seed);
        csv << c.sweep_axis << ',' << value << ',' << agg.metrics.mrr << ','
            << (agg.stddev ? agg.stddev->mrr : 0.0) << ',' << agg.metrics.hit1 << ','
            << agg.metrics.hit5 << ',' << agg.metrics.hit10 << '\n';
        csv.flush();
        std::cout << c.sweep_axis << "=" << value << " -> MRR " << agg.metrics.mrr << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    std::string config_path;

    // config file values sit between built-in defaults and CLI flags
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    }
    try {
        if (!config_path.empty()) apply_config_file(cfg, config_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"few-shot multimodal KG relation learner"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "generate a synthetic multimodal KG dataset");
    add_shared_options(synth, cfg, config_path);
    synth->add_option("--n-entities", cfg.synth.n_entities);
    synth->add_option("--n-relations", cfg.synth.n_relations);
    synth->add_option("--triples-per-relation", cfg.synth.triples_per_relation);
    synth->add_option("--d-s", cfg.synth.d_s);
    synth->add_option("--d-t", cfg.synth.d_t);
    synth->add_option("--d-v", cfg.synth.d_v);
    synth->add_option("--noise-scale", cfg.synth.noise_scale);
    synth->add_option("--complementarity", cfg.synth.complementarity);
    synth->add_option("--synth-seed", cfg.synth.seed);

    auto* train = app.add_subcommand("train", "meta-train a model");
    add_shared_options(train, cfg, config_path);
    add_data_options(train, cfg);
    add_train_options(train, cfg);

    auto* test = app.add_subcommand("test", "evaluate a checkpoint on the test split");
    add_shared_options(test, cfg, config_path);
    add_data_options(test, cfg);
    add_train_options(test, cfg);
    test->add_option("--checkpoint", cfg.checkpoint_path);
    test->add_option("--seeds", cfg.seeds, "evaluation seeds (mean/std aggregated)");
    test->add_option("--mask-fraction", cfg.mask_fraction);
    test->add_option("--mask-modality", cfg.mask_modality, "textual|visual|both");

    auto* ablate = app.add_subcommand("ablate", "train+test every ablation mode");
    add_shared_options(ablate, cfg, config_path);
    add_data_options(ablate, cfg);
    add_train_options(ablate, cfg);
    ablate->add_option("--modes", cfg.ablation_modes);
    ablate->add_option("--seeds", cfg.seeds);

    auto* sweep = app.add_subcommand("sweep", "sensitivity sweep along one axis");
    add_shared_options(sweep, cfg, config_path);
    add_data_options(sweep, cfg);
    add_train_options(sweep, cfg);
    sweep->add_option("--axis", cfg.sweep_axis, "K|alpha|gamma|m|mask_fraction")->required();
    sweep->add_option("--values", cfg.sweep_values)->required();
    sweep->add_option("--seeds", cfg.seeds);
    sweep->add_option("--checkpoint", cfg.checkpoint_path,
                      "existing checkpoint (mask_fraction sweeps evaluate it directly)");
    sweep->add_option("--mask-modality", cfg.mask_modality);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(cfg);
        if (train->parsed()) return cmd_train(cfg);
        if (test->parsed()) return cmd_test(cfg);
        if (ablate->parsed()) return cmd_ablate(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
