#pragma once

#include <string>

#include "fskg/eval/metrics.hpp"
#include "fskg/kg/sampling.hpp"
#include "fskg/kg/synthetic.hpp"
#include "fskg/model/model.hpp"
#include "fskg/objective/objective.hpp"

namespace fskg::metalearn {

enum class AblationMode { Full, NoDiv, NoAdapters, FrozenAdapters, RandomInitAdapters };

AblationMode ablation_from_name(const std::string& name);
const char* ablation_name(AblationMode m);

struct TrainConfig {
    std::size_t max_epochs = 100000;
    std::size_t eval_every = 1000;
    std::size_t patience = 30;
    std::size_t batch_size = 1024;
    double lr_main = 1e-3;
    double lr_adapter = 1e-4;
    std::size_t k = 5;          // shots
    std::size_t n_query = 3;    // query positives per training task
    double alpha = 1.0;
    double gamma = 0.0;
    double epsilon = 1.0;
    double beta = 5.0;
    std::size_t m = 50;
    std::size_t n_neg = 3;
    std::size_t refine_steps = 1;
    bool first_order = true;
    std::uint64_t seed = 1;
    AblationMode ablation = AblationMode::Full;
    std::size_t max_adapt_steps = 100;
    double adapt_tol = 1e-5;    // relative loss-change convergence threshold
    std::size_t eval_n_query = 10;  // query triples per evaluation task
    std::size_t threads = 1;

    model::Hyper hyper() const;
};

struct Dataset {
    kg::TripleStore store;
    kg::ModalityEmbeddings embeddings;
    kg::RelationSplits splits;
};

struct HistoryRow {
    std::size_t epoch;
    double train_loss;  // mean total loss since the previous evaluation
    double val_mrr;
};

struct TrainResult {
    model::ModelState state;  // best-validation checkpoint
    std::vector<HistoryRow> history;
    double best_val_mrr = 0.0;
};

// Meta-training with Adam (lr_main on Theta and M, lr_adapter on Theta_A),
// periodic meta-test evaluation on the validation split, checkpoint on best
// validation MRR and early stopping.
TrainResult meta_train(const Dataset& data, const TrainConfig& cfg);

struct AdaptResult {
    model::ModelState state;  // differs from the input only in adapter parameters
    std::size_t steps_taken = 0;
    double final_loss = 0.0;
    double seconds = 0.0;
};

// Per-task adapter fine-tuning: clones the state, then Adam steps on the
// adapter parameters only until |delta loss| < adapt_tol (relative) or
// max_adapt_steps. Theta and M are provably untouched.
AdaptResult meta_test_adapt(const kg::Task& task, const kg::TripleStore& store,
                            const model::ModelState& state, const TrainConfig& cfg, Rng& rng);

struct Prediction {
    // per query triple, a score for every candidate entity (lower is better)
    std::vector<std::vector<double>> scores;
    num::Vector refined_meta;
};

Prediction predict(const kg::Task& task, const kg::TripleStore& store,
                   const model::ModelState& adapted, Rng& rng);

// All candidate entities sorted ascending by score, ties by ascending id.
std::vector<kg::EntityId> ranked_candidates(const std::vector<double>& scores);

// Samples one evaluation task per relation of the split; deterministic in
// (data, cfg, seed, salt).
std::vector<kg::Task> sample_eval_tasks(const Dataset& data,
                                        const std::vector<kg::RelationId>& split,
                                        const TrainConfig& cfg, std::uint64_t seed,
                                        std::string_view salt);

// Meta-test adapt + predict + rank for each task; micro-averaged metrics.
eval::MetricsReport evaluate(const std::vector<kg::Task>& tasks, const model::ModelState& state,
                             const Dataset& data, const TrainConfig& cfg, std::uint64_t seed);

// Table-3-style ablations over one seed. Full, FrozenAdapters and
// RandomInitAdapters share one meta-trained model; NoDiv and NoAdapters are
// retrained with their own objectives. Evaluation task sets are identical
// across modes.
std::vector<std::pair<AblationMode, eval::MetricsReport>> run_ablation(
    const Dataset& data, const TrainConfig& cfg, const std::vector<AblationMode>& modes);

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history);

} // namespace fskg::metalearn
