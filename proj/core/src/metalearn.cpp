#include "fskg/metalearn/metalearn.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <thread>

#include "fskg/num/ops.hpp"

namespace fskg::metalearn {

AblationMode ablation_from_name(const std::string& name) {
    if (name == "full") return AblationMode::Full;
    if (name == "no_div") return AblationMode::NoDiv;
    if (name == "no_adapters") return AblationMode::NoAdapters;
    if (name == "frozen_adapters") return AblationMode::FrozenAdapters;
    if (name == "random_init_adapters") return AblationMode::RandomInitAdapters;
    throw ConfigError("unknown ablation mode '" + name + "'");
}

const char* ablation_name(AblationMode m) {
    switch (m) {
    case AblationMode::Full: return "full";
    case AblationMode::NoDiv: return "no_div";
    case AblationMode::NoAdapters: return "no_adapters";
    case AblationMode::FrozenAdapters: return "frozen_adapters";
    default: return "random_init_adapters";
    }
}

model::Hyper TrainConfig::hyper() const {
    model::Hyper h;
    h.alpha = ablation == AblationMode::NoDiv ? 0.0 : alpha;
    h.gamma = gamma;
    h.epsilon = epsilon;
    h.beta = beta;
    h.m = m;
    h.lr_main = lr_main;
    h.lr_adapter = lr_adapter;
    h.refine_steps = refine_steps;
    h.first_order = first_order;
    h.n_neg = n_neg;
    return h;
}

std::vector<kg::Task> sample_eval_tasks(const Dataset& data,
                                        const std::vector<kg::RelationId>& split,
                                        const TrainConfig& cfg, std::uint64_t seed,
                                        std::string_view salt) {
    std::vector<kg::Task> tasks;
    tasks.reserve(split.size());
    for (kg::RelationId rel : split) {
        Rng rng = Rng::stream(seed, salt, static_cast<std::uint64_t>(rel));
        tasks.push_back(kg::sample_task(data.store, rel, cfg.k, cfg.eval_n_query, rng));
    }
    return tasks;
}

AdaptResult meta_test_adapt(const kg::Task& task, const kg::TripleStore& store,
                            const model::ModelState& state, const TrainConfig& cfg, Rng& rng) {
    const auto t0 = std::chrono::steady_clock::now();
    AdaptResult result{state, 0, 0.0, 0.0};

    num::Adam adam(result.state.params, result.state.params.ids_in_group(num::ParamGroup::Adapter));

    double prev_loss = 0.0;
    bool have_loss = false;
    for (std::size_t step = 1; step <= cfg.max_adapt_steps; ++step) {
        model::GradTape tape(result.state.params);
        const auto res = objective::meta_test_objective(tape, task, result.state, store, rng);
        result.final_loss = res.breakdown.total;
        if (have_loss && std::abs(res.breakdown.total - prev_loss) <
                             cfg.adapt_tol * std::max(1.0, std::abs(prev_loss))) {
            break;  // converged; the last update already landed
        }
        prev_loss = res.breakdown.total;
        have_loss = true;
        const num::GradMap grads = tape.backward(res.total);
        adam.step(result.state.params, grads, cfg.lr_adapter);
        result.steps_taken = step;
    }
    if (cfg.max_adapt_steps == 0) {
        model::GradTape tape(result.state.params);
        Rng probe = rng;
        const auto res = objective::meta_test_objective(tape, task, result.state, store, probe);
        result.final_loss = res.breakdown.total;
    }

    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

Prediction predict(const kg::Task& task, const kg::TripleStore& store,
                   const model::ModelState& adapted, Rng& rng) {
    if (task.support.empty()) throw ContractError("predict: empty support set");

    // refined relation meta from the support set
    model::GradTape tape(adapted.params);
    objective::EntityNodeCache cache(tape, adapted);
    std::vector<std::pair<model::NodeId, model::NodeId>> pairs;
    std::vector<model::NodeId> sup_h, sup_t, sup_neg;
    for (const kg::Triple& t : task.support) {
        pairs.emplace_back(cache.fused(t.head), cache.fused(t.tail));
    }
    const model::NodeId r_meta = adapted.relation_meta(tape, pairs);
    for (const kg::Triple& t : task.support) {
        sup_h.push_back(cache.fused(t.head));
        sup_t.push_back(cache.fused(t.tail));
        sup_neg.push_back(cache.fused(kg::sample_negative(store, t.head, t.rel, rng)));
    }
    const model::NodeId refined = adapted.refine_relation_meta(tape, r_meta, sup_h, sup_t, sup_neg);

    Prediction pred;
    pred.refined_meta = tape.value(refined);

    // fused embeddings of every candidate, computed once
    const std::size_t n = adapted.n_entities;
    std::vector<num::Vector> fused(n);
    for (std::size_t e = 0; e < n; ++e) {
        fused[e] = adapted.fused_value(static_cast<kg::EntityId>(e));
    }

    pred.scores.reserve(task.query.size());
    for (const kg::Triple& q : task.query) {
        num::Vector translated = fused[static_cast<std::size_t>(q.head)];
        for (std::size_t i = 0; i < translated.size(); ++i) translated[i] += pred.refined_meta[i];
        std::vector<double> scores(n);
        for (std::size_t e = 0; e < n; ++e) scores[e] = num::l2_distance(translated, fused[e]);
        pred.scores.push_back(std::move(scores));
    }
    return pred;
}

std::vector<kg::EntityId> ranked_candidates(const std::vector<double>& scores) {
    std::vector<kg::EntityId> order(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) order[i] = static_cast<kg::EntityId>(i);
    std::sort(order.begin(), order.end(), [&](kg::EntityId a, kg::EntityId b) {
        const double sa = scores[static_cast<std::size_t>(a)];
        const double sb = scores[static_cast<std::size_t>(b)];
        return sa < sb || (sa == sb && a < b);
    });
    return order;
}

namespace {

struct TaskRanks {
    std::vector<eval::RankRecord> filtered;
    std::vector<eval::RankRecord> raw;
};

TaskRanks evaluate_task(const kg::Task& task, const model::ModelState& state, const Dataset& data,
                        const TrainConfig& cfg, std::uint64_t seed, std::size_t task_index) {
    const bool adapt = state.use_adapters && cfg.ablation != AblationMode::FrozenAdapters &&
                       cfg.max_adapt_steps > 0;

    Rng adapt_rng = Rng::stream(seed, "adapt", task_index);
    const model::ModelState* eval_state = &state;
    std::optional<AdaptResult> adapted;
    if (adapt) {
        adapted = meta_test_adapt(task, data.store, state, cfg, adapt_rng);
        eval_state = &adapted->state;
    }

    Rng predict_rng = Rng::stream(seed, "predict", task_index);
    const Prediction pred = predict(task, data.store, *eval_state, predict_rng);

    TaskRanks ranks;
    for (std::size_t qi = 0; qi < task.query.size(); ++qi) {
        const kg::Triple& q = task.query[qi];
        const auto& known = data.store.true_tails(q.head, q.rel);
        ranks.filtered.push_back(
            eval::rank_true_tail(pred.scores[qi], q, known, eval::RankMode::Filtered));
        ranks.raw.push_back(eval::rank_true_tail(pred.scores[qi], q, known, eval::RankMode::Raw));
    }
    return ranks;
}

} // namespace

eval::MetricsReport evaluate(const std::vector<kg::Task>& tasks, const model::ModelState& state,
                             const Dataset& data, const TrainConfig& cfg, std::uint64_t seed) {
    std::vector<TaskRanks> per_task(tasks.size());

    const std::size_t n_threads = std::max<std::size_t>(1, cfg.threads);
    if (n_threads == 1 || tasks.size() <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            per_task[i] = evaluate_task(tasks[i], state, data, cfg, seed, i);
        }
    } else {
        // tasks are independent; results are identical for any thread count
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < std::min(n_threads, tasks.size()); ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    per_task[i] = evaluate_task(tasks[i], state, data, cfg, seed, i);
                }
            });
        }
        for (auto& t : workers) t.join();
    }

    eval::MetricsReport report;
    report.seeds = {seed};
    std::vector<eval::RankRecord> all_filtered, all_raw;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const TaskRanks& tr = per_task[i];
        all_filtered.insert(all_filtered.end(), tr.filtered.begin(), tr.filtered.end());
        all_raw.insert(all_raw.end(), tr.raw.begin(), tr.raw.end());
        eval::RelationBlock rb;
        rb.relation = data.store.relation_name(tasks[i].rel);
        rb.n_queries = tr.filtered.size();
        rb.filtered = eval::metric_block(tr.filtered);
        rb.raw = eval::metric_block(tr.raw);
        report.per_relation.push_back(std::move(rb));
    }
    report.n_queries = all_filtered.size();
    report.metrics = eval::metric_block(all_filtered);
    report.metrics_raw = eval::metric_block(all_raw);
    return report;
}

TrainResult meta_train(const Dataset& data, const TrainConfig& cfg) {
    if (data.splits.train.empty()) throw ConfigError("meta_train: empty training split");

    Rng init_rng = Rng::stream(cfg.seed, "init");
    model::ModelState state(data.embeddings, cfg.hyper(),
                            cfg.ablation != AblationMode::NoAdapters, init_rng);

    num::Adam adam_main(state.params, [&] {
        auto ids = state.params.ids_in_group(num::ParamGroup::Embeddings);
        const auto meta = state.params.ids_in_group(num::ParamGroup::Meta);
        ids.insert(ids.end(), meta.begin(), meta.end());
        return ids;
    }());
    num::Adam adam_adapter(state.params, state.params.ids_in_group(num::ParamGroup::Adapter));

    // one batch of sampled tasks per epoch
    const std::size_t per_task = cfg.n_query * (1 + cfg.n_neg);
    const std::size_t tasks_per_batch = std::max<std::size_t>(1, cfg.batch_size / per_task);

    Rng train_rng = Rng::stream(cfg.seed, "train");

    TrainResult result{state, {}, -1.0};
    std::size_t stale = 0;
    double loss_accum = 0.0;
    std::size_t loss_count = 0;
    bool stopped = false;
    std::size_t n_evals = 0;

    auto run_eval = [&](std::size_t epoch) {
        const auto tasks = sample_eval_tasks(data, data.splits.valid, cfg, cfg.seed, "eval-valid");
        const auto report = evaluate(tasks, state, data, cfg, cfg.seed);
        const double val_mrr = report.metrics.mrr;
        result.history.push_back(
            {epoch, loss_count ? loss_accum / static_cast<double>(loss_count) : 0.0, val_mrr});
        loss_accum = 0.0;
        loss_count = 0;
        ++n_evals;
        if (val_mrr > result.best_val_mrr) {
            result.best_val_mrr = val_mrr;
            result.state = state;
            stale = 0;
        } else {
            ++stale;
        }
        if (cfg.patience == 0 || stale >= cfg.patience) stopped = true;
    };

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs && !stopped; ++epoch) {
        num::GradMap batch_grads(state.params);
        double batch_loss = 0.0;
        for (std::size_t t = 0; t < tasks_per_batch; ++t) {
            const kg::RelationId rel =
                data.splits.train[train_rng.uniform_index(data.splits.train.size())];
            const kg::Task task = kg::sample_task(data.store, rel, cfg.k, cfg.n_query, train_rng);
            model::GradTape tape(state.params);
            const auto res = objective::meta_train_objective(tape, task, state, data.store, train_rng);
            if (!std::isfinite(res.breakdown.total)) {
                throw TrainingError("meta_train: loss diverged at epoch " + std::to_string(epoch));
            }
            batch_loss += res.breakdown.total;
            batch_grads.add(tape.backward(res.total));
        }
        batch_grads.scale(1.0 / static_cast<double>(tasks_per_batch));
        adam_main.step(state.params, batch_grads, cfg.lr_main);
        if (state.use_adapters) adam_adapter.step(state.params, batch_grads, cfg.lr_adapter);

        loss_accum += batch_loss / static_cast<double>(tasks_per_batch);
        ++loss_count;

        if (epoch % cfg.eval_every == 0) run_eval(epoch);
    }
    if (n_evals == 0) run_eval(cfg.max_epochs);

    return result;
}

std::vector<std::pair<AblationMode, eval::MetricsReport>> run_ablation(
    const Dataset& data, const TrainConfig& cfg, const std::vector<AblationMode>& modes) {
    if (modes.empty()) throw ConfigError("run_ablation: no modes requested");

    const auto eval_tasks = sample_eval_tasks(data, data.splits.test, cfg, cfg.seed, "eval-test");

    // Full, FrozenAdapters and RandomInitAdapters share one trained model
    std::optional<TrainResult> full_train;
    auto full_model = [&]() -> const model::ModelState& {
        if (!full_train) {
            TrainConfig c = cfg;
            c.ablation = AblationMode::Full;
            full_train = meta_train(data, c);
        }
        return full_train->state;
    };

    std::vector<std::pair<AblationMode, eval::MetricsReport>> out;
    for (AblationMode mode : modes) {
        TrainConfig c = cfg;
        c.ablation = mode;
        switch (mode) {
        case AblationMode::Full:
        case AblationMode::FrozenAdapters: {
            out.emplace_back(mode, evaluate(eval_tasks, full_model(), data, c, cfg.seed));
            break;
        }
        case AblationMode::RandomInitAdapters: {
            model::ModelState st = full_model();
            Rng reinit = Rng::stream(cfg.seed, "reinit-adapters");
            st.reinit_adapters(reinit);
            out.emplace_back(mode, evaluate(eval_tasks, st, data, c, cfg.seed));
            break;
        }
        case AblationMode::NoDiv:
        case AblationMode::NoAdapters: {
            const TrainResult tr = meta_train(data, c);
            out.emplace_back(mode, evaluate(eval_tasks, tr.state, data, c, cfg.seed));
            break;
        }
        }
    }
    return out;
}

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write history: " + path);
    out.precision(17);
    out << "epoch,train_loss,val_mrr\n";
    for (const HistoryRow& row : history) {
        out << row.epoch << ',' << row.train_loss << ',' << row.val_mrr << '\n';
    }
}

} // namespace fskg::metalearn
