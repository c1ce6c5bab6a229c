// Micro-benchmarks for the numeric kernels and the per-task objective.

#include <benchmark/benchmark.h>

#include "fskg/kg/synthetic.hpp"
#include "fskg/metalearn/metalearn.hpp"
#include "fskg/num/ops.hpp"
#include "fskg/objective/objective.hpp"

using namespace fskg;

namespace {

num::Vector random_vector(std::size_t n, Rng& rng) {
    num::Vector v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

void BM_linear_forward(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    num::Matrix w(d, d);
    for (double& x : w.data) x = rng.normal();
    const num::Vector x = random_vector(d, rng);
    const num::Vector b = random_vector(d, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(num::linear_forward(x, w, b));
    }
}
BENCHMARK(BM_linear_forward)->Arg(16)->Arg(64)->Arg(256);

void BM_cosine_similarity(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    const num::Vector u = random_vector(d, rng);
    const num::Vector v = random_vector(d, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(num::cosine_similarity(u, v));
    }
}
BENCHMARK(BM_cosine_similarity)->Arg(16)->Arg(256);

struct TaskFixture {
    kg::SyntheticData data;
    model::ModelState state;
    kg::Task task;

    static TaskFixture make() {
        kg::SyntheticConfig scfg;
        scfg.n_entities = 200;
        scfg.n_relations = 20;
        scfg.triples_per_relation = 30;
        kg::SyntheticData data = kg::generate_synthetic(scfg);
        model::Hyper hyper;
        hyper.m = 16;
        Rng init = Rng::stream(1, "init");
        model::ModelState state(data.embeddings, hyper, true, init);
        Rng task_rng(1);
        kg::Task task = kg::sample_task(data.store, 0, 5, 3, task_rng);
        return {std::move(data), std::move(state), std::move(task)};
    }
};

void BM_meta_train_objective(benchmark::State& state) {
    const TaskFixture fx = TaskFixture::make();
    for (auto _ : state) {
        model::GradTape tape(fx.state.params);
        Rng rng(7);
        const auto res =
            objective::meta_train_objective(tape, fx.task, fx.state, fx.data.store, rng);
        benchmark::DoNotOptimize(res.breakdown.total);
    }
}
BENCHMARK(BM_meta_train_objective);

void BM_objective_backward(benchmark::State& state) {
    const TaskFixture fx = TaskFixture::make();
    for (auto _ : state) {
        model::GradTape tape(fx.state.params);
        Rng rng(7);
        const auto res =
            objective::meta_train_objective(tape, fx.task, fx.state, fx.data.store, rng);
        benchmark::DoNotOptimize(tape.backward(res.total));
    }
}
BENCHMARK(BM_objective_backward);

void BM_predict_full_candidates(benchmark::State& state) {
    const TaskFixture fx = TaskFixture::make();
    for (auto _ : state) {
        Rng rng(7);
        benchmark::DoNotOptimize(metalearn::predict(fx.task, fx.data.store, fx.state, rng));
    }
}
BENCHMARK(BM_predict_full_candidates);

} // namespace

BENCHMARK_MAIN();
