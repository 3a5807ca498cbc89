// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include <vector>

#include "orchard/demo.hpp"
#include "orchard/focus.hpp"
#include "orchard/metrics.hpp"
#include "orchard/random.hpp"
#include "orchard/serial.hpp"
#include "orchard/trainer.hpp"

using namespace orchard;

namespace {

Tensor3 image(std::size_t side) {
    Rng rng(1);
    Tensor3 t(side, side, 3);
    for (double& v : t.data()) {
        v = rng.uniform();
    }
    return t;
}

std::vector<Scene> scenes(std::size_t count) {
    Rng rng(2);
    std::vector<Scene> out(count);
    for (auto& s : out) {
        for (int k = 0; k < 40; ++k) {
            const double x = rng.uniform(0, 600), y = rng.uniform(0, 600);
            s.ground_truth.push_back({{x, y, x + 30, y + 30}, 0});
            const double j = rng.uniform(-8, 8);
            s.predictions.push_back({{x + j, y + j, x + 30 + j, y + 30 + j}, 0, rng.uniform()});
            s.predictions.push_back({{x - j, y, x + 30 - j, y + 30}, 0, rng.uniform()});
        }
    }
    return out;
}

struct TrainerCase {
    std::vector<LabeledSample> data;
    std::vector<std::vector<double>> teacher_logits;
    ToyNet student;
};

TrainerCase trainer_case() {
    Rng rng(3);
    TrainerCase c;
    c.data = make_blobs(512, 1.5, 1.0, rng);
    const DemoSetup setup;
    c.teacher_logits = batch_logits(ToyNet::initialized(setup.teacher_layers, 4), c.data);
    c.student = ToyNet::initialized(std::vector<std::size_t>{2, 16, 2}, 5);
    return c;
}

void BM_FocusSliceParallel(benchmark::State& state) {
    const auto x = image(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(focus_slice(x));
    }
}

void BM_FocusSliceSerial(benchmark::State& state) {
    const auto x = image(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(serial::focus_slice(x));
    }
}

void BM_EvaluateParallel(benchmark::State& state) {
    const auto s = scenes(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_dataset(s, 0.15, 0.5));
    }
}

void BM_EvaluateSerial(benchmark::State& state) {
    const auto s = scenes(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(serial::evaluate_dataset(s, 0.15, 0.5));
    }
}

void BM_DistillObjectiveParallel(benchmark::State& state) {
    const auto c = trainer_case();
    const DistillConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(distill_objective(c.student, c.teacher_logits, c.data, cfg));
    }
}

void BM_DistillObjectiveSerial(benchmark::State& state) {
    const auto c = trainer_case();
    const DistillConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            serial::distill_objective(c.student, c.teacher_logits, c.data, cfg));
    }
}

}  // namespace

BENCHMARK(BM_FocusSliceParallel)->Arg(608)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FocusSliceSerial)->Arg(608)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EvaluateParallel)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EvaluateSerial)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DistillObjectiveParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DistillObjectiveSerial)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
