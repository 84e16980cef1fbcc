#include <benchmark/benchmark.h>

#include <cmath>

#include "smallgain/smallgain.hpp"

using namespace smallgain;

namespace {

ScalarMonotoneOde flagship_stage() {
  return ScalarMonotoneOde(ScalarFunction::affine(1.0, 0.0), ScalarFunction::affine(-1.0, 1.0), Interval{0.0, 1.0});
}

CascadeSpec flagship(double k) {
  CascadeSpec c;
  c.stages = {OdeStage{flagship_stage()}, DelayStage{0.5}, OdeStage{flagship_stage()}};
  c.feedback = Feedback{2.0, k, 0.5};
  return c;
}

void BM_SimulateClosed(benchmark::State& state) {
  const auto cascade = flagship(0.25);
  const SimConfig cfg{0.01, static_cast<double>(state.range(0))};
  const auto hist = constant_histories({0.2, 0.7});
  for (auto _ : state) benchmark::DoNotOptimize(simulate_closed(cascade, hist, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.steps()));
}
BENCHMARK(BM_SimulateClosed)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Ensemble(benchmark::State& state) {
  const auto cascade = flagship(0.25);
  const SimConfig cfg{0.01, 200.0, 1e-9, 7};
  for (auto _ : state) benchmark::DoNotOptimize(ensemble(cascade, cfg, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_Ensemble)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_StageGain(benchmark::State& state) {
  const auto stage = flagship_stage();
  const auto n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(stage_gain(stage, Interval{1.6, 2.0}, n));
}
BENCHMARK(BM_StageGain)->Arg(1001)->Arg(10001)->Unit(benchmark::kMillisecond);

void BM_Certify(benchmark::State& state) {
  const auto cascade = flagship(0.25);
  const auto mode = state.range(0) == 0 ? GainMode::global : GainMode::relative;
  for (auto _ : state) benchmark::DoNotOptimize(certify(cascade, mode));
}
BENCHMARK(BM_Certify)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_VerifyDecrease(benchmark::State& state) {
  const auto stage = flagship_stage();
  const auto v = DecreaseFunction::distance_to({0.6153846153846154, 0.6666666666666666});
  for (auto _ : state) benchmark::DoNotOptimize(verify_u_decrease(v, stage, {1.6, 2.0}));
}
BENCHMARK(BM_VerifyDecrease)->Unit(benchmark::kMillisecond);

void BM_Amplitude(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  std::vector<double> data(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) data[i * dim + j] = std::sin(0.01 * static_cast<double>(i) + j);
  }
  const Signal sig(0.0, 0.01, dim, std::move(data));
  for (auto _ : state) benchmark::DoNotOptimize(asymptotic_amplitude(sig));
}
BENCHMARK(BM_Amplitude)->Args({20001, 1})->Args({20001, 2})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
