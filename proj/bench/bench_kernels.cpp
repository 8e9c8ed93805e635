#include <benchmark/benchmark.h>
#include <omp.h>

#include "hom/hom_montecarlo.hpp"
#include "hom/overlap.hpp"

namespace {

hom::SourcePair demo_pair() {
  hom::SourcePair p;
  p.a.t1_ps = 162.0;
  p.b.t1_ps = 128.0;
  p.a.gamma_star = hom::Rate{0.17};
  p.b.gamma_star = hom::Rate{0.03};
  p.a.delta_omega = hom::Rate{4.6};
  p.b.delta_omega = hom::Rate{1.78};
  p.s_classical = 0.986;
  return p;
}

hom::Execution mode(const benchmark::State& state) {
  return state.range(0) ? hom::Execution::parallel : hom::Execution::serial;
}

void BM_SimulateHistogram(benchmark::State& state) {
  const auto pair = demo_pair();
  hom::HomExperimentConfig cfg;
  cfg.n_pulses = 1'000'000;
  for (auto _ : state) {
    auto h = hom::simulate_histogram(pair, cfg, hom::Polarization::parallel, 42, mode(state));
    benchmark::DoNotOptimize(h.counts.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.n_pulses));
  state.counters["threads"] = state.range(0) ? omp_get_max_threads() : 1;
}
BENCHMARK(BM_SimulateHistogram)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_MonteCarloOverlap(benchmark::State& state) {
  const auto pair = demo_pair();
  constexpr std::size_t kSamples = 4'000'000;
  for (auto _ : state) {
    auto est = hom::mwo_monte_carlo_average(pair, kSamples, 7, mode(state));
    benchmark::DoNotOptimize(est.mean);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kSamples));
  state.counters["threads"] = state.range(0) ? omp_get_max_threads() : 1;
}
BENCHMARK(BM_MonteCarloOverlap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_VoigtOverlap(benchmark::State& state) {
  const auto pair = demo_pair();
  for (auto _ : state) benchmark::DoNotOptimize(hom::mwo_voigt_averaged(pair));
}
BENCHMARK(BM_VoigtOverlap);

}  // namespace

BENCHMARK_MAIN();
