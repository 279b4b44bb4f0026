#include <benchmark/benchmark.h>

#include "dsm/asymptotics.hpp"
#include "dsm/continuation.hpp"
#include "dsm/linear_analysis.hpp"
#include "dsm/pde_solver.hpp"

namespace {

const dsm::MotilityModel kLogistic = dsm::MotilityModel::logistic(8.0, 1.0);

void BM_ScanModes(benchmark::State& state) {
  const dsm::ModelParams p{1.0, 0.32, 20.0};
  for (auto _ : state) benchmark::DoNotOptimize(dsm::scan_modes(p, kLogistic));
}
BENCHMARK(BM_ScanModes);

void BM_Expansion(benchmark::State& state) {
  const dsm::ModelParams p{1.0, 0.0, 20.0};
  const auto summary = dsm::scan_modes(p, kLogistic);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dsm::expansion_coefficients(6, p, kLogistic, summary));
  }
}
BENCHMARK(BM_Expansion);

void BM_Step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const dsm::ModelParams p{1.0, 0.32, 20.0};
  const auto e = dsm::expansion_coefficients(6, p, kLogistic);
  auto f = dsm::evaluate_approximate_steady_state(e, 0.01, n);
  const double dt = dsm::stable_time_step(f, kLogistic);
  for (auto _ : state) {
    auto r = dsm::step(f, p, kLogistic, dt);
    benchmark::DoNotOptimize(r.field.u.data());
  }
  state.SetItemsProcessed(state.iterations() * (n + 1));
}
BENCHMARK(BM_Step)->Arg(256)->Arg(512)->Arg(2048);

void BM_NewtonSteady(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const dsm::ModelParams p0{1.0, 0.0, 20.0};
  const auto e = dsm::expansion_coefficients(6, p0, kLogistic);
  dsm::ModelParams p = p0;
  p.sigma = e.sigma0 - 0.01;
  const auto init = dsm::evaluate_approximate_steady_state(e, dsm::epsilon_for_sigma(e, p.sigma), n);
  for (auto _ : state) benchmark::DoNotOptimize(dsm::newton_steady(init, p, kLogistic));
}
BENCHMARK(BM_NewtonSteady)->Arg(256)->Arg(512);

void BM_TraceBranch(benchmark::State& state) {
  const dsm::ModelParams p{1.0, 0.0, 20.0};
  dsm::ContinuationOptions opts;
  opts.n = 256;
  for (auto _ : state) benchmark::DoNotOptimize(dsm::trace_branch(6, p, kLogistic, 0.3, 1e-3, opts));
}
BENCHMARK(BM_TraceBranch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
