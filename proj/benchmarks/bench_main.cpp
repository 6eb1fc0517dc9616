#include <benchmark/benchmark.h>

#include "lowgain/control.hpp"
#include "lowgain/paper.hpp"
#include "lowgain/ple.hpp"
#include "lowgain/sim.hpp"

using namespace lowgain;

namespace {

const model::Plant& plant() {
  static const model::Plant p = cli::paper_plant();
  return p;
}

void BM_SolverConstruct(benchmark::State& state) {
  for (auto _ : state) {
    ple::Solver s(plant().a(), plant().b());
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_SolverConstruct);

void BM_PleSolve(benchmark::State& state) {
  const ple::Solver s(plant().a(), plant().b(),
                      state.range(0) ? ple::Route::Kronecker : ple::Route::RepeatedEigenvalueMoments);
  double g = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.solve(g));
    g = g < 1.0 ? g * 1.07 : 0.01;
  }
}
BENCHMARK(BM_PleSolve)->Arg(0)->Arg(1)->ArgName("kronecker");

void BM_GainTableLookup(benchmark::State& state) {
  static const control::GainTable table(ple::Solver(plant().a(), plant().b()), 0.01, 2.0, 200);
  double g = 0.011;
  for (auto _ : state) {
    benchmark::DoNotOptimize(table.gain(g));
    g = g < 1.9 ? g * 1.013 : 0.011;
  }
}
BENCHMARK(BM_GainTableLookup);

void BM_DeltaC(benchmark::State& state) {
  const ple::Solver s(plant().a(), plant().b());
  const auto grid = ple::default_delta_c_grid(s);
  for (auto _ : state) benchmark::DoNotOptimize(ple::estimate_delta_c(s, grid));
}
BENCHMARK(BM_DeltaC)->Unit(benchmark::kMillisecond);

void BM_Integrate10s(benchmark::State& state) {
  const auto cfg = cli::paper_scenario({2, 1.2, 0.5}, 10.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sim::integrate_closed_loop(cfg.plant(), cfg.profile(), cfg.controller_mode(), cfg.sim_config()));
  }
}
BENCHMARK(BM_Integrate10s)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
