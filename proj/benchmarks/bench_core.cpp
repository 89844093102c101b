#include <benchmark/benchmark.h>

#include "dsslat/response.hpp"
#include "dsslat/simulator.hpp"
#include "dsslat/storage_model.hpp"
#include "dsslat/workload.hpp"

using namespace dsslat;

namespace {

SystemConfig two_class() {
  SystemConfig sys;
  sys.arrival_rate = 0.7;
  sys.availability = 0.8;
  sys.classes = {
      FileClass{"hot", 0.7, 3, 1, make_shifted(0.2, make_hyperexp(0.8, 2.0))},
      FileClass{"cold", 0.3, 4, 2, make_shifted(0.2, make_hyperexp(0.3, 2.0))},
  };
  return sys;
}

}  // namespace

static void BM_SelectionKernel(benchmark::State& state) {
  const int j = static_cast<int>(state.range(0));
  double fbar = 0.37;
  for (auto _ : state) {
    benchmark::DoNotOptimize(selection_kernel(j, (j + 1) / 2, fbar));
  }
}
BENCHMARK(BM_SelectionKernel)->Arg(3)->Arg(6)->Arg(9);

// Grid cost scaling: the fast solver is linear in the point count, the
// reference solver quadratic. range(0) = points per unit time.
static void BM_WorkloadDde(benchmark::State& state) {
  SolveOptions opt;
  opt.step = 1.0 / static_cast<double>(state.range(0));
  opt.eps_tail = 1e-6;
  const SystemConfig sys = two_class();
  std::size_t points = 0;
  for (auto _ : state) {
    WorkloadCurve curve = solve_workload_dde(sys, opt);
    points = curve.values.size();
    benchmark::DoNotOptimize(curve.values.data());
  }
  state.counters["grid_points"] = static_cast<double>(points);
}
BENCHMARK(BM_WorkloadDde)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_WorkloadIde(benchmark::State& state) {
  SolveOptions opt;
  opt.step = 1.0 / static_cast<double>(state.range(0));
  opt.eps_tail = 1e-6;
  const SystemConfig sys = two_class();
  std::size_t points = 0;
  for (auto _ : state) {
    WorkloadCurve curve = solve_workload_ide(sys, opt);
    points = curve.values.size();
    benchmark::DoNotOptimize(curve.values.data());
  }
  state.counters["grid_points"] = static_cast<double>(points);
}
BENCHMARK(BM_WorkloadIde)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_ResponseConvolution(benchmark::State& state) {
  const SystemConfig sys = two_class();
  SolveOptions opt;
  opt.step = 1.0 / static_cast<double>(state.range(0));
  opt.eps_tail = 1e-6;
  const WorkloadCurve curve = solve_workload_dde(sys, opt);
  for (auto _ : state) {
    ResponseCurve r = class_response_ccdf(curve, sys.classes[1], 0.8);
    benchmark::DoNotOptimize(r.values.data());
  }
}
BENCHMARK(BM_ResponseConvolution)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_SimulatorArrivals(benchmark::State& state) {
  SimConfig cfg;
  cfg.system = two_class();
  cfg.servers = 100;
  cfg.arrivals = static_cast<std::uint64_t>(state.range(0));
  cfg.replications = 1;
  cfg.warmup_fraction = 0.0;
  cfg.seed = 1;
  for (auto _ : state) {
    SimReport report = simulate(cfg);
    benchmark::DoNotOptimize(report.busy_fraction);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(cfg.arrivals));
}
BENCHMARK(BM_SimulatorArrivals)->Arg(20'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
