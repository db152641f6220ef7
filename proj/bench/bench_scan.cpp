// Serial vs. OpenMP timings for the two parallel kernels: the dipole table
// (radial integrals per shell pair) and the kappa scan (one propagation per point).

#include <sstream>

#include <benchmark/benchmark.h>

#include "rydberg/atomic.hpp"
#include "rydberg/scanner.hpp"

namespace {

using namespace rydberg;

Execution execution_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void BM_DipoleTable(benchmark::State& state) {
  const auto li = builtin_defect_model("Li");
  const auto basis = build_basis(li, {38, 0, 0}, 2, 5);
  for (auto _ : state) {
    auto table = dipole_table(basis, li, {}, execution_of(state));
    benchmark::DoNotOptimize(table.plus.data());
  }
  state.SetLabel(std::to_string(basis.size()) + " states");
}

void BM_NumericScan(benchmark::State& state) {
  std::istringstream cfg(
      "mode = single-atom-numeric\nelement = Rb\nn = 55\nD_um = 2.5\nn_window = 1\nl_max = 3\n"
      "kappa_min = 0.5\nkappa_max = 5\nkappa_count = 8\nauto_window = false\nhalf_window = 60\n");
  const auto job = parse_config(cfg, "bench");
  const auto ctx = ScanContext::build(job);
  for (auto _ : state) {
    auto result = run_scan(job, ctx, execution_of(state));
    benchmark::DoNotOptimize(result.records.data());
  }
  state.SetLabel(std::to_string(ctx.basis.size()) + " states, 8 points");
}

void BM_ManyBodyScan(benchmark::State& state) {
  std::istringstream cfg(
      "mode = many-body\nelement = Rb\nn = 55\nD_um = 2.5\natoms = 8\nR_at_over_D = 2\n"
      "kappa_min = 0.05\nkappa_max = 5\nkappa_count = 2000\n");
  const auto job = parse_config(cfg, "bench");
  const auto ctx = ScanContext::build(job);
  for (auto _ : state) {
    auto result = run_scan(job, ctx, execution_of(state));
    benchmark::DoNotOptimize(result.records.data());
  }
}

}  // namespace

// Arg 0: serial reference path, 1: OpenMP
BENCHMARK(BM_DipoleTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NumericScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ManyBodyScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
