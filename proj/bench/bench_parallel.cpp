// Serial reference vs OpenMP versions of the data-parallel kernels.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "accel/algorithms.hpp"
#include "accel/harness.hpp"
#include "accel/operators.hpp"
#include "accel/problems.hpp"

namespace {

const accel::LassoProblem& lasso() {
  static const accel::LassoProblem problem = accel::gen_lasso(accel::LassoOptions{});
  return problem;
}

void BM_SweepSerial(benchmark::State& state) {
  const int resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(accel::sweep_spectrum_serial(resolution));
  state.SetItemsProcessed(state.iterations() * resolution * (resolution + 1) / 2);
}

void BM_SweepParallel(benchmark::State& state) {
  const int resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(accel::sweep_spectrum(resolution));
  state.SetItemsProcessed(state.iterations() * resolution * (resolution + 1) / 2);
}

void BM_SuiteSerial(benchmark::State& state) {
  const auto budget = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        accel::compare_suite_serial(accel::ProblemSpec{}, accel::AlgorithmKind::ProxGrad, budget));
  }
}

void BM_SuiteParallel(benchmark::State& state) {
  const auto budget = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        accel::compare_suite(accel::ProblemSpec{}, accel::AlgorithmKind::ProxGrad, budget));
  }
}

void BM_AveragednessSerial(benchmark::State& state) {
  const auto T = accel::make_prox_grad_operator(lasso());
  const auto samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(accel::check_averagedness_serial(T, samples));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_AveragednessParallel(benchmark::State& state) {
  const auto T = accel::make_prox_grad_operator(lasso());
  const auto samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(accel::check_averagedness(T, samples));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuiteSerial)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuiteParallel)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AveragednessSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AveragednessParallel)->Arg(200)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
