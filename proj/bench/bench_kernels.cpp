// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "hogsvd/analysis.hpp"
#include "hogsvd/hogsvd.hpp"
#include "hogsvd/reference.hpp"

namespace {

hogsvd::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  hogsvd::Matrix m(rows, cols);
  for (double& x : m.data()) x = u(rng);
  return m;
}

hogsvd::MatrixSet random_set(std::size_t blocks, std::size_t rows, std::size_t n) {
  std::vector<hogsvd::Matrix> a;
  for (std::size_t i = 0; i < blocks; ++i) a.push_back(random_matrix(rows, n, 100 + i));
  return hogsvd::MatrixSet(std::move(a));
}

void BM_MatmulParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1);
  const auto b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}

void BM_MatmulSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1);
  const auto b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(hogsvd::reference::matmul(a, b));
}

void BM_TPiParallel(benchmark::State& state) {
  const auto set = random_set(6, 60, static_cast<std::size_t>(state.range(0)));
  const hogsvd::OrthoSet q(hogsvd::stack_and_qr(set).q, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(hogsvd::build_t_pi(q));
}

void BM_TPiSerial(benchmark::State& state) {
  const auto set = random_set(6, 60, static_cast<std::size_t>(state.range(0)));
  const hogsvd::OrthoSet q(hogsvd::stack_and_qr(set).q, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(hogsvd::reference::build_t_pi(q));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto set = random_set(4, 30, static_cast<std::size_t>(state.range(0)));
  const auto grid = hogsvd::make_log_grid(1e-3, 1e3, 32);
  for (auto _ : state) benchmark::DoNotOptimize(hogsvd::pi_sweep(set, grid));
}

void BM_SweepSerial(benchmark::State& state) {
  const auto set = random_set(4, 30, static_cast<std::size_t>(state.range(0)));
  const auto grid = hogsvd::make_log_grid(1e-3, 1e3, 32);
  for (auto _ : state) benchmark::DoNotOptimize(hogsvd::reference::pi_sweep(set, grid));
}

}  // namespace

BENCHMARK(BM_MatmulParallel)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_MatmulSerial)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_TPiParallel)->Arg(10)->Arg(30);
BENCHMARK(BM_TPiSerial)->Arg(10)->Arg(30);
BENCHMARK(BM_SweepParallel)->Arg(8)->Arg(16);
BENCHMARK(BM_SweepSerial)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
