#include <benchmark/benchmark.h>

#include <random>

#include "qclt/kernels.hpp"

using namespace qclt;

namespace {

std::vector<double> probs(int K, double q) {
  std::vector<double> p(K + 1);
  for (int k = 0; k <= K; ++k) p[k] = (1.0 - q) * std::pow(q, k);
  return p;
}

struct RadialInput {
  std::vector<double> u, c;
  explicit RadialInput(std::size_t n) : u(n), c(n) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = 40.0 * d(rng);
      c[i] = d(rng);
    }
  }
};

void BM_BsTableSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::bs_table_serial(0.5, st.range(0)));
}
void BM_BsTableParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::bs_table_parallel(0.5, st.range(0)));
}

void BM_BsDiagSerial(benchmark::State& st) {
  int K = st.range(0);
  auto t = kernels::bs_table_serial(0.5, K);
  auto p = probs(K, 0.5), q = probs(K, 0.6);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::bs_apply_diag_serial(t, p, q, K));
}
void BM_BsDiagParallel(benchmark::State& st) {
  int K = st.range(0);
  auto t = kernels::bs_table_serial(0.5, K);
  auto p = probs(K, 0.5), q = probs(K, 0.6);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::bs_apply_diag_parallel(t, p, q, K));
}

void BM_RadialSerial(benchmark::State& st) {
  RadialInput in(4096);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::radial_invert_serial(in.u, in.c, st.range(0)));
}
void BM_RadialParallel(benchmark::State& st) {
  RadialInput in(4096);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::radial_invert_parallel(in.u, in.c, st.range(0)));
}

void BM_DenseSerial(benchmark::State& st) {
  int K = st.range(0);
  auto t = kernels::bs_table_serial(0.5, K);
  Matrix r = Matrix::Identity(K + 1, K + 1) / double(K + 1);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::bs_apply_dense_serial(t, r, r, K));
}
void BM_DenseParallel(benchmark::State& st) {
  int K = st.range(0);
  auto t = kernels::bs_table_serial(0.5, K);
  Matrix r = Matrix::Identity(K + 1, K + 1) / double(K + 1);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::bs_apply_dense_parallel(t, r, r, K));
}

}  // namespace

BENCHMARK(BM_BsTableSerial)->Arg(64)->Arg(192);
BENCHMARK(BM_BsTableParallel)->Arg(64)->Arg(192);
BENCHMARK(BM_BsDiagSerial)->Arg(64)->Arg(192);
BENCHMARK(BM_BsDiagParallel)->Arg(64)->Arg(192);
BENCHMARK(BM_RadialSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_RadialParallel)->Arg(256)->Arg(1024);
BENCHMARK(BM_DenseSerial)->Arg(16)->Arg(32);
BENCHMARK(BM_DenseParallel)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
