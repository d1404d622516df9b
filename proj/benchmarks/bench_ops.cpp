// Microbenchmarks of the hot paths at a reduced resolution (K = 10 gives
// 1024 cells on the default box; the acceptance suite runs at 4096).

#include <benchmark/benchmark.h>

#include "sqlab/cone.hpp"
#include "sqlab/estimator.hpp"
#include "sqlab/sparse.hpp"

using namespace sqlab;

namespace {

Signal bench_signal(int K) { return random_signal(1, -1, K, 12345); }

Field bench_field(int K, int levels) {
  Signal f = bench_signal(K);
  return conv_field(f, KernelSpec::make(KernelId::haar), TGrid::spanning(f, levels));
}

void BM_conv_direct(benchmark::State& state) {
  Signal f = bench_signal(static_cast<int>(state.range(0)));
  TGrid tg = TGrid::spanning(f, 16);
  KernelSpec k = KernelSpec::make(KernelId::haar);
  for (auto _ : state)
    benchmark::DoNotOptimize(conv_field(f, k, tg, ConvMethod::direct));
}
BENCHMARK(BM_conv_direct)->Arg(8)->Arg(10);

void BM_conv_fft(benchmark::State& state) {
  Signal f = bench_signal(static_cast<int>(state.range(0)));
  TGrid tg = TGrid::spanning(f, 16);
  KernelSpec k = KernelSpec::make(KernelId::haar);
  for (auto _ : state)
    benchmark::DoNotOptimize(conv_field(f, k, tg, ConvMethod::fft));
}
BENCHMARK(BM_conv_fft)->Arg(8)->Arg(10)->Arg(12);

void BM_cone_square(benchmark::State& state) {
  Field F = bench_field(10, 32);
  const double alpha = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cone_square(F, alpha));
}
BENCHMARK(BM_cone_square)->Arg(1)->Arg(4);

void BM_smooth_square(benchmark::State& state) {
  Field F = bench_field(10, 32);
  BumpSpec bump = BumpSpec::standard();
  for (auto _ : state) benchmark::DoNotOptimize(smooth_square(F, bump, 1.0));
}
BENCHMARK(BM_smooth_square);

void BM_gstar(benchmark::State& state) {
  Field F = bench_field(10, 32);
  for (auto _ : state) benchmark::DoNotOptimize(gstar(F, 3.0));
}
BENCHMARK(BM_gstar);

void BM_hl_maximal(benchmark::State& state) {
  Signal f = bench_signal(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hl_maximal(f));
}
BENCHMARK(BM_hl_maximal)->Arg(10)->Arg(12);

void BM_lmo_decompose(benchmark::State& state) {
  Signal f = bench_signal(static_cast<int>(state.range(0)));
  Cube root;
  root.n = 1;
  root.level = 1;
  root.idx[0] = 0;
  for (auto _ : state) benchmark::DoNotOptimize(lmo_decompose(f, root));
}
BENCHMARK(BM_lmo_decompose)->Arg(8)->Arg(10);

void BM_ap_char_all(benchmark::State& state) {
  Weight w = random_weight(1, -1, static_cast<int>(state.range(0)), 777);
  for (auto _ : state) benchmark::DoNotOptimize(ap_char(w, 2.0, ApScope::all));
}
BENCHMARK(BM_ap_char_all)->Arg(8)->Arg(10);

void BM_sparse_square(benchmark::State& state) {
  Signal f = bench_signal(10);
  Cube root;
  root.n = 1;
  root.level = 1;
  root.idx[0] = 0;
  SparseFamily S = random_family(root, 10, 5);
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sparse_square(S, f, m));
}
BENCHMARK(BM_sparse_square)->Arg(0)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
