// Serial vs OpenMP gemm kernels at the shapes the models produce
// (batch x features times features x units).
#include <vector>

#include <benchmark/benchmark.h>

#include "whitebait/kernels.hpp"
#include "whitebait/rng.hpp"

namespace {

using whitebait::kernels::Dims;

struct Operands {
  std::vector<double> a, b, c;
  Dims d;
};

Operands make(std::size_t m, std::size_t k, std::size_t n) {
  whitebait::Rng rng(1);
  Operands o{std::vector<double>(m * k), std::vector<double>(k * n), std::vector<double>(m * n), {m, k, n}};
  for (auto& x : o.a) x = rng.uniform(-1.0, 1.0);
  for (auto& x : o.b) x = rng.uniform(-1.0, 1.0);
  return o;
}

template <auto Kernel>
void run_matmul(benchmark::State& state) {
  auto o = make(state.range(0), state.range(1), state.range(2));
  for (auto _ : state) {
    Kernel(o.a, o.b, o.c, o.d);
    benchmark::DoNotOptimize(o.c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(o.d.m * o.d.k * o.d.n));
}

template <auto Kernel>
void run_at_b(benchmark::State& state) {
  // a[m,k]^T * g[m,n] -> c[k,n]
  const std::size_t m = state.range(0), k = state.range(1), n = state.range(2);
  auto o = make(m, k, n);
  std::vector<double> g(m * n, 0.5), c(k * n);
  for (auto _ : state) {
    Kernel(o.a, g, c, o.d);
    benchmark::DoNotOptimize(c.data());
  }
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({32, 100, 400})->Args({32, 200, 64})->Args({256, 100, 400})->Args({512, 512, 512});
}

}  // namespace

BENCHMARK(run_matmul<whitebait::kernels::serial::matmul>)->Name("matmul/serial")->Apply(shapes);
BENCHMARK(run_matmul<whitebait::kernels::parallel::matmul>)->Name("matmul/parallel")->Apply(shapes);
BENCHMARK(run_at_b<whitebait::kernels::serial::matmul_at_b_acc>)->Name("matmul_at_b/serial")->Apply(shapes);
BENCHMARK(run_at_b<whitebait::kernels::parallel::matmul_at_b_acc>)->Name("matmul_at_b/parallel")->Apply(shapes);

BENCHMARK_MAIN();
