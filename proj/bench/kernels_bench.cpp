// Parallel kernels against the serial reference, plus the small-divisor scan.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "komatsu/diophantine.hpp"
#include "komatsu/kernels.hpp"
#include "komatsu/solver.hpp"
#include "komatsu/transform.hpp"

namespace {

using namespace komatsu;

std::vector<cplx> random_values(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<cplx> v(n);
  for (auto& x : v) x = cplx(d(rng), d(rng));
  return v;
}

template <bool Parallel>
void BM_analyze(benchmark::State& state) {
  const auto group = state.range(0) == 0 ? GroupKind::Torus : GroupKind::SU2;
  const int band = static_cast<int>(state.range(1));
  const int batch = static_cast<int>(state.range(2));
  const GridPtr grid = shared_grid(group, band);
  const Basis basis(group, band);
  const auto in = random_values(static_cast<std::size_t>(grid->size()) * batch, 1);
  std::vector<cplx> out(static_cast<std::size_t>(basis.size()) * batch);
  for (auto _ : state) {
    if constexpr (Parallel) {
      parallel::analyze(*grid, basis, in.data(), batch, out.data());
    } else {
      reference::analyze(*grid, basis, in.data(), batch, out.data());
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_synthesize(benchmark::State& state) {
  const auto group = state.range(0) == 0 ? GroupKind::Torus : GroupKind::SU2;
  const int band = static_cast<int>(state.range(1));
  const int batch = static_cast<int>(state.range(2));
  const GridPtr grid = shared_grid(group, band);
  const Basis basis(group, band);
  const auto coef = random_values(static_cast<std::size_t>(basis.size()) * batch, 2);
  std::vector<cplx> out(static_cast<std::size_t>(grid->size()) * batch);
  for (auto _ : state) {
    if constexpr (Parallel) {
      parallel::synthesize(*grid, basis, coef.data(), batch, out.data());
    } else {
      reference::synthesize(*grid, basis, coef.data(), batch, out.data());
    }
    benchmark::DoNotOptimize(out.data());
  }
}

void kernel_args(benchmark::internal::Benchmark* b) {
  b->Args({0, 16, 8})->Args({1, 4, 4})->Args({1, 6, 4})->Unit(benchmark::kMillisecond);
}

BENCHMARK(BM_analyze<true>)->Name("analyze/parallel")->Apply(kernel_args);
BENCHMARK(BM_analyze<false>)->Name("analyze/reference")->Apply(kernel_args);
BENCHMARK(BM_synthesize<true>)->Name("synthesize/parallel")->Apply(kernel_args);
BENCHMARK(BM_synthesize<false>)->Name("synthesize/reference")->Apply(kernel_args);

void BM_scan(benchmark::State& state) {
  const NormalForm nf = normal_form(AlphaAffine::alpha(), ExactComplex{}, 2);
  const GroupPair gp{GroupKind::Torus, GroupKind::SU2};
  for (auto _ : state) {
    auto r = scan_small_divisors(nf.model, gp, static_cast<double>(state.range(0)));
    benchmark::DoNotOptimize(r.pairs);
  }
}
BENCHMARK(BM_scan)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
