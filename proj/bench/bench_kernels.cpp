// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "dnaplan/graph.hpp"
#include "dnaplan/kernels.hpp"

using namespace dnaplan;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

DnaProfile decaying(std::size_t n, double rate) {
  const auto g = TimeGrid::uniform(n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::expm1(rate * g[i]) / std::expm1(rate);
  return DnaProfile(g, std::move(v));
}

template <bool Parallel>
void BM_RelaxLayer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = build_graph(decaying(n, 3.0));
  const std::vector<unsigned char> active(n, 1);
  auto prev = random_values(n, 1);
  std::vector<double> next(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::relax_layer(g.transitions(), active, prev, next);
    } else {
      kernels::serial::relax_layer(g.transitions(), active, prev, next);
    }
    benchmark::DoNotOptimize(next.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * (n - 1) / 2));
}

template <bool Parallel>
void BM_AffineForward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t in = 256, out = 256;
  const auto w = random_values(in * out, 2);
  const auto b = random_values(out, 3);
  const auto x = random_values(rows * in, 4);
  std::vector<double> y(rows * out);
  const kernels::MatrixView wv{w.data(), out, in}, xv{x.data(), rows, in};
  const kernels::MutableMatrixView yv{y.data(), rows, out};
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::affine_forward(wv, b, xv, yv);
    } else {
      kernels::serial::affine_forward(wv, b, xv, yv);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows * in * out));
}

template <bool Parallel>
void BM_AffineBackwardParams(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t in = 256, out = 256;
  const auto dy = random_values(rows * out, 5);
  const auto x = random_values(rows * in, 6);
  std::vector<double> dw(in * out), db(out);
  const kernels::MatrixView dyv{dy.data(), rows, out}, xv{x.data(), rows, in};
  const kernels::MutableMatrixView dwv{dw.data(), out, in};
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::affine_backward_params(dyv, xv, dwv, db);
    } else {
      kernels::serial::affine_backward_params(dyv, xv, dwv, db);
    }
    benchmark::DoNotOptimize(dw.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows * in * out));
}

template <bool Parallel>
void BM_PlanBatch(benchmark::State& state) {
  std::vector<PlannerGraph> graphs;
  for (int i = 0; i < 32; ++i) graphs.push_back(build_graph(decaying(100, 1.0 + 0.2 * i)));
  for (auto _ : state) {
    auto r = plan_fixed_batch(graphs, 10, Parallel);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * graphs.size()));
}

}  // namespace

BENCHMARK(BM_RelaxLayer<false>)->Name("relax_layer/serial")->Arg(100)->Arg(400)->Arg(1000);
BENCHMARK(BM_RelaxLayer<true>)->Name("relax_layer/omp")->Arg(100)->Arg(400)->Arg(1000);
BENCHMARK(BM_AffineForward<false>)->Name("affine_forward/serial")->Arg(1)->Arg(64);
BENCHMARK(BM_AffineForward<true>)->Name("affine_forward/omp")->Arg(1)->Arg(64);
BENCHMARK(BM_AffineBackwardParams<false>)->Name("affine_backward_params/serial")->Arg(64);
BENCHMARK(BM_AffineBackwardParams<true>)->Name("affine_backward_params/omp")->Arg(64);
BENCHMARK(BM_PlanBatch<false>)->Name("plan_fixed_batch/serial");
BENCHMARK(BM_PlanBatch<true>)->Name("plan_fixed_batch/omp");

BENCHMARK_MAIN();
