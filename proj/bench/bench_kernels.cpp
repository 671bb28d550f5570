// Serial reference vs OpenMP softmax kernels on a full-batch pass.

#include <benchmark/benchmark.h>

#include <numeric>

#include "dogsgd/dataset.hpp"
#include "dogsgd/kernels.hpp"

namespace {

using namespace dogsgd;

struct Fixture {
  Dataset data;
  std::vector<std::size_t> rows;
  std::vector<double> params;
  std::vector<double> grad;

  explicit Fixture(std::size_t n) : data(make_synthetic_classification(n, 20, 5, 7)) {
    rows.resize(data.n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    params.assign(kernels::softmax_param_count(data), 0.01);
    grad.assign(params.size(), 0.0);
  }
};

void BM_GradSerial(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    kernels::serial::softmax_gradient(f.data, f.rows, f.params, f.grad);
    benchmark::DoNotOptimize(f.grad.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GradParallel(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    kernels::parallel::softmax_gradient(f.data, f.rows, f.params, f.grad);
    benchmark::DoNotOptimize(f.grad.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LossSerial(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::softmax_loss(f.data, f.rows, f.params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LossParallel(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::softmax_loss(f.data, f.rows, f.params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_GradSerial)->Arg(32)->Arg(2000)->Arg(20000);
BENCHMARK(BM_GradParallel)->Arg(32)->Arg(2000)->Arg(20000);
BENCHMARK(BM_LossSerial)->Arg(2000)->Arg(20000);
BENCHMARK(BM_LossParallel)->Arg(2000)->Arg(20000);

BENCHMARK_MAIN();
