// Serial reference kernels against the OpenMP versions on the shapes the
// solver uses: n in {2, 4, 8}, N in {2048, 16384}.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "klspec/filterbank.hpp"
#include "klspec/kernels.hpp"

namespace {

using namespace klspec;

struct Data {
  CMatrix a;
  CVector b;
  std::vector<double> thetas;
  CMatrix g;
  CMatrix l;
  std::vector<double> w;
};

Data make(Eigen::Index n, Eigen::Index count) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ud(-0.8, 0.8);
  Data d;
  d.a = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) d.a(i, i) = Complex(ud(rng), 0.2 * ud(rng));
  d.b = CVector::Ones(n);
  d.thetas = CircleGrid(count).nodes();
  d.g = kernels::serial::evaluate_responses(d.a, d.b, d.thetas);
  d.l = CMatrix::Identity(n, n) / static_cast<double>(n);
  for (Eigen::Index k = 0; k < count; ++k) d.w.push_back(1.0 + 0.5 * ud(rng));
  return d;
}

template <bool Parallel>
void BM_Responses(benchmark::State& state) {
  const Data d = make(state.range(0), state.range(1));
  for (auto _ : state) {
    CMatrix g = Parallel ? kernels::evaluate_responses(d.a, d.b, d.thetas)
                         : kernels::serial::evaluate_responses(d.a, d.b, d.thetas);
    benchmark::DoNotOptimize(g.data());
  }
}

template <bool Parallel>
void BM_QuadraticForms(benchmark::State& state) {
  const Data d = make(state.range(0), state.range(1));
  for (auto _ : state) {
    std::vector<double> q = Parallel ? kernels::quadratic_forms(d.g, d.l)
                                     : kernels::serial::quadratic_forms(d.g, d.l);
    benchmark::DoNotOptimize(q.data());
  }
}

template <bool Parallel>
void BM_WeightedOuterMean(benchmark::State& state) {
  const Data d = make(state.range(0), state.range(1));
  for (auto _ : state) {
    CMatrix m = Parallel ? kernels::weighted_outer_mean(d.g, d.w)
                         : kernels::serial::weighted_outer_mean(d.g, d.w);
    benchmark::DoNotOptimize(m.data());
  }
}

template <bool Parallel>
void BM_WeightedLogMean(benchmark::State& state) {
  const Data d = make(state.range(0), state.range(1));
  const std::vector<double> q = kernels::serial::quadratic_forms(d.g, d.l);
  for (auto _ : state) {
    double v = Parallel ? kernels::weighted_log_mean(d.w, q) : kernels::serial::weighted_log_mean(d.w, q);
    benchmark::DoNotOptimize(v);
  }
}

void shapes(benchmark::internal::Benchmark* b) {
  for (int n : {2, 4, 8}) {
    for (int count : {2048, 16384}) b->Args({n, count});
  }
}

}  // namespace

BENCHMARK(BM_Responses<false>)->Name("responses/serial")->Apply(shapes);
BENCHMARK(BM_Responses<true>)->Name("responses/omp")->Apply(shapes);
BENCHMARK(BM_QuadraticForms<false>)->Name("quadratic_forms/serial")->Apply(shapes);
BENCHMARK(BM_QuadraticForms<true>)->Name("quadratic_forms/omp")->Apply(shapes);
BENCHMARK(BM_WeightedOuterMean<false>)->Name("weighted_outer_mean/serial")->Apply(shapes);
BENCHMARK(BM_WeightedOuterMean<true>)->Name("weighted_outer_mean/omp")->Apply(shapes);
BENCHMARK(BM_WeightedLogMean<false>)->Name("weighted_log_mean/serial")->Apply(shapes);
BENCHMARK(BM_WeightedLogMean<true>)->Name("weighted_log_mean/omp")->Apply(shapes);

BENCHMARK_MAIN();
