#include <benchmark/benchmark.h>

#include "virodyn/dynamics.hpp"
#include "virodyn/equilibria.hpp"
#include "virodyn/stability.hpp"

namespace {

viro::ModelParams eps1_params() {
  viro::ModelParams p;
  p.lambda = 1.0;
  p.beta = 43.5;
  p.delta = 0.5;
  p.K = 1.0;
  p.gamma = 1.0 / 128.0;
  p.b = 29.5;
  p.beta_y = p.beta_v = p.beta_z = p.c = 1.0;
  p.epsilon = 1;
  return p;
}

void BM_VectorField(benchmark::State& state) {
  auto p = eps1_params();
  viro::State s{0.7, 0.2, 0.002, 0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(viro::vector_field(p, s));
  }
}
BENCHMARK(BM_VectorField);

void BM_Eigenvalues4x4(benchmark::State& state) {
  auto p = eps1_params();
  auto eqs = viro::interior_equilibria(p);
  auto J = viro::jacobian(p, eqs.front().point);
  for (auto _ : state) {
    benchmark::DoNotOptimize(viro::eigenvalues(J));
  }
}
BENCHMARK(BM_Eigenvalues4x4);

void BM_InteriorEquilibria(benchmark::State& state) {
  auto p = eps1_params();
  for (auto _ : state) {
    benchmark::DoNotOptimize(viro::interior_equilibria(p));
  }
}
BENCHMARK(BM_InteriorEquilibria);

void BM_QuarticRoots(benchmark::State& state) {
  viro::RealPolynomial q({-6.0, 11.0, -6.0, 0.0, 1.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(viro::real_roots(q));
  }
}
BENCHMARK(BM_QuarticRoots);

void BM_Integrate100(benchmark::State& state) {
  auto p = eps1_params();
  viro::State init{0.9, 0.01, 0.01, 0.01};
  viro::IntegratorOptions opts;
  for (auto _ : state) {
    benchmark::DoNotOptimize(viro::integrate(p, init, 0.0, 100.0, opts));
  }
}
BENCHMARK(BM_Integrate100);

}  // namespace

BENCHMARK_MAIN();
