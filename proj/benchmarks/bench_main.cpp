#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "aimsgp/gp.hpp"
#include "aimsgp/rng.hpp"
#include "aimsgp/sampler.hpp"
#include "aimsgp/testbed.hpp"

namespace {

using namespace aims;

TrainingSet synthetic_data(int n, int p, std::uint64_t seed) {
  RandomStream rng(seed);
  Matrix x = latin_hypercube(n, p, rng);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    double v = std::sin(3.0 * x(i, 0));
    for (int d = 1; d < p; ++d) v += x(i, d) * x(i, d);
    y[i] = v;
  }
  return TrainingSet::with_linear_basis(x, y);
}

HyperParams mid_params(int p) {
  HyperParams phi;
  phi.lengths = Vector::Constant(p, 0.5);
  phi.nugget = 1e-6;
  return phi;
}

void bm_neg_log_posterior(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  TrainingSet data = synthetic_data(n, 2, 42);
  HyperParams phi = mid_params(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(neg_log_posterior(data, phi));
  state.SetComplexityN(n);
}
BENCHMARK(bm_neg_log_posterior)->Arg(18)->Arg(50)->Arg(100)->Complexity();

void bm_predictive_moments(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  TrainingSet data = synthetic_data(n, 2, 42);
  GpFactorization fact = factorize(data, mid_params(2));
  Vector xs(2), ws(2);
  xs << 0.3, 0.7;
  ws << 0.6, 0.2;
  for (auto _ : state)
    benchmark::DoNotOptimize(predictive_moments(data, fact, xs, ws));
}
BENCHMARK(bm_predictive_moments)->Arg(18)->Arg(100);

void bm_proposal_log_density(benchmark::State& state) {
  const int markers = static_cast<int>(state.range(0));
  RandomStream rng(7);
  std::vector<Vector> zs;
  Vector h(markers);
  for (int j = 0; j < markers; ++j) {
    Vector z(3);
    for (int d = 0; d < 3; ++d) z[d] = rng.normal();
    h[j] = 0.5 * z.squaredNorm();
    zs.push_back(std::move(z));
  }
  Vector w = importance_weights(h, 1.0, 2.0);
  Matrix sigma = weighted_covariance(zs, w);
  LevelProposal proposal(zs, w, h, 1.0, sigma, 0.5, 1.0);
  Vector query = Vector::Zero(3);
  for (auto _ : state)
    benchmark::DoNotOptimize(proposal.log_density(query, 0.0));
  state.SetComplexityN(markers);
}
BENCHMARK(bm_proposal_log_density)->Arg(200)->Arg(1000)->Arg(2000)->Complexity();

void bm_annealing_level(benchmark::State& state) {
  const int n = 500;
  Objective objective = [](const Vector& z) { return 0.5 * z.squaredNorm(); };
  RandomStream rng(11);
  AnnealingLevel level;
  level.index = 0;
  level.temperature = 50.0;
  level.h_values.resize(n);
  for (int i = 0; i < n; ++i) {
    Vector z(3);
    for (int d = 0; d < 3; ++d) z[d] = std::sqrt(50.0) * rng.normal();
    level.h_values[i] = objective(z);
    level.samples.push_back(std::move(z));
  }
  SamplerConfig config;
  config.sample_count = n;
  config.master_seed = 5;
  config.threads = 1;
  double h_min = level.h_values.minCoeff();
  for (auto _ : state)
    benchmark::DoNotOptimize(run_level(level, objective, config, 1, h_min));
}
BENCHMARK(bm_annealing_level)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
