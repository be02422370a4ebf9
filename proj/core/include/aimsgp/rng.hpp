#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace aims {

// Deterministic random stream. Variate generation (uniform mapping, normal
// via Box-Muller) is spelled out here rather than delegated to
// std::*_distribution so that a given seed produces the same draws on every
// platform and the per-chain streams below stay scheduling independent.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  // Independent stream for chain `chain` of annealing level `level`.
  // Streams depend only on (master_seed, level, chain), never on which
  // thread runs the chain.
  static RandomStream for_chain(std::uint64_t master_seed, int level, int chain);

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform();

  // Standard normal (Box-Muller, second draw cached).
  double normal();

  // Index i drawn with probability cdf[i] - cdf[i-1]; cdf is a normalized
  // cumulative weight vector ending at 1 (up to rounding).
  int categorical(const std::vector<double>& cdf);

  // mean + L * eta with eta iid standard normal; L lower triangular.
  Eigen::VectorXd gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// SplitMix64 step, used to whiten seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Cumulative sums of a normalized weight vector, for categorical sampling.
std::vector<double> cumulative_weights(const Eigen::VectorXd& weights);

}  // namespace aims
