#include "aimsgp/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aims {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

RandomStream RandomStream::for_chain(std::uint64_t master_seed, int level, int chain) {
  std::uint64_t s = splitmix64(master_seed);
  s = splitmix64(s ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(level + 1)));
  s = splitmix64(s ^ (0xd1b54a32d192ed03ULL * static_cast<std::uint64_t>(chain + 1)));
  return RandomStream(s);
}

std::uint64_t RandomStream::next_u64() { return engine_(); }

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // u1 in (0,1]: avoids log(0).
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

int RandomStream::categorical(const std::vector<double>& cdf) {
  if (cdf.empty()) throw std::invalid_argument("categorical: empty cdf");
  double u = uniform();
  // upper_bound skips zero-weight entries (flat cdf segments).
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

Eigen::VectorXd RandomStream::gaussian(const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& chol_lower) {
  Eigen::VectorXd eta(mean.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = normal();
  return mean + chol_lower * eta;
}

std::vector<double> cumulative_weights(const Eigen::VectorXd& weights) {
  std::vector<double> cdf(static_cast<std::size_t>(weights.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  if (!cdf.empty()) cdf.back() = std::max(cdf.back(), 1.0);
  return cdf;
}

}  // namespace aims
