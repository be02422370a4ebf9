#include "aimsgp/transforms.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace aims {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Beta(1/2, 1/2) cdf (arcsine law).
double arcsine_cdf(double x) { return 2.0 / std::numbers::pi * std::asin(std::sqrt(x)); }
double arcsine_quantile(double u) {
  double s = std::sin(0.5 * std::numbers::pi * u);
  return s * s;
}

}  // namespace

Vector to_unconstrained(const HyperParams& phi) {
  const int p = phi.p();
  Vector z(p + 1);
  for (int i = 0; i < p; ++i) {
    if (!(phi.lengths[i] > 0.0))
      throw std::domain_error("to_unconstrained: non-positive length scale");
    z[i] = std::log(phi.lengths[i]);
  }
  if (phi.nugget <= kNuggetFloor || phi.nugget >= 1.0)
    throw std::domain_error("to_unconstrained: nugget on or outside its open bounds");
  double t = (phi.nugget - kNuggetFloor) / (1.0 - kNuggetFloor);
  z[p] = std::log(t) - std::log1p(-t);
  return z;
}

HyperParams from_unconstrained(const Vector& z) {
  if (z.size() < 2) throw std::invalid_argument("from_unconstrained: need at least 2 coordinates");
  if (!z.allFinite()) throw std::invalid_argument("from_unconstrained: non-finite coordinate");
  const int p = static_cast<int>(z.size()) - 1;
  HyperParams phi;
  phi.lengths.resize(p);
  for (int i = 0; i < p; ++i) {
    double v = std::exp(z[i]);
    if (!std::isfinite(v)) v = std::numeric_limits<double>::max();
    if (v <= 0.0) v = std::numeric_limits<double>::min();  // exp underflow
    phi.lengths[i] = v;
  }
  phi.nugget = std::min(1.0, kNuggetFloor + (1.0 - kNuggetFloor) * sigmoid(z[p]));
  return phi;
}

Vector meta_prior_sample(RandomStream& rng, int p) {
  if (p < 1) throw std::invalid_argument("meta_prior_sample: need p >= 1");
  Vector z(p + 1);
  for (int i = 0; i < p; ++i) z[i] = -7.0 + 14.0 * rng.uniform();

  // Inverse-cdf draw from Beta(1/2,1/2) restricted to [kNuggetFloor, 1],
  // nudged off the exact bounds so the z-map stays finite.
  double lo = arcsine_cdf(kNuggetFloor);
  double u = lo + (1.0 - lo) * rng.uniform();
  double nugget = arcsine_quantile(u);
  double margin = 1e-9 * (1.0 - kNuggetFloor);
  nugget = std::min(std::max(nugget, kNuggetFloor + margin), 1.0 - margin);

  HyperParams phi;
  phi.lengths = Vector::Ones(p);  // placeholder, only the nugget matters here
  phi.nugget = nugget;
  z[p] = to_unconstrained(phi)[p];
  return z;
}

LogPrior make_lognormal_prior(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu))
    throw std::invalid_argument("lognormal prior: need finite mu and sigma > 0");
  const double log_norm = std::log(sigma) + 0.5 * std::log(2.0 * std::numbers::pi);
  return [mu, sigma, log_norm](const HyperParams& phi) -> double {
    if (log_prior_flat(phi) == -kInf) return -kInf;
    double lp = 0.0;
    for (Eigen::Index i = 0; i < phi.lengths.size(); ++i) {
      double lx = std::log(phi.lengths[i]);
      double d = (lx - mu) / sigma;
      lp += -lx - log_norm - 0.5 * d * d;
    }
    return lp;
  };
}

LogPrior make_prior(const std::string& name) {
  if (name.empty()) throw std::invalid_argument("prior: empty specification");
  if (name == "flat") return log_prior_flat;
  auto parse_params = [&](std::size_t start) {
    std::string body = name.substr(start);
    if (!body.empty() && body.back() == ')') body.pop_back();
    auto comma = body.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("prior: expected lognormal with two parameters, got '" + name + "'");
    std::size_t pos_mu = 0, pos_sigma = 0;
    double mu = std::stod(body.substr(0, comma), &pos_mu);
    double sigma = std::stod(body.substr(comma + 1), &pos_sigma);
    if (pos_mu != comma || pos_sigma != body.size() - comma - 1)
      throw std::invalid_argument("prior: malformed parameters in '" + name + "'");
    return make_lognormal_prior(mu, sigma);
  };
  try {
    if (name.rfind("lognormal(", 0) == 0 && name.back() == ')') return parse_params(10);
    if (name.rfind("lognormal:", 0) == 0) return parse_params(10);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("prior: malformed parameters in '" + name + "'");
  }
  throw std::invalid_argument("prior: unknown specification '" + name + "'");
}

}  // namespace aims
