#include "aimsgp/gp.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace aims {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lexicographic_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Basis row consistent with the training design: linear when q = p + 1,
// intercept-only when q = 1.
Vector basis_row(int q, const Vector& x) {
  if (q == static_cast<int>(x.size()) + 1) return linear_basis(x);
  if (q == 1) return Vector::Ones(1);
  throw std::invalid_argument(
      "predictive_moments: test-point basis is only defined for the linear or "
      "intercept-only regression basis");
}

}  // namespace

void HyperParams::validate() const {
  if (lengths.size() == 0) throw std::invalid_argument("HyperParams: empty length vector");
  for (Eigen::Index i = 0; i < lengths.size(); ++i) {
    if (!std::isfinite(lengths[i]) || lengths[i] <= 0.0)
      throw std::invalid_argument("HyperParams: length scales must be positive and finite");
  }
  if (!std::isfinite(nugget) || nugget < kNuggetFloor || nugget > 1.0)
    throw std::invalid_argument("HyperParams: nugget outside [1e-12, 1]");
}

TrainingSet TrainingSet::with_linear_basis(Matrix inputs, Vector outputs) {
  TrainingSet data;
  data.basis.resize(inputs.rows(), inputs.cols() + 1);
  data.basis.col(0).setOnes();
  data.basis.rightCols(inputs.cols()) = inputs;
  data.inputs = std::move(inputs);
  data.outputs = std::move(outputs);
  return data;
}

void TrainingSet::validate() const {
  if (inputs.rows() == 0 || inputs.cols() == 0)
    throw std::invalid_argument("TrainingSet: empty design");
  if (outputs.size() != inputs.rows())
    throw std::invalid_argument("TrainingSet: outputs/inputs row mismatch");
  if (basis.rows() != inputs.rows())
    throw std::invalid_argument("TrainingSet: basis/inputs row mismatch");
  if (n() < q() + 3)
    throw std::invalid_argument("TrainingSet: need n >= q + 3 observations");
  for (int i = 0; i < n(); ++i) {
    if (!outputs.segment(i, 1).allFinite() || !inputs.row(i).allFinite())
      throw std::invalid_argument("TrainingSet: non-finite entry");
    for (int j = i + 1; j < n(); ++j) {
      if ((inputs.row(i).array() == inputs.row(j).array()).all())
        throw std::invalid_argument("TrainingSet: duplicate design points (rows " +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
    }
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  if (qr.rank() < basis.cols())
    throw std::invalid_argument("TrainingSet: regression basis is rank deficient");
}

Vector linear_basis(const Vector& x) {
  Vector h(x.size() + 1);
  h[0] = 1.0;
  h.tail(x.size()) = x;
  return h;
}

IllConditionedCovariance::IllConditionedCovariance(std::string what, HyperParams phi)
    : std::runtime_error(std::move(what)), phi_(std::move(phi)) {}

double log_prior_flat(const HyperParams& phi) {
  for (Eigen::Index i = 0; i < phi.lengths.size(); ++i) {
    if (!std::isfinite(phi.lengths[i]) || phi.lengths[i] <= 0.0) return -kInf;
  }
  if (!std::isfinite(phi.nugget) || phi.nugget < kNuggetFloor || phi.nugget > 1.0) return -kInf;
  return 0.0;
}

double correlation(const Vector& a, const Vector& b, const HyperParams& phi) {
  if (a.size() != b.size() || a.size() != phi.lengths.size())
    throw std::invalid_argument("correlation: dimension mismatch");
  if (!a.allFinite() || !b.allFinite())
    throw std::invalid_argument("correlation: non-finite input point");
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!(phi.lengths[i] > 0.0) || !std::isfinite(phi.lengths[i]))
      throw std::invalid_argument("correlation: length scales must be positive and finite");
    double d = a[i] - b[i];
    s += d * d / phi.lengths[i];
  }
  return std::exp(-0.5 * s);
}

Matrix correlation_matrix(const TrainingSet& data, const HyperParams& phi) {
  if (phi.lengths.size() != data.p())
    throw std::invalid_argument("correlation_matrix: length/dimension mismatch");
  if (!std::isfinite(phi.nugget) || phi.nugget < 0.0)
    throw std::invalid_argument("correlation_matrix: nugget must be finite and >= 0");
  const int n = data.n();
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = 1.0 + phi.nugget;
    for (int j = i + 1; j < n; ++j) {
      double c = correlation(data.inputs.row(i).transpose(), data.inputs.row(j).transpose(), phi);
      k(i, j) = c;
      k(j, i) = c;
    }
  }
  return k;
}

Vector GpFactorization::solve(const Vector& rhs) const {
  Vector t = lower.triangularView<Eigen::Lower>().solve(rhs);
  return lower.transpose().triangularView<Eigen::Upper>().solve(t);
}

GpFactorization factorize(const TrainingSet& data, const HyperParams& phi,
                          const LogPrior& prior) {
  const int n = data.n();
  const int q = data.q();

  Matrix k = correlation_matrix(data, phi);
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success)
    throw IllConditionedCovariance("correlation matrix is not positive definite at the "
                                   "requested hyper-parameters",
                                   phi);

  GpFactorization f;
  f.phi = phi;
  f.lower = llt.matrixL();

  // Whitened design and response: a = L^-1 H, c = L^-1 y.
  Matrix a = f.lower.triangularView<Eigen::Lower>().solve(data.basis);
  Vector c = f.lower.triangularView<Eigen::Lower>().solve(data.outputs);

  Matrix gram = a.transpose() * a;  // H^T K^-1 H
  Eigen::LLT<Matrix> gram_llt(gram);
  if (gram_llt.info() != Eigen::Success)
    throw IllConditionedCovariance("whitened regression basis lost rank at the requested "
                                   "hyper-parameters",
                                   phi);
  f.hkh_lower = gram_llt.matrixL();

  Vector atc = a.transpose() * c;
  f.beta_hat = gram_llt.solve(atc);

  // rss comes from cancelling two O(|c|^2) terms; below the rounding noise
  // floor of that subtraction the value is indistinguishable from an exact
  // fit, so collapse it to zero (the objective then degenerates to +inf).
  double rss = c.dot(c) - atc.dot(f.beta_hat);
  if (rss <= 64.0 * std::numeric_limits<double>::epsilon() * c.dot(c)) rss = 0.0;
  f.sigma2_hat = rss / static_cast<double>(n - q - 2);

  f.log_det_k = 2.0 * f.lower.diagonal().array().log().sum();
  f.log_det_hkh = 2.0 * f.hkh_lower.diagonal().array().log().sum();

  double log_prior = prior(phi);
  f.neg_log_post = -log_prior +
                   0.5 * static_cast<double>(n - q) * std::log(f.sigma2_hat) +
                   0.5 * f.log_det_k + 0.5 * f.log_det_hkh;

  f.kinv_residual = f.solve(data.outputs - data.basis * f.beta_hat);
  f.kinv_basis = f.lower.transpose().triangularView<Eigen::Upper>().solve(a);
  return f;
}

std::pair<Vector, double> gls_estimates(const TrainingSet& data, const HyperParams& phi) {
  GpFactorization f = factorize(data, phi);
  return {f.beta_hat, f.sigma2_hat};
}

double neg_log_posterior(const TrainingSet& data, const HyperParams& phi,
                         const LogPrior& prior) {
  if (!std::isfinite(prior(phi))) return kInf;
  try {
    double h = factorize(data, phi, prior).neg_log_post;
    return std::isfinite(h) ? h : kInf;
  } catch (const IllConditionedCovariance&) {
    return kInf;
  }
}

PredictiveMoments predictive_moments(const TrainingSet& data, const GpFactorization& fact,
                                     const Vector& xs, const Vector& ws,
                                     bool include_nugget) {
  if (xs.size() != data.p() || ws.size() != data.p())
    throw std::invalid_argument("predictive_moments: test point dimension mismatch");
  if (!xs.allFinite() || !ws.allFinite())
    throw std::invalid_argument("predictive_moments: non-finite test point");

  // Canonical argument order makes cov(xs, ws) == cov(ws, xs) bitwise.
  if (lexicographic_less(ws, xs)) {
    PredictiveMoments swapped = predictive_moments(data, fact, ws, xs, include_nugget);
    return {swapped.mean_w, swapped.mean_x, swapped.cov};
  }

  const int n = data.n();
  const bool same_point = (xs.array() == ws.array()).all();

  Vector tx(n), tw(n);
  for (int i = 0; i < n; ++i)
    tx[i] = correlation(data.inputs.row(i).transpose(), xs, fact.phi);
  if (same_point)
    tw = tx;
  else
    for (int i = 0; i < n; ++i)
      tw[i] = correlation(data.inputs.row(i).transpose(), ws, fact.phi);

  Vector hx = basis_row(data.q(), xs);
  Vector hw = same_point ? hx : basis_row(data.q(), ws);

  PredictiveMoments out;
  out.mean_x = hx.dot(fact.beta_hat) + tx.dot(fact.kinv_residual);
  out.mean_w = same_point ? out.mean_x : hw.dot(fact.beta_hat) + tw.dot(fact.kinv_residual);

  Vector kinv_tw = fact.solve(tw);
  Vector ux = hx - fact.kinv_basis.transpose() * tx;
  Vector uw = same_point ? ux : hw - fact.kinv_basis.transpose() * tw;
  Vector sx = fact.hkh_lower.triangularView<Eigen::Lower>().solve(ux);
  Vector sw = same_point ? sx : fact.hkh_lower.triangularView<Eigen::Lower>().solve(uw);

  double corr = correlation(xs, ws, fact.phi) - tx.dot(kinv_tw) + sx.dot(sw);
  if (same_point && include_nugget) corr += fact.phi.nugget;

  out.cov = fact.sigma2_hat * corr;
  if (same_point && out.cov < 0.0) out.cov = 0.0;
  return out;
}

PredictiveMoments predictive_moments(const TrainingSet& data, const HyperParams& phi,
                                     const Vector& xs, const Vector& ws,
                                     bool include_nugget) {
  return predictive_moments(data, factorize(data, phi), xs, ws, include_nugget);
}

}  // namespace aims
