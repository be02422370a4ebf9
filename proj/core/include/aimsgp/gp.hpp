#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace aims {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Lower bound of the nugget range used throughout the sampling pipeline.
inline constexpr double kNuggetFloor = 1e-12;

// Correlation hyper-parameters: one squared-exponential length scale per
// input dimension plus a nugget on the correlation diagonal. The sampling
// pipeline keeps nugget inside [kNuggetFloor, 1]; the GP operations below
// only require nugget >= 0.
struct HyperParams {
  Vector lengths;  // size p, each > 0 and finite
  double nugget = kNuggetFloor;

  int p() const { return static_cast<int>(lengths.size()); }
  // Throws std::invalid_argument when a pipeline invariant is violated.
  void validate() const;
};

// Design/response data plus the regression basis evaluated at the inputs.
// The default basis is linear: h(x) = (1, x_1, ..., x_p), so q = p + 1.
struct TrainingSet {
  Matrix inputs;   // n x p, expected inside the unit hypercube
  Vector outputs;  // n
  Matrix basis;    // n x q, full column rank

  int n() const { return static_cast<int>(inputs.rows()); }
  int p() const { return static_cast<int>(inputs.cols()); }
  int q() const { return static_cast<int>(basis.cols()); }

  static TrainingSet with_linear_basis(Matrix inputs, Vector outputs);

  // Enforces n >= q + 3, pairwise-distinct rows, shape agreement and full
  // column rank of the basis. Throws std::invalid_argument.
  void validate() const;
};

// Basis row for one input point under the linear basis convention.
Vector linear_basis(const Vector& x);

// Raised when the correlation matrix cannot be factorized even with the
// nugget in place.
class IllConditionedCovariance : public std::runtime_error {
 public:
  IllConditionedCovariance(std::string what, HyperParams phi);
  const HyperParams& params() const { return phi_; }

 private:
  HyperParams phi_;
};

using LogPrior = std::function<double(const HyperParams&)>;

// Flat (improper) prior over valid hyper-parameters: log p = 0 on the
// support, -inf when the nugget leaves [kNuggetFloor, 1] or a length is
// non-positive.
double log_prior_flat(const HyperParams& phi);

// Squared-exponential correlation exp(-1/2 sum_i (a_i-b_i)^2 / phi_i).
// Throws std::invalid_argument on size mismatch, non-finite input or
// non-positive length scale.
double correlation(const Vector& a, const Vector& b, const HyperParams& phi);

// n x n correlation matrix of the training inputs with the nugget added to
// the diagonal: K_delta = K + nugget * I.
Matrix correlation_matrix(const TrainingSet& data, const HyperParams& phi);

// Cached Cholesky factorization of K_delta together with the generalized
// least squares estimates and the value of the marginalized negative log
// posterior at phi. All downstream solves reuse the factor; nothing is
// inverted explicitly.
struct GpFactorization {
  HyperParams phi;
  Matrix lower;            // L with L L^T = K_delta
  Vector beta_hat;         // q
  double sigma2_hat = 0.0;
  double log_det_k = 0.0;       // log |K_delta|
  double log_det_hkh = 0.0;     // log |H^T K_delta^-1 H|
  double neg_log_post = 0.0;    // -log p(phi) + fit terms

  // Cached solves for prediction.
  Vector kinv_residual;    // K_delta^-1 (y - H beta_hat)
  Matrix kinv_basis;       // K_delta^-1 H
  Matrix hkh_lower;        // chol(H^T K_delta^-1 H)

  Vector solve(const Vector& rhs) const;   // K_delta^-1 rhs via the factor
};

// Throws IllConditionedCovariance when the Cholesky factorization fails.
// Assumes data.validate() has been run by the caller.
GpFactorization factorize(const TrainingSet& data, const HyperParams& phi,
                          const LogPrior& prior = log_prior_flat);

// (beta_hat, sigma2_hat) with the n - q - 2 denominator.
std::pair<Vector, double> gls_estimates(const TrainingSet& data, const HyperParams& phi);

// Marginalized negative log posterior
//   -log p(phi) + (n-q)/2 log sigma2_hat + 1/2 log|K_delta| + 1/2 log|H^T K_delta^-1 H|.
// Returns +inf when the prior excludes phi, the factorization fails, or the
// value is otherwise non-finite.
double neg_log_posterior(const TrainingSet& data, const HyperParams& phi,
                         const LogPrior& prior = log_prior_flat);

struct PredictiveMoments {
  double mean_x = 0.0;   // posterior mean at xs
  double mean_w = 0.0;   // posterior mean at ws
  double cov = 0.0;      // posterior covariance of (f(xs), f(ws))
};

// Plug-in predictive moments at test points xs, ws given a factorization.
// When xs == ws (bitwise) the nugget is added to the predictive correlation
// if include_nugget is set, and the variance is clamped at zero.
PredictiveMoments predictive_moments(const TrainingSet& data, const GpFactorization& fact,
                                     const Vector& xs, const Vector& ws,
                                     bool include_nugget = true);

PredictiveMoments predictive_moments(const TrainingSet& data, const HyperParams& phi,
                                     const Vector& xs, const Vector& ws,
                                     bool include_nugget = true);

}  // namespace aims
