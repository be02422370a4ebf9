#pragma once

#include <memory>
#include <vector>

#include "aimsgp/gp.hpp"
#include "aimsgp/sampler.hpp"

namespace aims {

enum class MixtureWeighting {
  uniform,     // 1/N per retained sample
  importance,  // re-weight the final tempered level toward temperature 1
};

// Emulator that averages plug-in GPs over retained hyper-parameter samples.
// Duplicate samples keep their multiplicity (their factorizations are shared
// under the hood, the mixture weights are not collapsed).
class MixtureEmulator {
 public:
  struct Component {
    double weight = 0.0;
    HyperParams phi;
    double h = 0.0;
    std::shared_ptr<const GpFactorization> fact;
  };

  MixtureEmulator(TrainingSet data, std::vector<HyperParams> phis, Vector h_values,
                  MixtureWeighting weighting, double final_temperature = 1.0,
                  bool include_nugget_variance = true);

  static MixtureEmulator from_result(TrainingSet data, const SamplerResult& result,
                                     MixtureWeighting weighting,
                                     bool include_nugget_variance = true);

  double mean(const Vector& xs) const;
  // sum_i w_i [ (mu_i(xs) - mean(xs)) (mu_i(ws) - mean(ws)) + cov_i(xs, ws) ].
  double covariance(const Vector& xs, const Vector& ws) const;
  double variance(const Vector& xs) const { return covariance(xs, xs); }

  struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
  };
  Prediction predict(const Vector& xs) const;

  const std::vector<Component>& components() const { return components_; }
  const TrainingSet& data() const { return data_; }
  // Index of the lowest-objective component (first occurrence on ties).
  int map_index() const { return map_index_; }
  Prediction predict_map(const Vector& xs) const;

 private:
  TrainingSet data_;
  std::vector<Component> components_;
  int map_index_ = 0;
  bool include_nugget_variance_ = true;
};

// Weighted mean / covariance combination rules, exposed for direct checks.
double combine_mean(const Vector& weights, const Vector& means);
double combine_cov(const Vector& weights, const Vector& means_x, const Vector& means_w,
                   const Vector& covs);

struct ResidualReport {
  std::vector<double> residuals;  // NaN where not computable
  std::vector<bool> computed;     // false when predictive variance <= 0
  int total = 0;
  int total_computed = 0;
  int within_band = 0;            // |r| <= 1.96 among computed
};

// Standardized residuals (y - mean) / sqrt(variance) of the mixture at the
// given points.
ResidualReport standardized_residuals(const MixtureEmulator& emulator, const Matrix& inputs,
                                      const Vector& actuals);

// Root mean squared prediction error; throws std::invalid_argument on size
// mismatch or empty input.
double rmse(const Vector& predicted, const Vector& actual);

}  // namespace aims
