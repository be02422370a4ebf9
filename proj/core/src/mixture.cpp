#include "aimsgp/mixture.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace aims {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bitwise key so exact duplicate samples share one factorization.
struct PhiKey {
  std::vector<std::uint64_t> bits;
  bool operator<(const PhiKey& o) const { return bits < o.bits; }
};

PhiKey key_of(const HyperParams& phi) {
  PhiKey k;
  k.bits.reserve(static_cast<std::size_t>(phi.lengths.size()) + 1);
  auto push = [&k](double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof(u));
    k.bits.push_back(u);
  };
  for (Eigen::Index i = 0; i < phi.lengths.size(); ++i) push(phi.lengths[i]);
  push(phi.nugget);
  return k;
}

Vector mixture_weights(const Vector& h_values, MixtureWeighting weighting,
                       double final_temperature) {
  const Eigen::Index n = h_values.size();
  if (weighting == MixtureWeighting::uniform)
    return Vector::Constant(n, 1.0 / static_cast<double>(n));
  // Importance re-weighting from the final tempered target to the posterior
  // at temperature 1.
  return importance_weights(h_values, 1.0, final_temperature);
}

}  // namespace

MixtureEmulator::MixtureEmulator(TrainingSet data, std::vector<HyperParams> phis,
                                 Vector h_values, MixtureWeighting weighting,
                                 double final_temperature, bool include_nugget_variance)
    : data_(std::move(data)), include_nugget_variance_(include_nugget_variance) {
  if (phis.empty()) throw std::invalid_argument("MixtureEmulator: no components");
  if (static_cast<Eigen::Index>(phis.size()) != h_values.size())
    throw std::invalid_argument("MixtureEmulator: component/objective size mismatch");
  data_.validate();

  Vector weights = mixture_weights(h_values, weighting, final_temperature);

  std::map<PhiKey, std::shared_ptr<const GpFactorization>> cache;
  components_.reserve(phis.size());
  double best_h = kInf;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    Component c;
    c.weight = weights[static_cast<Eigen::Index>(i)];
    c.phi = std::move(phis[i]);
    c.h = h_values[static_cast<Eigen::Index>(i)];
    auto [it, inserted] = cache.try_emplace(key_of(c.phi));
    if (inserted)
      it->second = std::make_shared<const GpFactorization>(factorize(data_, c.phi));
    c.fact = it->second;
    if (c.h < best_h) {
      best_h = c.h;
      map_index_ = static_cast<int>(i);
    }
    components_.push_back(std::move(c));
  }
}

MixtureEmulator MixtureEmulator::from_result(TrainingSet data, const SamplerResult& result,
                                             MixtureWeighting weighting,
                                             bool include_nugget_variance) {
  if (result.final_samples.empty())
    throw std::invalid_argument("MixtureEmulator: sampler result has no samples");
  double final_temperature = result.temperature_trace.empty()
                                 ? 1.0
                                 : result.temperature_trace.back();
  return MixtureEmulator(std::move(data), result.final_samples, result.final_h, weighting,
                         final_temperature, include_nugget_variance);
}

double MixtureEmulator::mean(const Vector& xs) const {
  double m = 0.0;
  for (const Component& c : components_)
    m += c.weight * predictive_moments(data_, *c.fact, xs, xs, include_nugget_variance_).mean_x;
  return m;
}

double MixtureEmulator::covariance(const Vector& xs, const Vector& ws) const {
  const Eigen::Index m = static_cast<Eigen::Index>(components_.size());
  Vector w(m), mx(m), mw(m), cv(m);
  const bool same_point = (xs.array() == ws.array()).all();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Component& c = components_[static_cast<std::size_t>(i)];
    PredictiveMoments pm =
        predictive_moments(data_, *c.fact, xs, ws, include_nugget_variance_);
    w[i] = c.weight;
    mx[i] = pm.mean_x;
    mw[i] = same_point ? pm.mean_x : pm.mean_w;
    cv[i] = pm.cov;
  }
  return combine_cov(w, mx, mw, cv);
}

MixtureEmulator::Prediction MixtureEmulator::predict(const Vector& xs) const {
  const Eigen::Index m = static_cast<Eigen::Index>(components_.size());
  Vector w(m), mu(m), cv(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Component& c = components_[static_cast<std::size_t>(i)];
    PredictiveMoments pm =
        predictive_moments(data_, *c.fact, xs, xs, include_nugget_variance_);
    w[i] = c.weight;
    mu[i] = pm.mean_x;
    cv[i] = pm.cov;
  }
  Prediction out;
  out.mean = combine_mean(w, mu);
  out.variance = combine_cov(w, mu, mu, cv);
  return out;
}

MixtureEmulator::Prediction MixtureEmulator::predict_map(const Vector& xs) const {
  const Component& c = components_[static_cast<std::size_t>(map_index_)];
  PredictiveMoments pm = predictive_moments(data_, *c.fact, xs, xs, include_nugget_variance_);
  return {pm.mean_x, pm.cov};
}

double combine_mean(const Vector& weights, const Vector& means) {
  if (weights.size() != means.size() || weights.size() == 0)
    throw std::invalid_argument("combine_mean: size mismatch");
  return weights.dot(means);
}

double combine_cov(const Vector& weights, const Vector& means_x, const Vector& means_w,
                   const Vector& covs) {
  if (weights.size() == 0 || weights.size() != means_x.size() ||
      weights.size() != means_w.size() || weights.size() != covs.size())
    throw std::invalid_argument("combine_cov: size mismatch");
  double mean_x = weights.dot(means_x);
  double mean_w = weights.dot(means_w);
  double c = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    c += weights[i] * ((means_x[i] - mean_x) * (means_w[i] - mean_w) + covs[i]);
  return c;
}

ResidualReport standardized_residuals(const MixtureEmulator& emulator, const Matrix& inputs,
                                      const Vector& actuals) {
  if (inputs.rows() != actuals.size())
    throw std::invalid_argument("standardized_residuals: input/actual size mismatch");
  ResidualReport report;
  report.total = static_cast<int>(inputs.rows());
  report.residuals.resize(static_cast<std::size_t>(report.total),
                          std::numeric_limits<double>::quiet_NaN());
  report.computed.resize(static_cast<std::size_t>(report.total), false);
  for (int i = 0; i < report.total; ++i) {
    MixtureEmulator::Prediction pred = emulator.predict(inputs.row(i).transpose());
    if (!(pred.variance > 0.0)) continue;
    double r = (actuals[i] - pred.mean) / std::sqrt(pred.variance);
    report.residuals[static_cast<std::size_t>(i)] = r;
    report.computed[static_cast<std::size_t>(i)] = true;
    ++report.total_computed;
    if (std::abs(r) <= 1.96) ++report.within_band;
  }
  return report;
}

double rmse(const Vector& predicted, const Vector& actual) {
  if (predicted.size() != actual.size())
    throw std::invalid_argument("rmse: size mismatch");
  if (predicted.size() == 0) throw std::invalid_argument("rmse: empty input");
  return std::sqrt((predicted - actual).squaredNorm() /
                   static_cast<double>(predicted.size()));
}

}  // namespace aims
