#include "aimsgp/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>
#include <utility>

namespace aims {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 - exp(l)) for l <= 0, stable near both ends.
double log1mexp(double l) {
  if (l >= 0.0) return -kInf;
  if (l > -std::numbers::ln2) return std::log(-std::expm1(l));
  return std::log1p(-std::exp(l));
}

// log alpha_g with the p_hat conventions; -inf encodes certain rejection.
double global_accept_log(double h_candidate, double h_current, double logp_candidate,
                         double logp_current, double tau) {
  if (logp_candidate == -kInf || h_candidate == kInf) return -kInf;
  if (logp_current == -kInf) return 0.0;
  double lr = (h_current - h_candidate) / tau + logp_current - logp_candidate;
  return std::min(0.0, lr);
}

double finite_min(const Vector& values) {
  double m = kInf;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (std::isfinite(values[i])) m = std::min(m, values[i]);
  return m;
}

// Effective sample size of weights exp(-(h - m) * delta) over finite h.
double ess_at(const Vector& h, double shift, double delta) {
  double s1 = 0.0, s2 = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!std::isfinite(h[i])) continue;
    double w = std::exp(-(h[i] - shift) * delta);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

// c_0 * nu^k by repeated multiplication, matching the recurrence exactly.
double spread_at(double c0, double nu, int level) {
  double c = c0;
  for (int i = 0; i < level; ++i) c *= nu;
  return c;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs tasks [0, count) over a fixed-size pool; rethrows the first failure.
template <typename Fn>
void parallel_for_tasks(int count, int threads, Fn&& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

void SamplerConfig::validate() const {
  if (sample_count < 10) throw std::invalid_argument("SamplerConfig: need at least 10 samples per level");
  if (!(ess_gamma > 0.0) || !(ess_gamma < 1.0))
    throw std::invalid_argument("SamplerConfig: ess_gamma must lie in (0, 1)");
  if (!(spread_decay > 0.0) || spread_decay > 1.0)
    throw std::invalid_argument("SamplerConfig: spread_decay must lie in (0, 1]");
  if (!(initial_spread > 0.0) || !std::isfinite(initial_spread))
    throw std::invalid_argument("SamplerConfig: initial_spread must be positive and finite");
  if (!(stop_ratio > 0.0) || !(stop_ratio < 1.0))
    throw std::invalid_argument("SamplerConfig: stop_ratio must lie in (0, 1)");
  if (!(tau_floor > 0.0) || !std::isfinite(tau_floor))
    throw std::invalid_argument("SamplerConfig: tau_floor must be positive and finite");
  if (max_levels < 1) throw std::invalid_argument("SamplerConfig: max_levels must be >= 1");
  if (threads < 0) throw std::invalid_argument("SamplerConfig: threads must be >= 0");
}

Vector importance_weights(const Vector& h_values, double tau_new, double tau_old) {
  if (h_values.size() == 0) throw DegeneratePopulation("importance_weights: empty population");
  if (!(tau_new > 0.0)) throw std::invalid_argument("importance_weights: tau_new must be positive");
  double delta = 1.0 / tau_new - 1.0 / tau_old;  // 1/inf == 0 handles level zero
  // Shift so the largest exponent is zero: by the finite minimum when
  // cooling (delta >= 0), by the finite maximum when re-heating.
  double shift = kInf;
  bool any_finite = false;
  for (Eigen::Index i = 0; i < h_values.size(); ++i) {
    if (!std::isfinite(h_values[i])) continue;
    if (!any_finite) {
      shift = h_values[i];
      any_finite = true;
    } else {
      shift = delta >= 0.0 ? std::min(shift, h_values[i]) : std::max(shift, h_values[i]);
    }
  }
  if (!any_finite)
    throw DegeneratePopulation("importance_weights: every objective value is infinite");
  Vector w(h_values.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < h_values.size(); ++i) {
    w[i] = std::isfinite(h_values[i]) ? std::exp(-(h_values[i] - shift) * delta) : 0.0;
    total += w[i];
  }
  return w / total;
}

double solve_temperature(const Vector& h_values, double tau_old, double gamma,
                         double tau_floor, bool sample_mode) {
  auto clamp = [sample_mode](double tau) { return sample_mode ? std::max(tau, 1.0) : tau; };

  double shift = finite_min(h_values);
  if (shift == kInf)
    throw DegeneratePopulation("solve_temperature: every objective value is infinite");
  double spread_max = 0.0;
  for (Eigen::Index i = 0; i < h_values.size(); ++i)
    if (std::isfinite(h_values[i])) spread_max = std::max(spread_max, h_values[i] - shift);
  if (spread_max == 0.0) return clamp(tau_floor);

  double delta_max = 1.0 / tau_floor - 1.0 / tau_old;
  if (!(delta_max > 0.0)) return clamp(tau_floor);

  const double target = gamma * static_cast<double>(h_values.size());
  if (ess_at(h_values, shift, delta_max) >= target) return clamp(tau_floor);

  double lo = 0.0, hi = delta_max;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;  // bracket resolved to adjacent doubles
    if (ess_at(h_values, shift, mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  double delta = 0.5 * (lo + hi);
  return clamp(1.0 / (delta + 1.0 / tau_old));
}

Matrix weighted_covariance(const std::vector<Vector>& samples, const Vector& weights) {
  if (samples.empty()) throw std::invalid_argument("weighted_covariance: empty sample");
  if (static_cast<Eigen::Index>(samples.size()) != weights.size())
    throw std::invalid_argument("weighted_covariance: sample/weight size mismatch");
  const Eigen::Index d = samples.front().size();

  Vector mean = Vector::Zero(d);
  for (std::size_t j = 0; j < samples.size(); ++j) mean += weights[static_cast<Eigen::Index>(j)] * samples[j];

  Matrix cov = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    double w = weights[static_cast<Eigen::Index>(j)];
    if (w == 0.0) continue;
    Vector dz = samples[j] - mean;
    cov.noalias() += w * dz * dz.transpose();
  }
  cov = 0.5 * (cov + cov.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eigs(cov, Eigen::EigenvaluesOnly);
  if (eigs.info() != Eigen::Success || eigs.eigenvalues().minCoeff() < 1e-10)
    cov += 1e-10 * Matrix::Identity(d, d);
  return cov;
}

double local_accept_prob(double h_candidate, double h_current, double tau) {
  if (h_candidate == kInf) return 0.0;
  double l = (h_current - h_candidate) / tau;
  return l >= 0.0 ? 1.0 : std::exp(l);
}

namespace {

// The variation measure treats the objective as non-negative. Values that
// already are stay untouched (their natural scale is the yardstick the
// stopping rule cools against); otherwise lift the population so the running
// minimum maps to one.
double cov_shift(double running_min) {
  return running_min > 0.0 ? 0.0 : 1.0 - running_min;
}

}  // namespace

double coefficient_of_variation(const Vector& values) {
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    sum += values[i];
    ++count;
  }
  if (count == 0) throw DegeneratePopulation("coefficient_of_variation: no finite values");
  double mean = sum / static_cast<double>(count);
  if (mean == 0.0) throw std::invalid_argument("coefficient_of_variation: zero mean");
  double ss = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    double d = values[i] - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(count)) / mean;
}

LevelProposal::LevelProposal(const std::vector<Vector>& markers, Vector norm_weights,
                             Vector marker_h, double tau, const Matrix& sigma,
                             double spread_local, double spread_retry)
    : markers_(&markers),
      weights_(std::move(norm_weights)),
      marker_h_(std::move(marker_h)),
      tau_(tau) {
  weight_cdf_ = cumulative_weights(weights_);
  const Eigen::Index d = sigma.rows();

  Eigen::LLT<Matrix> llt_local((spread_local * sigma).eval());
  Eigen::LLT<Matrix> llt_retry((spread_retry * sigma).eval());
  if (llt_local.info() != Eigen::Success || llt_retry.info() != Eigen::Success)
    throw std::runtime_error("LevelProposal: proposal covariance is not positive definite");
  chol_local_ = llt_local.matrixL();
  chol_retry_ = llt_retry.matrixL();

  log_norm_ = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) -
              chol_local_.diagonal().array().log().sum();
}

double LevelProposal::log_density(const Vector& z, double h_z) const {
  if (h_z == kInf) return -kInf;
  // Online log-sum-exp over the mixture terms.
  double max_term = -kInf;
  double sum = 0.0;
  Vector dz(z.size());
  const auto& markers = *markers_;
  for (std::size_t j = 0; j < markers.size(); ++j) {
    double w = weights_[static_cast<Eigen::Index>(j)];
    if (w == 0.0) continue;
    dz = z - markers[j];
    chol_local_.triangularView<Eigen::Lower>().solveInPlace(dz);
    double term = std::log(w) + log_norm_ - 0.5 * dz.squaredNorm() +
                  std::min(0.0, (marker_h_[static_cast<Eigen::Index>(j)] - h_z) / tau_);
    if (term == -kInf) continue;
    if (term > max_term) {
      sum = sum * std::exp(max_term - term) + 1.0;
      max_term = term;
    } else {
      sum += std::exp(term - max_term);
    }
  }
  if (max_term == -kInf) return -kInf;
  return max_term + std::log(sum);
}

Vector LevelProposal::propose_local(RandomStream& rng, int* marker_index) const {
  int j = rng.categorical(weight_cdf_);
  if (marker_index) *marker_index = j;
  return rng.gaussian((*markers_)[static_cast<std::size_t>(j)], chol_local_);
}

Vector LevelProposal::propose_retry(RandomStream& rng, const Vector& current) const {
  return rng.gaussian(current, chol_retry_);
}

double global_accept_prob(double h_candidate, double h_current, double logp_candidate,
                          double logp_current, double tau) {
  double l = global_accept_log(h_candidate, h_current, logp_candidate, logp_current, tau);
  return l == -kInf ? 0.0 : std::exp(l);
}

double delayed_accept_prob(double h_retry, double h_current, double ag_from_retry,
                           double ag_from_current, double tau) {
  if (1.0 - ag_from_current < 1e-300) return 0.0;
  if (h_retry == kInf || ag_from_retry >= 1.0) return 0.0;
  double l = (h_current - h_retry) / tau + std::log1p(-ag_from_retry) - std::log1p(-ag_from_current);
  return l >= 0.0 ? 1.0 : std::exp(l);
}

void KernelStats::operator+=(const KernelStats& o) {
  local_attempts += o.local_attempts;
  local_accepts += o.local_accepts;
  global_attempts += o.global_attempts;
  global_accepts += o.global_accepts;
  dr_attempts += o.dr_attempts;
  dr_accepts += o.dr_accepts;
  dr_degenerate += o.dr_degenerate;
}

KernelState make_kernel_state(const LevelProposal& proposal, Vector z, double h) {
  KernelState state;
  state.log_density = proposal.log_density(z, h);
  state.z = std::move(z);
  state.h = h;
  return state;
}

KernelState kernel_step(const LevelProposal& proposal, const Objective& objective,
                        RandomStream& rng, KernelState current, KernelStats& stats) {
  const double tau = proposal.tau();
  ++stats.local_attempts;
  int marker = 0;
  Vector candidate = proposal.propose_local(rng, &marker);
  double h_candidate = objective(candidate);
  double alpha_local = local_accept_prob(h_candidate, proposal.marker_h(marker), tau);
  if (!(rng.uniform() < alpha_local)) return current;

  ++stats.local_accepts;
  ++stats.global_attempts;
  double logp_candidate = proposal.log_density(candidate, h_candidate);
  double ag_log = global_accept_log(h_candidate, current.h, logp_candidate,
                                    current.log_density, tau);
  if (ag_log != -kInf && std::log(rng.uniform()) < ag_log) {
    ++stats.global_accepts;
    return {std::move(candidate), h_candidate, logp_candidate};
  }

  // Delayed rejection: one retry from a non-decayed Gaussian around the
  // current state, accepted so that detailed balance still holds for the
  // composed two-stage move.
  ++stats.dr_attempts;
  Vector retry = proposal.propose_retry(rng, current.z);
  double h_retry = objective(retry);
  if (h_retry == kInf) return current;
  double logp_retry = proposal.log_density(retry, h_retry);
  double ag_retry_log = global_accept_log(h_candidate, h_retry, logp_candidate,
                                          logp_retry, tau);
  double denom = log1mexp(ag_log);
  if (denom < -690.0) {  // 1 - alpha_g below ~1e-300
    ++stats.dr_degenerate;
    return current;
  }
  double a2_log = std::min(0.0, (current.h - h_retry) / tau +
                                    log1mexp(ag_retry_log) - denom);
  if (a2_log != -kInf && std::log(rng.uniform()) < a2_log) {
    ++stats.dr_accepts;
    return {std::move(retry), h_retry, logp_retry};
  }
  return current;
}

namespace {

struct ChainTask {
  int marker = 0;   // marker index, also the chain's RNG identity
  int length = 0;
  int offset = 0;   // slot range [offset, offset + length) in the level output
};

void advance_chain(const ChainTask& task, const AnnealingLevel& previous,
                   const LevelProposal& proposal, const Objective& objective,
                   const SamplerConfig& config, int level_index,
                   std::vector<Vector>& out_samples, Vector& out_h, KernelStats& stats) {
  RandomStream rng = RandomStream::for_chain(config.master_seed, level_index, task.marker);
  KernelState state = make_kernel_state(
      proposal, previous.samples[static_cast<std::size_t>(task.marker)],
      previous.h_values[task.marker]);

  for (int step = 0; step < task.length; ++step) {
    state = kernel_step(proposal, objective, rng, std::move(state), stats);
    out_samples[static_cast<std::size_t>(task.offset + step)] = state.z;
    out_h[task.offset + step] = state.h;
  }
}

}  // namespace

AnnealingLevel run_level(const AnnealingLevel& previous, const Objective& objective,
                         const SamplerConfig& config, int level_index,
                         double h_running_min) {
  const int n = config.sample_count;

  AnnealingLevel level;
  level.index = level_index;
  level.temperature = solve_temperature(previous.h_values, previous.temperature,
                                        config.ess_gamma, config.tau_floor,
                                        config.mode == SamplerConfig::Mode::sample);
  level.norm_weights = importance_weights(previous.h_values, level.temperature,
                                          previous.temperature);
  level.proposal_cov = weighted_covariance(previous.samples, level.norm_weights);
  level.spread = spread_at(config.initial_spread, config.spread_decay, level_index);

  LevelProposal proposal(previous.samples, level.norm_weights, previous.h_values,
                         level.temperature, level.proposal_cov, level.spread,
                         config.initial_spread);

  // Chain allocation: Multinomial(N; weights) drawn from the level stream
  // (chain ids occupy 0..N-1, the level stream uses id N).
  RandomStream level_rng = RandomStream::for_chain(config.master_seed, level_index, n);
  std::vector<double> cdf = cumulative_weights(level.norm_weights);
  std::vector<int> lengths(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) ++lengths[static_cast<std::size_t>(level_rng.categorical(cdf))];

  std::vector<ChainTask> tasks;
  int offset = 0;
  for (int j = 0; j < n; ++j) {
    if (lengths[static_cast<std::size_t>(j)] == 0) continue;
    tasks.push_back({j, lengths[static_cast<std::size_t>(j)], offset});
    offset += lengths[static_cast<std::size_t>(j)];
  }

  level.samples.resize(static_cast<std::size_t>(n));
  level.h_values.resize(n);
  std::vector<KernelStats> stats(tasks.size());

  parallel_for_tasks(static_cast<int>(tasks.size()), resolve_threads(config.threads),
                     [&](int t) {
                       advance_chain(tasks[static_cast<std::size_t>(t)], previous, proposal,
                                     objective, config, level_index, level.samples,
                                     level.h_values, stats[static_cast<std::size_t>(t)]);
                     });

  KernelStats total;
  for (const KernelStats& s : stats) total += s;
  level.local_rate = total.local_attempts
                         ? static_cast<double>(total.local_accepts) / static_cast<double>(total.local_attempts)
                         : 0.0;
  level.global_rate = total.global_attempts
                          ? static_cast<double>(total.global_accepts) / static_cast<double>(total.global_attempts)
                          : 0.0;
  level.dr_rate = total.dr_attempts
                      ? static_cast<double>(total.dr_accepts) / static_cast<double>(total.dr_attempts)
                      : 0.0;
  if (total.dr_degenerate > 0)
    std::fprintf(stderr,
                 "aimsgp: level %d: %ld delayed-rejection retries skipped "
                 "(first-stage rejection probability vanished)\n",
                 level_index, total.dr_degenerate);

  double level_min = finite_min(level.h_values);
  double shift = cov_shift(std::min(h_running_min, level_min));
  level.cov_delta = coefficient_of_variation(Vector(level.h_values.array() + shift));
  return level;
}

SamplerResult run_annealing(const Objective& objective, const LevelZeroSampler& level0,
                            int dim, const SamplerConfig& config,
                            const LevelCallback& on_level) {
  config.validate();
  if (dim < 1) throw std::invalid_argument("run_annealing: dimension must be >= 1");
  const int n = config.sample_count;

  AnnealingLevel level;
  level.index = 0;
  level.temperature = kInf;
  level.norm_weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
  level.spread = config.initial_spread;

  RandomStream seed_rng = RandomStream::for_chain(config.master_seed, 0, n);
  level.samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vector z = level0(seed_rng);
    if (z.size() != dim)
      throw std::invalid_argument("run_annealing: level-zero sampler dimension mismatch");
    level.samples.push_back(std::move(z));
  }
  level.h_values.resize(n);
  parallel_for_tasks(n, resolve_threads(config.threads), [&](int i) {
    level.h_values[i] = objective(level.samples[static_cast<std::size_t>(i)]);
  });

  double running_min = finite_min(level.h_values);
  if (running_min == kInf)
    throw DegeneratePopulation("run_annealing: objective infinite on the whole initial level");
  level.cov_delta = coefficient_of_variation(Vector(level.h_values.array() + cov_shift(running_min)));

  SamplerResult result;
  result.delta0 = level.cov_delta;
  result.temperature_trace.push_back(level.temperature);
  result.map_h = kInf;

  auto record = [&](const AnnealingLevel& lvl) {
    LevelSummary s{lvl.index, lvl.temperature, lvl.cov_delta,
                   lvl.local_rate, lvl.global_rate, lvl.dr_rate};
    result.levels.push_back(s);
    for (int i = 0; i < n; ++i) {
      if (lvl.h_values[i] < result.map_h) {
        result.map_h = lvl.h_values[i];
        result.map_z = lvl.samples[static_cast<std::size_t>(i)];
      }
    }
    if (on_level) on_level(s);
  };
  record(level);

  result.stop_reason = StopReason::max_levels;
  for (int k = 1; k <= config.max_levels; ++k) {
    AnnealingLevel next = run_level(level, objective, config, k, running_min);
    running_min = std::min(running_min, finite_min(next.h_values));
    level = std::move(next);
    result.temperature_trace.push_back(level.temperature);
    record(level);

    if (level.cov_delta < config.stop_ratio * result.delta0) {
      result.stop_reason = StopReason::cov_rule;
      break;
    }
    if (config.mode == SamplerConfig::Mode::sample && level.temperature <= 1.0) {
      result.stop_reason = StopReason::sample_temperature_reached;
      break;
    }
    if (level.temperature <= config.tau_floor) {
      result.stop_reason = StopReason::temperature_floor;
      break;
    }
  }

  result.final_samples_z = std::move(level.samples);
  result.final_h = std::move(level.h_values);
  return result;
}

SamplerResult run(const TrainingSet& data, const SamplerConfig& config,
                  const LogPrior& prior, const LevelCallback& on_level) {
  data.validate();
  const int p = data.p();

  Objective objective = [&data, &prior](const Vector& z) {
    return neg_log_posterior(data, from_unconstrained(z), prior);
  };
  LevelZeroSampler level0 = [p](RandomStream& rng) { return meta_prior_sample(rng, p); };

  SamplerResult result = run_annealing(objective, level0, p + 1, config, on_level);
  result.final_samples.reserve(result.final_samples_z.size());
  for (const Vector& z : result.final_samples_z)
    result.final_samples.push_back(from_unconstrained(z));
  result.map_estimate = from_unconstrained(result.map_z);
  return result;
}

}  // namespace aims
