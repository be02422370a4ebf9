#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "aimsgp/gp.hpp"
#include "aimsgp/rng.hpp"
#include "aimsgp/transforms.hpp"

namespace aims {

// Annealed importance-resampling MCMC over the unconstrained hyper-parameter
// space. Each level tempers the target exp(-H(z)/tau_k), with tau_k chosen
// so the effective sample size of the re-weighted previous level stays at
// gamma * N. Chains combine an importance-mixture independence proposal
// (local pre-screen + global Metropolis correction) with one stage of
// delayed rejection.

struct SamplerConfig {
  int sample_count = 1000;        // N, per level
  double ess_gamma = 0.5;         // target ESS fraction
  double spread_decay = 0.5;      // nu: proposal spread multiplier per level
  double initial_spread = 1.0;    // c_0
  double stop_ratio = 0.1;        // alpha: stop when delta_k < alpha * delta_0
  double tau_floor = 1e-6;        // lowest temperature considered
  enum class Mode { optimize, sample } mode = Mode::optimize;
  int max_levels = 50;
  std::uint64_t master_seed = 0;
  int threads = 0;                // 0 = hardware concurrency

  void validate() const;          // throws std::invalid_argument
};

// Population whose objective values give no usable importance weights
// (everything infinite, or fewer than two finite values where required).
class DegeneratePopulation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Objective in z-space; +inf marks infeasible points.
using Objective = std::function<double(const Vector&)>;
// Draws one level-zero sample in z-space.
using LevelZeroSampler = std::function<Vector(RandomStream&)>;

struct AnnealingLevel {
  int index = 0;
  double temperature = 0.0;           // tau_k (inf at level 0)
  std::vector<Vector> samples;        // N z-vectors
  Vector h_values;                    // objective at each sample
  Vector norm_weights;                // weights used to build this level
  Matrix proposal_cov;                // Sigma_k (empty at level 0)
  double spread = 0.0;                // c_k
  double cov_delta = 0.0;             // delta_k

  // Acceptance diagnostics. Rates are accept/attempt, 0 when unattempted.
  double local_rate = 0.0;
  double global_rate = 0.0;
  double dr_rate = 0.0;
};

// Normalized importance weights for moving the population from temperature
// tau_old to tau_new: w_j proportional to exp(-h_j (1/tau_new - 1/tau_old)),
// computed against the finite minimum so no weight overflows. h = +inf maps
// to weight 0. Throws DegeneratePopulation when every value is infinite.
Vector importance_weights(const Vector& h_values, double tau_new, double tau_old);

// Solves sum(w^2)/(sum w)^2 = 1/(gamma N) for the next temperature by
// bisection on the inverse-temperature increment (tolerance 1e-12, at most
// 200 iterations). Returns tau_floor when even full cooling keeps the ESS
// above gamma N or when the finite values are all identical; the result is
// clamped to at least 1 when sample_mode is set.
double solve_temperature(const Vector& h_values, double tau_old, double gamma,
                         double tau_floor, bool sample_mode = false);

// Weighted covariance around the weighted mean; symmetrized, with a 1e-10
// ridge added when the smallest eigenvalue drops below 1e-10.
Matrix weighted_covariance(const std::vector<Vector>& samples, const Vector& weights);

// min{1, exp(-(h_candidate - h_current) / tau)}.
double local_accept_prob(double h_candidate, double h_current, double tau);

// Population standard deviation over mean. Infinite entries are ignored;
// callers shift values positive before use.
double coefficient_of_variation(const Vector& values);

// Frozen per-level proposal context: markers, weights, tempered objective
// values and the Cholesky factor of the scaled proposal covariance.
class LevelProposal {
 public:
  LevelProposal(const std::vector<Vector>& markers, Vector norm_weights,
                Vector marker_h, double tau, const Matrix& sigma,
                double spread_local, double spread_retry);

  // log of the importance-mixture proposal density
  //   p_hat(z) = sum_j w_j N(z; z_j, c Sigma) min{1, exp(-(h_z - h_j)/tau)}
  // evaluated with log-sum-exp; -inf when every term vanishes.
  double log_density(const Vector& z, double h_z) const;

  // Draws a candidate for the local stage: marker index from the weights,
  // then a Gaussian step around that marker.
  Vector propose_local(RandomStream& rng, int* marker_index) const;
  // Second-stage (delayed rejection) candidate around the current state,
  // using the level-entry spread c_0 rather than c_k.
  Vector propose_retry(RandomStream& rng, const Vector& current) const;

  double tau() const { return tau_; }
  double marker_h(int j) const { return marker_h_[j]; }
  const Matrix& chol_local() const { return chol_local_; }

 private:
  const std::vector<Vector>* markers_;
  Vector weights_;
  Vector marker_h_;
  std::vector<double> weight_cdf_;
  double tau_;
  Matrix chol_local_;    // chol(c_k Sigma_k)
  Matrix chol_retry_;    // chol(c_0 Sigma_k)
  double log_norm_ = 0.0;  // Gaussian log-normalization for chol_local_
};

// min{1, exp((-h_cand + h_curr)/tau + logp_curr - logp_cand)} with the
// conventions: candidate with log p_hat = -inf is rejected; current state
// with log p_hat = -inf accepts with probability 1.
double global_accept_prob(double h_candidate, double h_current, double logp_candidate,
                          double logp_current, double tau);

// Second-stage acceptance for delayed rejection, given the first candidate's
// global acceptance probabilities from the retry state (ag_from_retry) and
// from the current state (ag_from_current). Degenerate denominators
// (1 - ag_from_current below 1e-300) reject.
double delayed_accept_prob(double h_retry, double h_current, double ag_from_retry,
                           double ag_from_current, double tau);

// Chain state threaded through kernel_step; log_density caches p_hat at z.
struct KernelState {
  Vector z;
  double h = 0.0;
  double log_density = 0.0;
};

struct KernelStats {
  long local_attempts = 0, local_accepts = 0;
  long global_attempts = 0, global_accepts = 0;
  long dr_attempts = 0, dr_accepts = 0;
  long dr_degenerate = 0;

  void operator+=(const KernelStats& o);
};

KernelState make_kernel_state(const LevelProposal& proposal, Vector z, double h);

// One local + global + delayed-rejection transition of the chain targeting
// exp(-h(z)/tau). Returns the current state unchanged on rejection.
KernelState kernel_step(const LevelProposal& proposal, const Objective& objective,
                        RandomStream& rng, KernelState current, KernelStats& stats);

// Runs one annealing level: solves the temperature, re-weights, allocates
// chains multinomially over the markers, and advances each chain with the
// local/global/delayed-rejection kernel. Chains may run on several threads;
// results depend only on (master_seed, level index, chain index).
// h_running_min is the smallest objective value seen so far (for the
// coefficient-of-variation shift).
AnnealingLevel run_level(const AnnealingLevel& previous, const Objective& objective,
                         const SamplerConfig& config, int level_index,
                         double h_running_min);

enum class StopReason { cov_rule, temperature_floor, sample_temperature_reached, max_levels };

struct LevelSummary {
  int index = 0;
  double temperature = 0.0;
  double cov_delta = 0.0;
  double local_rate = 0.0;
  double global_rate = 0.0;
  double dr_rate = 0.0;
};

using LevelCallback = std::function<void(const LevelSummary&)>;

struct SamplerResult {
  std::vector<LevelSummary> levels;
  std::vector<Vector> final_samples_z;
  std::vector<HyperParams> final_samples;
  Vector final_h;
  HyperParams map_estimate;        // lowest-objective sample seen, first occurrence
  double map_h = 0.0;
  Vector map_z;
  std::vector<double> temperature_trace;
  double delta0 = 0.0;
  StopReason stop_reason = StopReason::max_levels;

  bool converged() const { return stop_reason != StopReason::max_levels; }
};

// Generic driver over an arbitrary objective (used directly by the
// synthetic-target tests). dim is the z-space dimension.
SamplerResult run_annealing(const Objective& objective, const LevelZeroSampler& level0,
                            int dim, const SamplerConfig& config,
                            const LevelCallback& on_level = {});

// GP-facing driver: objective is the marginalized negative log posterior
// composed with from_unconstrained, level zero is the meta-prior.
SamplerResult run(const TrainingSet& data, const SamplerConfig& config,
                  const LogPrior& prior = log_prior_flat,
                  const LevelCallback& on_level = {});

}  // namespace aims
