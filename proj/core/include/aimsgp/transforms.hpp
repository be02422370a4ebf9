#pragma once

#include <string>

#include "aimsgp/gp.hpp"
#include "aimsgp/rng.hpp"

namespace aims {

// Bijection between hyper-parameters and the unconstrained sampling space:
//   z_i     = log(phi_i)                        i = 1..p
//   z_delta = logit((nugget - l) / (1 - l))     l = kNuggetFloor
// The sampler runs entirely in z with symmetric proposals, so no Jacobian
// term appears anywhere in the acceptance ratios.

// Size p + 1: log length scales followed by the nugget coordinate.
// Throws std::domain_error when the nugget sits exactly on a bound (callers
// nudge by 1e-9 of the range before transforming).
Vector to_unconstrained(const HyperParams& phi);

// Total on finite z. Lengths are exp(z_i) clamped to the largest finite
// double; the nugget coordinate is mapped through a saturation-safe sigmoid
// and always lands inside [kNuggetFloor, 1].
HyperParams from_unconstrained(const Vector& z);

// One draw from the level-zero distribution: log length scales iid uniform
// on [-7, 7], nugget from Beta(1/2, 1/2) truncated to [kNuggetFloor, 1]
// (inverse-cdf in nugget space, then mapped to z).
Vector meta_prior_sample(RandomStream& rng, int p);

// Independent log-normal prior on each length scale (location mu, scale
// sigma of log phi_i); the nugget keeps its flat truncated support.
LogPrior make_lognormal_prior(double mu, double sigma);

// Parses "flat", "lognormal(mu,sigma)" or "lognormal:mu,sigma".
// Throws std::invalid_argument on anything else.
LogPrior make_prior(const std::string& name);

}  // namespace aims
