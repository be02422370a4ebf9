#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "aimsgp/gp.hpp"
#include "aimsgp/rng.hpp"

namespace aims {

// Modified Branin surface on the unit square: the usual Branin terms plus a
// 5 x1bar slope term, with x1bar = 15 x1 - 5 and x2bar = 15 x2.
double branin_modified(double x1, double x2);

enum class Model2dDenominator {
  verbatim,  // 100 x1^2 + 500 x1^2 + 4 x1 + 20, kept exactly as published
  cubic,     // 500 x1^3 variant
};

// Two-input rational test model on the unit square.
double model_2d(double x1, double x2,
                Model2dDenominator form = Model2dDenominator::verbatim);

// One-dimensional toy response 5 + x + cos(x) + 0.5 sin(3x).
double toy_1d(double x);

// n x p maximin-free Latin hypercube on [0,1)^p: per dimension, one point in
// each of the n strata, stratum order shuffled independently.
Matrix latin_hypercube(int n, int p, RandomStream& rng);

struct Dataset {
  std::string name;
  Matrix inputs;    // possibly rescaled to the unit hypercube
  Vector outputs;
  bool rescaled = false;
  Vector scale_low;   // original per-column minima (when rescaled)
  Vector scale_high;  // original per-column maxima

  TrainingSet training_set() const;
  // Maps raw inputs through the recorded affine rescaling (identity when the
  // dataset was not rescaled).
  Matrix apply_rescaling(const Matrix& raw) const;
};

// Loads a CSV with a header row and columns x1..xp followed by y. Errors
// mention the offending line number. With rescale set, inputs are min-max
// mapped to [0,1] per column and the affine map is recorded; applying the
// loader's rescaling to an already-rescaled dataset is the identity.
Dataset load_dataset(const std::string& path, bool rescale = false);

// Built-in dataset registry. Names: "branin" (default 18-point design),
// "model2d" (default 30), "toy1d" (default 8, on [0,10] rescaled to [0,1]),
// or "file:<path>". design_points == 0 keeps the default; seed drives the
// Latin hypercube.
Dataset make_dataset(const std::string& name, int design_points, std::uint64_t seed,
                     Model2dDenominator form = Model2dDenominator::verbatim,
                     bool rescale_file_inputs = true);

// True when the named dataset has a simulator that can label fresh points.
bool has_builtin_simulator(const std::string& name);

// Evaluates the named builtin simulator at unit-cube inputs.
Vector evaluate_builtin(const std::string& name, const Matrix& inputs,
                        Model2dDenominator form = Model2dDenominator::verbatim);

}  // namespace aims
