#include "aimsgp/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace aims {

namespace {

constexpr double kPi = std::numbers::pi;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& why) {
  throw std::runtime_error(path + ": line " + std::to_string(line) + ": " + why);
}

double toy_domain_high() { return 10.0; }

}  // namespace

double branin_modified(double x1, double x2) {
  double a = 15.0 * x1 - 5.0;
  double b = 15.0 * x2;
  double quad = b - 5.1 / (4.0 * kPi * kPi) * a * a + 5.0 / kPi * a - 6.0;
  return quad * quad + 10.0 * ((1.0 - 1.0 / (8.0 * kPi)) * std::cos(a) + 1.0) + 5.0 * a;
}

double model_2d(double x1, double x2, Model2dDenominator form) {
  double numer = 2300.0 * x1 * x1 * x1 + 1900.0 * x1 * x1 + 2092.0 * x1 + 60.0;
  double denom = form == Model2dDenominator::verbatim
                     ? 100.0 * x1 * x1 + 500.0 * x1 * x1 + 4.0 * x1 + 20.0
                     : 100.0 * x1 * x1 + 500.0 * x1 * x1 * x1 + 4.0 * x1 + 20.0;
  return (1.0 - std::exp(-0.5 / x2)) * numer / denom;
}

double toy_1d(double x) { return 5.0 + x + std::cos(x) + 0.5 * std::sin(3.0 * x); }

Matrix latin_hypercube(int n, int p, RandomStream& rng) {
  if (n < 1 || p < 1) throw std::invalid_argument("latin_hypercube: need n >= 1 and p >= 1");
  Matrix x(n, p);
  std::vector<int> strata(static_cast<std::size_t>(n));
  for (int d = 0; d < p; ++d) {
    std::iota(strata.begin(), strata.end(), 0);
    // Fisher-Yates with the stream's own uniforms, high index down.
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(rng.uniform() * static_cast<double>(i + 1));
      j = std::min(j, i);
      std::swap(strata[static_cast<std::size_t>(i)], strata[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < n; ++i) {
      double stratum = static_cast<double>(strata[static_cast<std::size_t>(i)]);
      double hi = (stratum + 1.0) / static_cast<double>(n);
      double v = (stratum + rng.uniform()) / static_cast<double>(n);
      if (v >= hi) v = std::nextafter(hi, 0.0);
      x(i, d) = v;
    }
  }
  return x;
}

TrainingSet Dataset::training_set() const {
  return TrainingSet::with_linear_basis(inputs, outputs);
}

Matrix Dataset::apply_rescaling(const Matrix& raw) const {
  if (!rescaled) return raw;
  if (raw.cols() != inputs.cols())
    throw std::invalid_argument("apply_rescaling: column count mismatch");
  Matrix out = raw;
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    double span = scale_high[c] - scale_low[c];
    if (span == 0.0) span = 1.0;
    out.col(c) = (raw.col(c).array() - scale_low[c]) / span;
  }
  return out;
}

Dataset load_dataset(const std::string& path, bool rescale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open dataset file");

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "missing header row");
  ++line_no;
  std::vector<std::string> header = split_csv(line);
  if (header.size() < 2) parse_fail(path, 1, "need at least one input column and one output column");
  const int p = static_cast<int>(header.size()) - 1;

  std::vector<std::vector<double>> rows;
  std::vector<int> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv(line);
    if (static_cast<int>(fields.size()) != p + 1)
      parse_fail(path, line_no, "expected " + std::to_string(p + 1) + " fields, got " +
                                    std::to_string(fields.size()));
    std::vector<double> row(static_cast<std::size_t>(p) + 1);
    for (int c = 0; c <= p; ++c) {
      const std::string& f = fields[static_cast<std::size_t>(c)];
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &pos);
      } catch (const std::exception&) {
        parse_fail(path, line_no, "field '" + f + "' is not a number");
      }
      if (pos != f.size()) parse_fail(path, line_no, "field '" + f + "' is not a number");
      if (!std::isfinite(v)) parse_fail(path, line_no, "non-finite value");
      row[static_cast<std::size_t>(c)] = v;
    }
    rows.push_back(std::move(row));
    row_lines.push_back(line_no);
  }
  if (rows.empty()) parse_fail(path, line_no, "no data rows");

  Dataset d;
  d.name = "file:" + path;
  d.inputs.resize(static_cast<Eigen::Index>(rows.size()), p);
  d.outputs.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < p; ++c) d.inputs(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    d.outputs[static_cast<Eigen::Index>(r)] = rows[r][static_cast<std::size_t>(p)];
  }

  for (Eigen::Index i = 0; i < d.inputs.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d.inputs.rows(); ++j)
      if ((d.inputs.row(i).array() == d.inputs.row(j).array()).all())
        parse_fail(path, row_lines[static_cast<std::size_t>(j)],
                   "duplicate design point (same inputs as line " +
                       std::to_string(row_lines[static_cast<std::size_t>(i)]) + ")");

  if (rescale) {
    d.scale_low.resize(p);
    d.scale_high.resize(p);
    for (int c = 0; c < p; ++c) {
      d.scale_low[c] = d.inputs.col(c).minCoeff();
      d.scale_high[c] = d.inputs.col(c).maxCoeff();
      double span = d.scale_high[c] - d.scale_low[c];
      if (span == 0.0)
        throw std::runtime_error(path + ": column " + std::to_string(c + 1) +
                                 " is constant, cannot rescale");
      d.inputs.col(c) = (d.inputs.col(c).array() - d.scale_low[c]) / span;
    }
    d.rescaled = true;
  }
  return d;
}

bool has_builtin_simulator(const std::string& name) {
  return name == "branin" || name == "model2d" || name == "toy1d";
}

Vector evaluate_builtin(const std::string& name, const Matrix& inputs,
                        Model2dDenominator form) {
  Vector y(inputs.rows());
  if (name == "branin") {
    if (inputs.cols() != 2) throw std::invalid_argument("branin expects 2 input columns");
    for (Eigen::Index i = 0; i < inputs.rows(); ++i)
      y[i] = branin_modified(inputs(i, 0), inputs(i, 1));
  } else if (name == "model2d") {
    if (inputs.cols() != 2) throw std::invalid_argument("model2d expects 2 input columns");
    for (Eigen::Index i = 0; i < inputs.rows(); ++i)
      y[i] = model_2d(inputs(i, 0), inputs(i, 1), form);
  } else if (name == "toy1d") {
    if (inputs.cols() != 1) throw std::invalid_argument("toy1d expects 1 input column");
    for (Eigen::Index i = 0; i < inputs.rows(); ++i)
      y[i] = toy_1d(inputs(i, 0) * toy_domain_high());
  } else {
    throw std::invalid_argument("unknown builtin dataset '" + name + "'");
  }
  return y;
}

Dataset make_dataset(const std::string& name, int design_points, std::uint64_t seed,
                     Model2dDenominator form, bool rescale_file_inputs) {
  if (name.rfind("file:", 0) == 0)
    return load_dataset(name.substr(5), rescale_file_inputs);
  if (!has_builtin_simulator(name))
    throw std::invalid_argument("unknown dataset '" + name +
                                "' (expected branin, model2d, toy1d or file:<path>)");

  int n = design_points;
  if (n == 0) n = name == "branin" ? 18 : name == "model2d" ? 30 : 8;
  int p = name == "toy1d" ? 1 : 2;
  if (n < p + 4)
    throw std::invalid_argument("dataset '" + name + "': need at least " +
                                std::to_string(p + 4) + " design points");

  RandomStream rng(splitmix64(seed ^ 0xa0d5a0d5a0d5a0d5ULL));
  Dataset d;
  d.name = name;
  d.inputs = latin_hypercube(n, p, rng);
  d.outputs = evaluate_builtin(name, d.inputs, form);
  if (name == "toy1d") {
    // The design lives on [0, 10]; inputs are stored rescaled to [0, 1].
    d.rescaled = true;
    d.scale_low = Vector::Zero(1);
    d.scale_high = Vector::Constant(1, toy_domain_high());
  }
  return d;
}

}  // namespace aims
