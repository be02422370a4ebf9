#include "aimsgp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "aimsgp/transforms.hpp"

namespace aims {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected an integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected an unsigned integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where + ": expected true/false, got '" + v + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(trim(f));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

RandomStream test_point_stream(std::uint64_t seed) {
  return RandomStream(splitmix64(seed ^ 0x7e57da7a5e7b17ULL));
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::cov_rule: return "cov_rule";
    case StopReason::temperature_floor: return "temperature_floor";
    case StopReason::sample_temperature_reached: return "sample_temperature_reached";
    case StopReason::max_levels: return "max_levels";
  }
  return "unknown";
}

void write_levels_csv(const std::string& path, const std::vector<LevelSummary>& levels) {
  std::ofstream out(path);
  out << "level,tau,cov_delta,accept_local,accept_global,accept_dr\n";
  for (const LevelSummary& s : levels)
    out << s.index << ',' << fmt(s.temperature) << ',' << fmt(s.cov_delta) << ','
        << fmt(s.local_rate) << ',' << fmt(s.global_rate) << ',' << fmt(s.dr_rate) << '\n';
}

void write_samples_csv(const std::string& path, const SamplerResult& result, int p) {
  std::ofstream out(path);
  for (int i = 0; i < p; ++i) out << "log_phi" << (i + 1) << ',';
  out << "nugget,h\n";
  for (std::size_t j = 0; j < result.final_samples_z.size(); ++j) {
    const Vector& z = result.final_samples_z[j];
    for (int i = 0; i < p; ++i) out << fmt(z[i]) << ',';
    out << fmt(result.final_samples[j].nugget) << ','
        << fmt(result.final_h[static_cast<Eigen::Index>(j)]) << '\n';
  }
}

void write_training_csv(const std::string& path, const TrainingSet& data) {
  std::ofstream out(path);
  for (int c = 0; c < data.p(); ++c) out << 'x' << (c + 1) << ',';
  out << "y\n";
  for (int r = 0; r < data.n(); ++r) {
    for (int c = 0; c < data.p(); ++c) out << fmt(data.inputs(r, c)) << ',';
    out << fmt(data.outputs[r]) << '\n';
  }
}

struct LoadedSamples {
  std::vector<HyperParams> phis;
  Vector h;
  std::vector<Vector> log_lengths;
};

LoadedSamples read_samples_csv(const std::string& path, int p) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": missing samples artifact (run fit first)");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty samples artifact");
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != p + 2)
      throw ConfigError(path + ": line " + std::to_string(line_no) + ": expected " +
                        std::to_string(p + 2) + " fields");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields)
      row.push_back(parse_double(f, path + ": line " + std::to_string(line_no)));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(path + ": no samples in artifact");

  LoadedSamples out;
  out.h.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    HyperParams phi;
    phi.lengths.resize(p);
    Vector z(p);
    for (int c = 0; c < p; ++c) {
      z[c] = rows[r][static_cast<std::size_t>(c)];
      phi.lengths[c] = std::exp(z[c]);
    }
    phi.nugget = rows[r][static_cast<std::size_t>(p)];
    out.h[static_cast<Eigen::Index>(r)] = rows[r][static_cast<std::size_t>(p) + 1];
    out.phis.push_back(std::move(phi));
    out.log_lengths.push_back(std::move(z));
  }
  return out;
}

struct TestPoints {
  Matrix inputs;           // unit-cube coordinates fed to the emulator
  Matrix reported_inputs;  // coordinates echoed to predictions.csv
  Vector actuals;
  bool has_actuals = false;
};

TestPoints resolve_test_points(const RunConfig& config, const json& summary, int p) {
  TestPoints tp;
  std::string spec = config.test_dataset;
  const std::string dataset = summary.at("dataset").get<std::string>();
  if (spec.empty()) {
    if (!has_builtin_simulator(dataset))
      throw ConfigError("predict: test_dataset is required for file-backed datasets "
                        "(use test_dataset=file:<path>)");
    spec = "lhs:100";
  }

  if (spec.rfind("lhs:", 0) == 0) {
    long long count = parse_int(spec.substr(4), "test_dataset");
    if (count < 1) throw ConfigError("test_dataset: lhs count must be positive");
    RandomStream rng = test_point_stream(config.sampler.master_seed);
    tp.inputs = latin_hypercube(static_cast<int>(count), p, rng);
    tp.reported_inputs = tp.inputs;
    if (has_builtin_simulator(dataset)) {
      Model2dDenominator form = config.denominator_form();
      tp.actuals = evaluate_builtin(dataset, tp.inputs, form);
      tp.has_actuals = true;
    }
    return tp;
  }

  if (spec.rfind("file:", 0) == 0) {
    Dataset test = load_dataset(spec.substr(5), false);
    if (test.inputs.cols() != p)
      throw ConfigError("test_dataset: expected " + std::to_string(p) +
                        " input columns, got " + std::to_string(test.inputs.cols()));
    tp.reported_inputs = test.inputs;
    if (summary.value("rescaled", false)) {
      Dataset scaler;
      scaler.rescaled = true;
      scaler.inputs = test.inputs;  // only for the column count
      scaler.scale_low.resize(p);
      scaler.scale_high.resize(p);
      for (int c = 0; c < p; ++c) {
        scaler.scale_low[c] = summary.at("scale_low")[static_cast<std::size_t>(c)].get<double>();
        scaler.scale_high[c] = summary.at("scale_high")[static_cast<std::size_t>(c)].get<double>();
      }
      tp.inputs = scaler.apply_rescaling(test.inputs);
    } else {
      tp.inputs = test.inputs;
    }
    tp.actuals = test.outputs;
    tp.has_actuals = true;
    return tp;
  }

  throw ConfigError("test_dataset: expected lhs:<n> or file:<path>, got '" + spec + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (dataset.empty()) throw ConfigError("dataset: must not be empty");
  if (dataset.rfind("file:", 0) != 0 && !has_builtin_simulator(dataset))
    throw ConfigError("dataset: unknown dataset '" + dataset +
                      "' (expected branin, model2d, toy1d or file:<path>)");
  try {
    sampler.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  try {
    make_prior(prior);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (weighting != "uniform" && weighting != "importance")
    throw ConfigError("weighting: expected uniform or importance, got '" + weighting + "'");
  if (denominator != "verbatim" && denominator != "cubic")
    throw ConfigError("denominator: expected verbatim or cubic, got '" + denominator + "'");
  if (out_dir.empty()) throw ConfigError("out: must not be empty");
  if (design_points < 0) throw ConfigError("design_points: must be >= 0");
  if (!test_dataset.empty() && test_dataset.rfind("lhs:", 0) != 0 &&
      test_dataset.rfind("file:", 0) != 0)
    throw ConfigError("test_dataset: expected lhs:<n> or file:<path>, got '" + test_dataset + "'");
}

Model2dDenominator RunConfig::denominator_form() const {
  return denominator == "cubic" ? Model2dDenominator::cubic : Model2dDenominator::verbatim;
}

MixtureWeighting RunConfig::weighting_kind() const {
  return weighting == "importance" ? MixtureWeighting::importance : MixtureWeighting::uniform;
}

void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value,
                        const std::string& where) {
  if (key == "dataset") config.dataset = value;
  else if (key == "samples") config.sampler.sample_count = static_cast<int>(parse_int(value, where));
  else if (key == "ess_gamma") config.sampler.ess_gamma = parse_double(value, where);
  else if (key == "spread_decay") config.sampler.spread_decay = parse_double(value, where);
  else if (key == "initial_spread") config.sampler.initial_spread = parse_double(value, where);
  else if (key == "stop_ratio") config.sampler.stop_ratio = parse_double(value, where);
  else if (key == "tau_floor") config.sampler.tau_floor = parse_double(value, where);
  else if (key == "max_levels") config.sampler.max_levels = static_cast<int>(parse_int(value, where));
  else if (key == "seed") config.sampler.master_seed = parse_u64(value, where);
  else if (key == "threads") config.sampler.threads = static_cast<int>(parse_int(value, where));
  else if (key == "mode") {
    if (value == "optimize") config.sampler.mode = SamplerConfig::Mode::optimize;
    else if (value == "sample") config.sampler.mode = SamplerConfig::Mode::sample;
    else throw ConfigError(where + ": mode must be optimize or sample, got '" + value + "'");
  }
  else if (key == "prior") config.prior = value;
  else if (key == "weighting") config.weighting = value;
  else if (key == "denominator") config.denominator = value;
  else if (key == "out") config.out_dir = value;
  else if (key == "test_dataset") config.test_dataset = value;
  else if (key == "design_points") config.design_points = static_cast<int>(parse_int(value, where));
  else if (key == "rescale_inputs") config.rescale_inputs = parse_bool(value, where);
  else throw ConfigError(where + ": unknown key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
  RunConfig config;
  apply_config_file(config, path);
  return config;
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ": line " + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    apply_config_entry(config, key, value, path + ": line " + std::to_string(line_no));
  }
}

std::string render_config(const RunConfig& config) {
  std::ostringstream out;
  out << "dataset = " << config.dataset << '\n';
  out << "samples = " << config.sampler.sample_count << '\n';
  out << "ess_gamma = " << fmt(config.sampler.ess_gamma) << '\n';
  out << "spread_decay = " << fmt(config.sampler.spread_decay) << '\n';
  out << "initial_spread = " << fmt(config.sampler.initial_spread) << '\n';
  out << "stop_ratio = " << fmt(config.sampler.stop_ratio) << '\n';
  out << "tau_floor = " << fmt(config.sampler.tau_floor) << '\n';
  out << "mode = " << (config.sampler.mode == SamplerConfig::Mode::sample ? "sample" : "optimize") << '\n';
  out << "max_levels = " << config.sampler.max_levels << '\n';
  out << "seed = " << config.sampler.master_seed << '\n';
  out << "threads = " << config.sampler.threads << '\n';
  out << "prior = " << config.prior << '\n';
  out << "weighting = " << config.weighting << '\n';
  out << "denominator = " << config.denominator << '\n';
  out << "out = " << config.out_dir << '\n';
  if (!config.test_dataset.empty()) out << "test_dataset = " << config.test_dataset << '\n';
  out << "design_points = " << config.design_points << '\n';
  out << "rescale_inputs = " << (config.rescale_inputs ? "true" : "false") << '\n';
  return out.str();
}

int cmd_fit(const RunConfig& config, std::ostream& log) {
  config.validate();

  Dataset dataset;
  try {
    dataset = make_dataset(config.dataset, config.design_points, config.sampler.master_seed,
                           config.denominator_form(), config.rescale_inputs);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  TrainingSet data = dataset.training_set();
  try {
    data.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  LogPrior prior = make_prior(config.prior);

  auto t0 = std::chrono::steady_clock::now();
  LevelCallback progress = [&log](const LevelSummary& s) {
    log << "level=" << s.index << " tau=" << fmt(s.temperature)
        << " cov_delta=" << fmt(s.cov_delta) << " accept_local=" << fmt(s.local_rate)
        << " accept_global=" << fmt(s.global_rate) << " accept_dr=" << fmt(s.dr_rate)
        << '\n'
        << std::flush;
  };
  SamplerResult result = run(data, config.sampler, prior, progress);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::filesystem::create_directories(config.out_dir);
  auto path = [&](const char* name) {
    return (std::filesystem::path(config.out_dir) / name).string();
  };
  write_training_csv(path(kTrainingFile), data);
  write_samples_csv(path(kSamplesFile), result, data.p());
  write_levels_csv(path(kLevelsFile), result.levels);
  {
    std::ofstream out(path(kResolvedConfigFile));
    out << render_config(config);
  }

  json summary;
  summary["dataset"] = dataset.name;
  summary["n"] = data.n();
  summary["p"] = data.p();
  summary["seed"] = config.sampler.master_seed;
  summary["mode"] = config.sampler.mode == SamplerConfig::Mode::sample ? "sample" : "optimize";
  summary["prior"] = config.prior;
  summary["weighting"] = config.weighting;
  summary["denominator"] = config.denominator;
  summary["levels"] = result.levels.size();
  summary["final_tau"] = result.temperature_trace.back();
  summary["delta0"] = result.delta0;
  summary["final_cov_delta"] = result.levels.back().cov_delta;
  summary["converged"] = result.converged();
  summary["stop_reason"] = stop_reason_name(result.stop_reason);
  summary["wall_time_seconds"] = wall;
  summary["map"] =
      json{{"lengths", std::vector<double>(result.map_estimate.lengths.data(),
                                           result.map_estimate.lengths.data() +
                                               result.map_estimate.lengths.size())},
           {"nugget", result.map_estimate.nugget},
           {"h", result.map_h}};
  summary["rescaled"] = dataset.rescaled;
  if (dataset.rescaled) {
    summary["scale_low"] = std::vector<double>(dataset.scale_low.data(),
                                               dataset.scale_low.data() + dataset.scale_low.size());
    summary["scale_high"] = std::vector<double>(
        dataset.scale_high.data(), dataset.scale_high.data() + dataset.scale_high.size());
  }
  {
    std::ofstream out(path(kSummaryFile));
    out << summary.dump(2) << '\n';
  }

  log << "fit: dataset=" << dataset.name << " levels=" << result.levels.size()
      << " stop=" << stop_reason_name(result.stop_reason)
      << " map_h=" << fmt(result.map_h) << " wall_s=" << fmt(wall) << '\n';
  return result.converged() ? kExitOk : kExitNotConverged;
}

int cmd_predict(const RunConfig& config, std::ostream& log) {
  config.validate();
  auto path = [&](const char* name) {
    return (std::filesystem::path(config.out_dir) / name).string();
  };

  std::ifstream summary_in(path(kSummaryFile));
  if (!summary_in)
    throw ConfigError(path(kSummaryFile) + ": missing summary artifact (run fit first)");
  json summary = json::parse(summary_in, nullptr, true, true);
  const int p = summary.at("p").get<int>();

  Dataset train;
  try {
    train = load_dataset(path(kTrainingFile), false);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  TrainingSet data = train.training_set();
  data.validate();

  LoadedSamples samples = read_samples_csv(path(kSamplesFile), p);
  double final_tau = summary.value("final_tau", 1.0);
  MixtureEmulator mixture(data, samples.phis, samples.h, config.weighting_kind(), final_tau);

  TestPoints tp = resolve_test_points(config, summary, p);
  const int m = static_cast<int>(tp.inputs.rows());

  std::ofstream out(path(kPredictionsFile));
  for (int c = 0; c < p; ++c) out << 'x' << (c + 1) << ',';
  out << "mix_mean,mix_var,map_mean,map_var,actual,mix_resid,map_resid\n";

  Vector mix_means(m), map_means(m);
  for (int i = 0; i < m; ++i) {
    Vector x = tp.inputs.row(i).transpose();
    MixtureEmulator::Prediction mix = mixture.predict(x);
    MixtureEmulator::Prediction map = mixture.predict_map(x);
    mix_means[i] = mix.mean;
    map_means[i] = map.mean;
    for (int c = 0; c < p; ++c) out << fmt(tp.reported_inputs(i, c)) << ',';
    out << fmt(mix.mean) << ',' << fmt(mix.variance) << ',' << fmt(map.mean) << ','
        << fmt(map.variance) << ',';
    if (tp.has_actuals) {
      out << fmt(tp.actuals[i]) << ',';
      out << (mix.variance > 0.0 ? fmt((tp.actuals[i] - mix.mean) / std::sqrt(mix.variance)) : "")
          << ',';
      out << (map.variance > 0.0 ? fmt((tp.actuals[i] - map.mean) / std::sqrt(map.variance)) : "");
    } else {
      out << ",,";
    }
    out << '\n';
  }

  if (tp.has_actuals) {
    log << "predict: points=" << m << " rmse_mixture=" << fmt(rmse(mix_means, tp.actuals))
        << " rmse_map=" << fmt(rmse(map_means, tp.actuals)) << '\n';
  } else {
    log << "predict: points=" << m << " (no actuals, rmse skipped)\n";
  }
  return kExitOk;
}

int cmd_diagnose(const RunConfig& config, std::ostream& log) {
  config.validate();
  auto path = [&](const char* name) {
    return (std::filesystem::path(config.out_dir) / name).string();
  };

  std::ifstream in(path(kPredictionsFile));
  if (!in)
    throw ConfigError(path(kPredictionsFile) + ": missing predictions artifact (run predict first)");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path(kPredictionsFile) + ": empty artifact");
  std::vector<std::string> header = split_csv_line(line);
  const int cols = static_cast<int>(header.size());
  const int p = cols - 7;
  if (p < 1 || header[static_cast<std::size_t>(p)] != "mix_mean")
    throw ConfigError(path(kPredictionsFile) + ": unrecognized predictions schema");

  std::ofstream out(path(kResidualsFile));
  for (int c = 0; c < p; ++c) out << 'x' << (c + 1) << ',';
  out << "actual,mix_resid,map_resid,within_band\n";

  int rows = 0, computed = 0, within = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != cols)
      throw ConfigError(path(kPredictionsFile) + ": line " + std::to_string(line_no) +
                        ": expected " + std::to_string(cols) + " fields");
    ++rows;
    const std::string& actual = fields[static_cast<std::size_t>(p) + 4];
    const std::string& mix_resid = fields[static_cast<std::size_t>(p) + 5];
    const std::string& map_resid = fields[static_cast<std::size_t>(p) + 6];
    if (actual.empty()) continue;
    for (int c = 0; c < p; ++c) out << fields[static_cast<std::size_t>(c)] << ',';
    out << actual << ',' << mix_resid << ',' << map_resid << ',';
    if (!mix_resid.empty()) {
      ++computed;
      double r = parse_double(mix_resid, path(kPredictionsFile) + ": line " + std::to_string(line_no));
      bool in_band = std::abs(r) <= 1.96;
      within += in_band ? 1 : 0;
      out << (in_band ? 1 : 0);
    }
    out << '\n';
  }
  if (rows == 0) throw ConfigError(path(kPredictionsFile) + ": no prediction rows");

  json report;
  report["rows"] = rows;
  report["residuals_computed"] = computed;
  report["within_band"] = within;
  report["fraction_within_band"] =
      computed > 0 ? static_cast<double>(within) / static_cast<double>(computed) : 0.0;
  {
    std::ofstream rep(path(kDiagnoseReportFile));
    rep << report.dump(2) << '\n';
  }
  log << "diagnose: rows=" << rows << " residuals=" << computed << " within_1.96=" << within
      << " fraction=" << fmt(report["fraction_within_band"].get<double>()) << '\n';
  return kExitOk;
}

int cmd_demo(const RunConfig& config, std::ostream& log) {
  int fit_rc = cmd_fit(config, log);
  cmd_predict(config, log);
  cmd_diagnose(config, log);
  log << "demo: artifacts in " << config.out_dir << '\n';
  return fit_rc;
}

}  // namespace aims
