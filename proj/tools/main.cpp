#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "aimsgp/experiment.hpp"

namespace {

struct SubCmd {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string demo_dataset;
};

void add_flags(SubCmd& sub, bool with_dataset_flag) {
  sub.app->add_option("--config", sub.config_path, "Path to a key=value config file");
  const std::pair<const char*, const char*> specs[] = {
      {"seed", "Master random seed"},
      {"samples", "Population size per annealing level"},
      {"mode", "optimize or sample"},
      {"out", "Artifact directory (default: out)"},
      {"dataset", "branin, model2d, toy1d, or file:<path>"},
      {"prior", "flat or lognormal(mu,sigma)"},
      {"denominator", "verbatim or cubic (model2d only)"},
  };
  for (const auto& [key, help] : specs) {
    if (!with_dataset_flag && std::string(key) == "dataset") continue;
    sub.options[key] = sub.app->add_option(std::string("--") + key, sub.values[key], help);
  }
}

std::vector<std::pair<std::string, std::string>> flag_entries(const SubCmd& sub) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, opt] : sub.options)
    if (opt->count() > 0) out.emplace_back(key, sub.values.at(key));
  if (!sub.demo_dataset.empty()) out.emplace_back("dataset", sub.demo_dataset);
  return out;
}

aims::RunConfig assemble(const SubCmd& sub, bool reload_from_artifacts) {
  aims::RunConfig config;
  auto layer = [&](aims::RunConfig& c) {
    if (!sub.config_path.empty()) aims::apply_config_file(c, sub.config_path);
    for (const auto& [key, value] : flag_entries(sub))
      aims::apply_config_entry(c, key, value, "--" + key);
  };
  layer(config);

  if (reload_from_artifacts) {
    auto resolved = std::filesystem::path(config.out_dir) / aims::kResolvedConfigFile;
    if (std::filesystem::exists(resolved)) {
      std::string out_dir = config.out_dir;
      config = aims::RunConfig{};
      aims::apply_config_file(config, resolved.string());
      layer(config);
      config.out_dir = out_dir;
    }
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process emulation with annealed importance hyper-parameter search"};
  app.require_subcommand(1);

  SubCmd fit, predict, diagnose, demo;
  fit.app = app.add_subcommand("fit", "Sample hyper-parameters and write run artifacts");
  predict.app = app.add_subcommand("predict", "Emulate a test set from fit artifacts");
  diagnose.app = app.add_subcommand("diagnose", "Standardized-residual report from predictions");
  demo.app = app.add_subcommand("demo", "fit + predict + diagnose on a built-in dataset");
  add_flags(fit, true);
  add_flags(predict, true);
  add_flags(diagnose, true);
  add_flags(demo, false);
  demo.app->add_option("dataset", demo.demo_dataset, "branin, model2d, or toy1d")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return aims::kExitUsage;
  }

  try {
    if (app.got_subcommand(fit.app)) return aims::cmd_fit(assemble(fit, false), std::cout);
    if (app.got_subcommand(predict.app))
      return aims::cmd_predict(assemble(predict, true), std::cout);
    if (app.got_subcommand(diagnose.app))
      return aims::cmd_diagnose(assemble(diagnose, true), std::cout);
    return aims::cmd_demo(assemble(demo, false), std::cout);
  } catch (const aims::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return aims::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
