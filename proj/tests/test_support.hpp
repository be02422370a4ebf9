#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "aimsgp/gp.hpp"

// Shared fixtures kept in lockstep with tests/oracles/gen_values.py.

namespace support {

inline aims::TrainingSet oracle_training_set() {
  aims::Matrix x(7, 2);
  x << 0.10, 0.20,
       0.35, 0.90,
       0.50, 0.45,
       0.65, 0.10,
       0.80, 0.75,
       0.95, 0.30,
       0.25, 0.60;
  aims::Vector y(7);
  for (int i = 0; i < 7; ++i) y[i] = std::sin(3.0 * x(i, 0)) + x(i, 1) * x(i, 1);
  return aims::TrainingSet::with_linear_basis(x, y);
}

inline aims::HyperParams oracle_params() {
  aims::HyperParams phi;
  phi.lengths = aims::Vector(2);
  phi.lengths << 0.5, 1.25;
  phi.nugget = 0.01;
  return phi;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("aimsgp_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string write_file(const TempDir& dir, const std::string& name,
                              const std::string& contents) {
  std::string p = dir.file(name);
  std::ofstream out(p);
  out << contents;
  return p;
}

}  // namespace support
