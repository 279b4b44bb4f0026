#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsm/continuation.hpp"
#include "dsm/errors.hpp"
#include "dsm/linear_analysis.hpp"
#include "dsm/motility.hpp"
#include "dsm/pde_solver.hpp"

namespace dsm::cli {

/// Raised for malformed or invalid configuration; message names the field path.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::ConfigError, what) {}
};

struct MotilitySpec {
  std::string family = "logistic";
  double steepness = 8.0;
  double center = 1.0;
  double r0 = 1.0;
  double rate = 1.0;
  std::string kind;  // custom only: "constant" or "hill"
  double value = 1.0;
  double half = 1.0;
  double hill = 2.0;

  MotilityModel build() const;
};

struct InitSpec {
  std::string kind = "asymptotic";  // asymptotic | uniform_perturbed
  int j = 6;
  double epsilon = 0.01;
  double u1_scale = 1.0;
  double amplitude = 1e-2;
};

struct SimulateSpec {
  int n = 512;
  std::optional<double> dt;
  double t_end = 5000.0;
  double steady_tol = 1e-8;
  double snapshot_every = 1.0;
  double b_max = 100.0;
  std::string format = "csv";  // csv | binary
  InitSpec init;
  double noise = 0.0;
  bool noise_mirror = true;
};

struct ContinueSpec {
  int j = 6;
  double sigma_min = 0.05;
  double ds = 1e-3;
  ContinuationOptions options;
};

struct ExperimentConfig {
  ModelParams params{1.0, 0.0, 20.0};
  MotilitySpec motility;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  int j_max = 0;  // 0: default window
  std::vector<int> modes;  // empty: 1..i_c
  SimulateSpec simulate;
  ContinueSpec cont;
  int reproduce_n = 512;

  /// FNV-1a of the canonical JSON of the input, output_dir excluded.
  std::string hash;

  SimConfig sim_config() const;
};

/// Parses and validates; unknown keys and type mismatches raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// The default setup: logistic k = 8, D = 1, l = 20.
ExperimentConfig default_config();

std::string fnv1a_hex(const std::string& data);

}  // namespace dsm::cli
