#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmp/models.hpp"
#include "pdmp/state.hpp"

namespace pdmp::cli {

struct CountingConfig {
  std::size_t replicas = 10000;
  std::vector<double> times{0.5, 1.0, 2.0};
  std::size_t max_n = 10;
};

struct GridConfig {
  std::size_t nodes = 200;
  double y_max = 15.0;
  double dt = 0.01;
  bool write_matrices = false;
};

struct DriftConfig {
  std::size_t replicas = 100000;
  /// Empty selects the model's default probe points.
  std::vector<double> probes;
};

struct Tolerances {
  double w1 = 0.05;
  double oracle_w1 = 0.03;
  double factorization = 1e-6;
  double correspondence = 1e-6;
  double normalizer = 0.01;
};

struct ExperimentConfig {
  nlohmann::json model;
  std::uint64_t seed = 0;
  std::size_t replicas = 4;
  std::size_t steps = 312500;
  double burn_in_fraction = 0.2;
  std::size_t occupation_samples = 250000;
  std::optional<StatePoint> initial;
  CountingConfig counting;
  GridConfig grid;
  DriftConfig drift;
  Tolerances tolerances;
  std::string output_dir = "out";
};

/// Strict parse: unknown keys, wrong types and a missing seed raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTolerance = 3;

/// Each command writes its files into `out` and returns kExitOk or
/// kExitTolerance. Outputs depend only on the config, never on `threads`.
int cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out,
                 unsigned threads);
int cmd_correspondence(const ExperimentConfig& config, const std::filesystem::path& out,
                       unsigned threads);
int cmd_oracle(const ExperimentConfig& config, const std::filesystem::path& out,
               unsigned threads);
int cmd_diagnostics(const ExperimentConfig& config, const std::filesystem::path& out,
                    unsigned threads);

int run_command(const std::string& name, const ExperimentConfig& config,
                const std::filesystem::path& out, unsigned threads);

/// Full command-line entry point.
int main(int argc, char** argv);

}  // namespace pdmp::cli
