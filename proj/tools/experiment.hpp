#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpsd/model.hpp"
#include "rpsd/prox.hpp"
#include "rpsd/solver.hpp"
#include "rpsd/synthetic.hpp"

namespace rpsd::bench {

struct AlgorithmSpec {
  enum class Kind { Pgd, Rpsd, Arpsd };
  Kind kind = Kind::Pgd;
  /// Share of the family sampled per iteration, in (0, 100].
  double percent = 10.0;
  /// 1: Bernoulli with probability percent/100; 2: fixed sample size.
  int option = 2;
  Adaptation adaptation = Adaptation::IdentificationDriven;
  std::size_t cadence = 50;
  std::optional<double> beta;
  /// File prefix; derived from kind and percent when empty.
  std::string label;
};

struct ExperimentConfig {
  std::string name;
  enum class Loss { Logistic, LeastSquares };
  Loss loss = Loss::Logistic;

  std::optional<std::filesystem::path> dataset;
  std::optional<std::size_t> dimension;
  std::optional<SyntheticSpec> synthetic;

  /// lambda2 = lambda2_value, or 1/m when lambda2_per_sample is set.
  double lambda2_value = 0.0;
  bool lambda2_per_sample = false;

  enum class RegKind { L1, Group, TV };
  RegKind reg_kind = RegKind::L1;
  double lambda1 = 0.0;
  std::size_t group_size = 10;

  std::vector<AlgorithmSpec> algorithms;
  std::vector<std::uint64_t> seeds{1};
  std::size_t max_iters = 1000;
  /// Runs stop once F - F* drops below this (0 disables).
  double stop_suboptimality = 0.0;
  double reference_tol = 1e-12;
  std::filesystem::path output_dir = "out";
  std::size_t jobs = 1;
  bool median = true;
};

/// Throws InvalidConfiguration on bad fields. Relative dataset paths resolve
/// against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Normalized form with every default filled in.
nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a over the normalized JSON text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::string algorithm_label(const AlgorithmSpec& spec);

struct Problem {
  std::shared_ptr<const Dataset> data;
  SmoothObjective objective;
  Regularizer regularizer;
  SubspaceFamily family;
};

/// Loads or generates the data and builds objective, regularizer and family.
Problem build_problem(const ExperimentConfig& config);

SolverConfig solver_config(const AlgorithmSpec& spec, const SubspaceFamily& family, std::size_t max_iters,
                           std::uint64_t seed);

struct ExperimentOutput {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> runs;
  std::vector<std::filesystem::path> medians;
  std::filesystem::path manifest;
  double f_star = 0.0;
};

/// Runs every (algorithm, seed) pair and writes CSVs and a manifest.
/// RPSD_OUTPUT_DIR, when set, replaces config.output_dir.
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Version string baked in at build time.
std::string version();

}  // namespace rpsd::bench
