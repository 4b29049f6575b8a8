#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <iostream>

#include "experiment.hpp"
#include "plot.hpp"
#include "rpsd/error.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kDataError = 3;

int run(const std::string& config_path) {
  const auto config = rpsd::bench::load_config(config_path);
  const auto out = rpsd::bench::run_experiment(config);
  fmt::print("F* = {}\n", out.f_star);
  for (const auto& f : out.runs) fmt::print("wrote {}\n", f.string());
  for (const auto& f : out.medians) fmt::print("wrote {}\n", f.string());
  fmt::print("wrote {}\n", out.manifest.string());
  return 0;
}

int tune(const std::string& config_path, std::size_t target) {
  auto config = rpsd::bench::load_config(config_path);
  const auto problem = rpsd::bench::build_problem(config);
  // lambda1 scales the regularizer; tune_lambda1 only reads its kind and groups.
  const auto found = rpsd::tune_lambda1(problem.objective, problem.regularizer, target);
  fmt::print("lambda1 = {}\npattern_size = {}\nevaluations = {}\n", found.lambda, found.pattern_size,
             found.evaluations);
  return found.pattern_size == target ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized proximal subspace descent benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rpsd::bench::version());

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run every (algorithm, seed) pair of a config");
  run_cmd->add_option("--config", config_path, "JSON experiment config")->required();

  std::string criterion, out;
  bool median = false;
  std::vector<std::string> inputs;
  auto* plot_cmd = app.add_subcommand("plot", "Render run CSVs to SVG");
  plot_cmd->add_option("--criterion", criterion, "subopt-iters | pattern-iters | subopt-explored")->required();
  plot_cmd->add_option("--out", out, "SVG file")->required();
  plot_cmd->add_flag("--median", median, "Overlay the per-group median");
  plot_cmd->add_option("inputs", inputs, "Run CSVs or directories of them");

  std::size_t target = 10;
  auto* tune_cmd = app.add_subcommand("tune", "Find lambda1 giving a target pattern size at the solution");
  tune_cmd->add_option("--config", config_path, "JSON experiment config")->required();
  tune_cmd->add_option("--target", target, "Pattern size")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) return run(config_path);
    if (*tune_cmd) return tune(config_path, target);
    std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
    rpsd::bench::plot(paths, rpsd::bench::parse_criterion(criterion), out, median);
    return 0;
  } catch (const rpsd::DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kDataError;
  } catch (const rpsd::Error& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  }
}
