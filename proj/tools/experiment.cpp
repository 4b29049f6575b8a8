#include "experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "csv.hpp"
#include "rpsd/error.hpp"

#ifndef RPSD_VERSION
#define RPSD_VERSION "unknown"
#endif

namespace rpsd::bench {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidConfiguration(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw InvalidConfiguration("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidConfiguration("bad value for '" + std::string(key) + "' in " + where);
  }
}

SyntheticSpec parse_synthetic(const json& j, ExperimentConfig::Loss loss) {
  reject_unknown(j, {"samples", "dimension", "planted", "shape", "noise", "classification", "one_hot_groups", "seed"},
                 "synthetic");
  SyntheticSpec s;
  s.samples = get<std::size_t>(j, "samples", "synthetic", s.samples);
  s.dimension = get<std::size_t>(j, "dimension", "synthetic", s.dimension);
  s.planted = get<std::size_t>(j, "planted", "synthetic", s.planted);
  const auto shape = get<std::string>(j, "shape", "synthetic", "sparse");
  if (shape == "sparse") s.shape = PlantedShape::Sparse;
  else if (shape == "piecewise") s.shape = PlantedShape::PiecewiseConstant;
  else throw InvalidConfiguration("synthetic shape must be 'sparse' or 'piecewise'");
  s.noise = get<double>(j, "noise", "synthetic", s.noise);
  s.classification = get<bool>(j, "classification", "synthetic", loss == ExperimentConfig::Loss::Logistic);
  s.one_hot_groups = get<std::size_t>(j, "one_hot_groups", "synthetic", 0);
  s.seed = get<std::uint64_t>(j, "seed", "synthetic", s.seed);
  return s;
}

AlgorithmSpec parse_algorithm(const json& j) {
  reject_unknown(j, {"kind", "percent", "option", "adaptation", "cadence", "beta", "label"}, "algorithm");
  AlgorithmSpec a;
  const auto kind = get<std::string>(j, "kind", "algorithm", "");
  if (kind == "pgd") a.kind = AlgorithmSpec::Kind::Pgd;
  else if (kind == "rpsd") a.kind = AlgorithmSpec::Kind::Rpsd;
  else if (kind == "arpsd") a.kind = AlgorithmSpec::Kind::Arpsd;
  else throw InvalidConfiguration("algorithm kind must be pgd, rpsd or arpsd");
  a.percent = get<double>(j, "percent", "algorithm", a.kind == AlgorithmSpec::Kind::Pgd ? 100.0 : 10.0);
  if (!(a.percent > 0.0 && a.percent <= 100.0)) throw InvalidConfiguration("percent must lie in (0, 100]");
  a.option = get<int>(j, "option", "algorithm", 2);
  if (a.option != 1 && a.option != 2) throw InvalidConfiguration("option must be 1 or 2");
  const auto adaptation = get<std::string>(j, "adaptation", "algorithm", "identification");
  if (adaptation == "identification") a.adaptation = Adaptation::IdentificationDriven;
  else if (adaptation == "cadence") a.adaptation = Adaptation::FixedCadence;
  else if (adaptation == "none" && a.kind != AlgorithmSpec::Kind::Arpsd) a.adaptation = Adaptation::None;
  else throw InvalidConfiguration("adaptation must be 'identification' or 'cadence'");
  if (a.kind != AlgorithmSpec::Kind::Arpsd) a.adaptation = Adaptation::None;
  a.cadence = get<std::size_t>(j, "cadence", "algorithm", a.cadence);
  if (a.cadence == 0) throw InvalidConfiguration("cadence must be at least 1");
  if (j.contains("beta")) a.beta = get<double>(j, "beta", "algorithm", 0.0);
  a.label = get<std::string>(j, "label", "algorithm", "");
  if (a.label.find_first_of("/\\ ") != std::string::npos) throw InvalidConfiguration("label must be a plain file stem");
  return a;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j,
                 {"loss", "dataset", "synthetic", "lambda2", "regularizer", "algorithms", "seeds", "max_iters",
                  "stop_suboptimality", "reference_tol", "output_dir", "jobs", "median", "name"},
                 "config");
  ExperimentConfig c;
  c.name = get<std::string>(j, "name", "config", "");
  const auto loss = get<std::string>(j, "loss", "config", "logistic");
  if (loss == "logistic") c.loss = ExperimentConfig::Loss::Logistic;
  else if (loss == "least_squares") c.loss = ExperimentConfig::Loss::LeastSquares;
  else throw InvalidConfiguration("loss must be 'logistic' or 'least_squares'");

  if (j.contains("dataset") == j.contains("synthetic"))
    throw InvalidConfiguration("give exactly one of 'dataset' and 'synthetic'");
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    reject_unknown(d, {"path", "dimension"}, "dataset");
    std::filesystem::path path = get<std::string>(d, "path", "dataset", "");
    if (path.empty()) throw InvalidConfiguration("dataset.path is required");
    c.dataset = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    if (d.contains("dimension")) c.dimension = get<std::size_t>(d, "dimension", "dataset", 0);
  } else {
    c.synthetic = parse_synthetic(j.at("synthetic"), c.loss);
  }

  if (j.contains("lambda2")) {
    const json& l2 = j.at("lambda2");
    if (l2.is_string()) {
      if (l2.get<std::string>() != "1/m") throw InvalidConfiguration("lambda2 must be a number or \"1/m\"");
      c.lambda2_per_sample = true;
    } else if (l2.is_number()) {
      c.lambda2_value = l2.get<double>();
      if (!(c.lambda2_value >= 0.0)) throw InvalidConfiguration("lambda2 must be >= 0");
    } else {
      throw InvalidConfiguration("lambda2 must be a number or \"1/m\"");
    }
  }

  if (!j.contains("regularizer")) throw InvalidConfiguration("regularizer is required");
  const json& r = j.at("regularizer");
  reject_unknown(r, {"kind", "lambda1", "group_size"}, "regularizer");
  const auto kind = get<std::string>(r, "kind", "regularizer", "");
  if (kind == "l1") c.reg_kind = ExperimentConfig::RegKind::L1;
  else if (kind == "group") c.reg_kind = ExperimentConfig::RegKind::Group;
  else if (kind == "tv") c.reg_kind = ExperimentConfig::RegKind::TV;
  else throw InvalidConfiguration("regularizer kind must be l1, group or tv");
  if (!r.contains("lambda1")) throw InvalidConfiguration("regularizer.lambda1 is required");
  c.lambda1 = get<double>(r, "lambda1", "regularizer", 0.0);
  if (!(c.lambda1 >= 0.0)) throw InvalidConfiguration("lambda1 must be >= 0");
  c.group_size = get<std::size_t>(r, "group_size", "regularizer", c.group_size);
  if (c.group_size == 0) throw InvalidConfiguration("group_size must be positive");

  if (!j.contains("algorithms") || !j.at("algorithms").is_array() || j.at("algorithms").empty())
    throw InvalidConfiguration("algorithms must be a non-empty list");
  std::set<std::string> labels;
  for (const json& a : j.at("algorithms")) {
    c.algorithms.push_back(parse_algorithm(a));
    if (!labels.insert(algorithm_label(c.algorithms.back())).second)
      throw InvalidConfiguration("duplicate algorithm label '" + algorithm_label(c.algorithms.back()) + "'");
  }

  c.seeds = get<std::vector<std::uint64_t>>(j, "seeds", "config", c.seeds);
  if (c.seeds.empty()) throw InvalidConfiguration("seeds must be non-empty");
  c.max_iters = get<std::size_t>(j, "max_iters", "config", c.max_iters);
  c.stop_suboptimality = get<double>(j, "stop_suboptimality", "config", 0.0);
  if (!(c.stop_suboptimality >= 0.0)) throw InvalidConfiguration("stop_suboptimality must be >= 0");
  c.reference_tol = get<double>(j, "reference_tol", "config", c.reference_tol);
  if (!(c.reference_tol > 0.0)) throw InvalidConfiguration("reference_tol must be positive");
  c.output_dir = get<std::string>(j, "output_dir", "config", c.output_dir.string());
  c.jobs = get<std::size_t>(j, "jobs", "config", c.jobs);
  if (c.jobs == 0) throw InvalidConfiguration("jobs must be at least 1");
  c.median = get<bool>(j, "median", "config", c.median);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (path.extension() == ".toml")
    throw InvalidConfiguration("TOML configs are not supported; convert " + path.string() + " to JSON");
  std::ifstream in(path);
  if (!in) throw InvalidConfiguration("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidConfiguration("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["loss"] = c.loss == ExperimentConfig::Loss::Logistic ? "logistic" : "least_squares";
  if (c.dataset) {
    j["dataset"]["path"] = c.dataset->string();
    if (c.dimension) j["dataset"]["dimension"] = *c.dimension;
  }
  if (c.synthetic) {
    const SyntheticSpec& s = *c.synthetic;
    j["synthetic"] = {{"samples", s.samples},
                      {"dimension", s.dimension},
                      {"planted", s.planted},
                      {"shape", s.shape == PlantedShape::Sparse ? "sparse" : "piecewise"},
                      {"noise", s.noise},
                      {"classification", s.classification},
                      {"one_hot_groups", s.one_hot_groups},
                      {"seed", s.seed}};
  }
  if (c.lambda2_per_sample) j["lambda2"] = "1/m";
  else j["lambda2"] = c.lambda2_value;
  static const char* kinds[] = {"l1", "group", "tv"};
  j["regularizer"] = {{"kind", kinds[static_cast<int>(c.reg_kind)]}, {"lambda1", c.lambda1}, {"group_size", c.group_size}};
  j["algorithms"] = json::array();
  for (const auto& a : c.algorithms) {
    static const char* names[] = {"pgd", "rpsd", "arpsd"};
    json aj = {{"kind", names[static_cast<int>(a.kind)]},
               {"percent", a.percent},
               {"option", a.option},
               {"cadence", a.cadence},
               {"label", algorithm_label(a)}};
    aj["adaptation"] = a.adaptation == Adaptation::FixedCadence ? "cadence"
                       : a.adaptation == Adaptation::None   ? "none"
                                                            : "identification";
    if (a.beta) aj["beta"] = *a.beta;
    j["algorithms"].push_back(aj);
  }
  j["seeds"] = c.seeds;
  j["max_iters"] = c.max_iters;
  j["stop_suboptimality"] = c.stop_suboptimality;
  j["reference_tol"] = c.reference_tol;
  j["output_dir"] = c.output_dir.string();
  j["jobs"] = c.jobs;
  j["median"] = c.median;
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  // Parallelism and the output location do not change results.
  j.erase("jobs");
  j.erase("output_dir");
  return fmt::format("{:016x}", fnv1a(j.dump()));
}

std::string algorithm_label(const AlgorithmSpec& spec) {
  if (!spec.label.empty()) return spec.label;
  switch (spec.kind) {
    case AlgorithmSpec::Kind::Pgd:
      return "pgd";
    case AlgorithmSpec::Kind::Rpsd:
      return fmt::format("rpsd{}", spec.percent);
    case AlgorithmSpec::Kind::Arpsd:
      return fmt::format("arpsd{}{}", spec.percent, spec.option == 1 ? "_opt1" : "");
  }
  return "run";
}

Problem build_problem(const ExperimentConfig& config) {
  std::shared_ptr<Dataset> data;
  if (config.dataset) {
    data = std::make_shared<Dataset>(parse_libsvm(*config.dataset, config.dimension));
  } else {
    data = std::make_shared<Dataset>(make_synthetic(*config.synthetic).data);
  }
  const double lambda2 = config.lambda2_per_sample ? 1.0 / static_cast<double>(data->samples()) : config.lambda2_value;
  const std::size_t n = data->dimension();

  Regularizer reg;
  switch (config.reg_kind) {
    case ExperimentConfig::RegKind::L1:
      reg = L1Norm{config.lambda1};
      break;
    case ExperimentConfig::RegKind::Group:
      reg = GroupL1L2{config.lambda1, contiguous_groups(n, config.group_size)};
      break;
    case ExperimentConfig::RegKind::TV:
      reg = TotalVariation1D{config.lambda1};
      break;
  }
  validate_regularizer(reg, n);
  if (natural_family(reg) == FamilyKind::Jumps && n < 2) throw DataError("total variation needs at least 2 features");
  const SubspaceFamily family =
      natural_family(reg) == FamilyKind::Jumps ? SubspaceFamily::jumps(n) : SubspaceFamily::axes(n);

  SmoothObjective obj = config.loss == ExperimentConfig::Loss::Logistic
                            ? SmoothObjective::logistic_ridge(data, lambda2)
                            : SmoothObjective::least_squares(
                                  data->features, Vector::Map(data->labels.data(), static_cast<Eigen::Index>(data->labels.size())),
                                  lambda2);
  return {data, std::move(obj), std::move(reg), family};
}

SolverConfig solver_config(const AlgorithmSpec& spec, const SubspaceFamily& family, std::size_t max_iters,
                           std::uint64_t seed) {
  SolverConfig s;
  s.max_iters = max_iters;
  s.seed = seed;
  s.adaptation = spec.kind == AlgorithmSpec::Kind::Arpsd ? spec.adaptation : Adaptation::None;
  s.cadence = spec.cadence;
  s.beta = spec.beta;
  const double share = spec.percent / 100.0;
  if (spec.option == 1) {
    s.selection = Option1{share};
  } else {
    const auto count = static_cast<std::size_t>(std::lround(share * static_cast<double>(family.size())));
    s.selection = Option2{std::clamp<std::size_t>(count, 1, family.size())};
  }
  return s;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  ExperimentOutput out;
  out.directory = config.output_dir;
  if (const char* env = std::getenv("RPSD_OUTPUT_DIR"); env != nullptr && *env != '\0') out.directory = env;

  const Problem problem = build_problem(config);

  std::error_code ec;
  std::filesystem::create_directories(out.directory, ec);
  if (ec || !std::filesystem::is_directory(out.directory))
    throw InvalidConfiguration("cannot create output directory " + out.directory.string());
  {
    const auto probe = out.directory / ".rpsd_write_probe";
    std::ofstream test(probe);
    if (!test) throw InvalidConfiguration("output directory " + out.directory.string() + " is not writable");
    test.close();
    std::filesystem::remove(probe, ec);
  }

  const ReferenceSolution ref = reference_solve(problem.objective, problem.regularizer, config.reference_tol);
  out.f_star = ref.objective;

  struct Task {
    std::size_t algorithm;
    std::uint64_t seed;
    std::filesystem::path file;
    RunMetrics metrics;
    std::size_t final_pattern = 0;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < config.algorithms.size(); ++a)
    for (std::uint64_t seed : config.seeds)
      tasks.push_back({a, seed, out.directory / fmt::format("{}_seed{}.csv", algorithm_label(config.algorithms[a]), seed), {}, 0});

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      try {
        Task& task = tasks[t];
        const AlgorithmSpec& spec = config.algorithms[task.algorithm];
        SolverConfig sc = solver_config(spec, problem.family, config.max_iters, task.seed);
        if (config.stop_suboptimality > 0.0) sc.stop_objective = out.f_star + config.stop_suboptimality;
        RunResult result = spec.kind == AlgorithmSpec::Kind::Pgd
                               ? run_pgd(sc, problem.objective, problem.regularizer, problem.family)
                               : arpsd_run(sc, problem.objective, problem.regularizer, problem.family);
        write_run_csv(task.file, result.metrics, out.f_star);
        task.final_pattern = result.pattern.count();
        task.metrics = std::move(result.metrics);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(config.jobs, tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  nlohmann::json manifest;
  manifest["config_hash"] = config_hash(config);
  manifest["version"] = version();
  manifest["f_star"] = out.f_star;
  manifest["reference"] = {{"iterations", ref.iterations}, {"converged", ref.converged}, {"tolerance", config.reference_tol}};
  manifest["problem"] = {{"samples", problem.data->samples()},
                         {"dimension", problem.data->dimension()},
                         {"family_size", problem.family.size()},
                         {"lipschitz", problem.objective.lipschitz()},
                         {"strong_convexity", problem.objective.strong_convexity()}};
  manifest["config"] = to_json(config);
  manifest["runs"] = nlohmann::json::array();
  for (const Task& task : tasks) {
    const auto& last = task.metrics.records.back();
    out.runs.push_back(task.file);
    manifest["runs"].push_back({{"file", task.file.filename().string()},
                                {"algorithm", algorithm_label(config.algorithms[task.algorithm])},
                                {"seed", task.seed},
                                {"iterations", last.iter},
                                {"final_objective", last.objective},
                                {"final_suboptimality", last.objective - out.f_star},
                                {"final_pattern_size", task.final_pattern},
                                {"subspaces_explored", last.subspaces_explored},
                                {"adaptations", task.metrics.adaptations.size()},
                                {"rate_uncontrolled", task.metrics.rate_uncontrolled}});
  }

  if (config.median) {
    manifest["medians"] = nlohmann::json::array();
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
      std::vector<const RunMetrics*> group;
      for (const Task& task : tasks)
        if (task.algorithm == a) group.push_back(&task.metrics);
      const auto file = out.directory / fmt::format("{}_median.csv", algorithm_label(config.algorithms[a]));
      write_median_csv(file, group, out.f_star);
      out.medians.push_back(file);
      manifest["medians"].push_back(file.filename().string());
    }
  }

  out.manifest = out.directory / "manifest.json";
  std::ofstream m(out.manifest);
  if (!m) throw InvalidConfiguration("cannot write " + out.manifest.string());
  m << manifest.dump(2) << '\n';
  return out;
}

std::string version() { return RPSD_VERSION; }

}  // namespace rpsd::bench
