#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "rpsd/model.hpp"
#include "rpsd/prox.hpp"
#include "rpsd/subspace.hpp"
#include "rpsd/types.hpp"

namespace rpsd {

/// Bernoulli selection: identified members (pattern bit 1) with probability 1,
/// the others with probability p.
struct Option1 {
  double p = 0.5;
};

/// Identified members always, plus s members drawn uniformly among the others.
struct Option2 {
  std::size_t s = 1;
};

using LawOption = std::variant<Option1, Option2>;

enum class Adaptation {
  None,                  // RPSD: the law built from S(x^0) is kept
  IdentificationDriven,  // ARPSD with the waiting time derived from the rate
  FixedCadence,          // ARPSD waiting a fixed number of iterations
};

struct SolverConfig {
  /// Defaults to 2/(mu+L) when mu > 0 and 1/L otherwise.
  std::optional<double> gamma;
  std::size_t max_iters = 1000;
  std::uint64_t seed = 0;
  LawOption selection = Option2{};
  Adaptation adaptation = Adaptation::None;
  /// Defaults to gamma mu L / (n (mu+L)).
  std::optional<double> beta;
  /// Defaults to default_pattern_tolerance(family).
  std::optional<double> tol_pattern;
  /// Waiting time for FixedCadence, and the fallback when mu = 0.
  std::size_t cadence = 50;
  /// Stop as soon as F(x^k) <= stop_objective.
  std::optional<double> stop_objective;
};

struct IterationRecord {
  std::size_t iter = 0;
  double objective = 0.0;
  std::size_t pattern_size = 0;
  /// Members in the selection that produced this iterate (0 for the first row).
  std::size_t selection_size = 0;
  /// Running sum of selection_size.
  std::uint64_t subspaces_explored = 0;
  std::size_t cycle = 0;
  bool adapted = false;
};

struct AdaptationEvent {
  std::size_t iter = 0;
  std::size_t cycle = 0;
  double transition_norm = 1.0;
  std::size_t min_gap = 1;
  std::size_t pattern_size = 0;
};

struct RunMetrics {
  std::vector<IterationRecord> records;
  std::vector<AdaptationEvent> adaptations;
  /// Set when adaptations happened without a rate guarantee (mu = 0).
  bool rate_uncontrolled = false;
};

struct SolverState {
  Vector x;     // x^k
  Vector z;     // z^k
  Vector grad;  // grad f(x^k)
  double fx = 0.0;

  std::size_t cycle = 0;
  std::size_t last_adapt_iter = 0;
  std::size_t min_gap = 1;
  double alpha = 0.0;  // rate constant of the current law
  SelectionLaw law;
  AveragedProjection proj = AveragedProjection::identity(0, AveragedProjection::Representation::Diagonal);
  SparsityVector pattern_at_adapt;
};

struct RunResult {
  Vector x;
  SparsityVector pattern;
  RunMetrics metrics;
  SolverState state;
};

/// Called after every recorded iterate (including k = 0).
using IterationObserver = std::function<void(std::size_t k, const SolverState&)>;

double default_step_size(const SmoothObjective& obj);
/// Throws InvalidConfiguration when gamma is outside (0, 2/(mu+L)] (mu > 0) or (0, 2/L) (mu = 0).
void validate_step_size(const SmoothObjective& obj, double gamma);
/// gamma mu L / (n (mu + L)); 0 when mu = 0.
double default_beta(const SmoothObjective& obj, double gamma);

/// F = f + g
double composite_objective(const SmoothObjective& obj, const Regularizer& reg, const Vector& x);

/// prox_{gamma g}(x - gamma grad f(x))
Vector pgd_step(const SmoothObjective& obj, const Regularizer& reg, double gamma, const Vector& x);

/// State at (x, z) under `law`. z defaults to Q x.
SolverState make_state(const SmoothObjective& obj, const SubspaceFamily& family, const SelectionLaw& law,
                       const Vector& x, const std::optional<Vector>& z = std::nullopt);

/// y = Q(x - gamma grad f(x)); z <- P_S y + (I - P_S) z; x <- prox_{gamma g}(Q^{-1} z).
void rpsd_step(SolverState& state, const SmoothObjective& obj, const Regularizer& reg, double gamma,
               const SubspaceFamily& family, const Selection& sel);

/// Selection law for a pattern: identified members always, the rest by `option`.
SelectionLaw build_adapted_law(const SparsityVector& pattern, const LawOption& option);

/// 2 gamma mu L lambda_min / (mu + L)
double rate_constant(const AveragedProjection& proj, const SmoothObjective& obj, double gamma);

/// 1 - lambda_min(P̄) 2 gamma mu L / (mu + L). Throws InvalidConfiguration when mu = 0.
double theoretical_rate(const AveragedProjection& proj, const SmoothObjective& obj, double gamma);

/// Smallest c >= 1 with a (1 - alpha)^c <= 1 - beta.
std::size_t inter_adaptation_time(double transition_norm_sq, double alpha, double beta);

/// Waiting time of the fixed schedule: ceil(log a / log((2 - alpha) / (2 - 2 alpha))), at least 1.
std::size_t fixed_cadence(double transition_norm_sq, double alpha);

/// k >= last_adapt_iter + min_gap and the pattern moved since the last adaptation.
bool decide_adaptation(const SolverState& state, const SparsityVector& pattern_now, std::size_t k);

/// RPSD or ARPSD depending on config.adaptation. Starts from x^0 = 0.
RunResult arpsd_run(const SolverConfig& config, const SmoothObjective& obj, const Regularizer& reg,
                    const SubspaceFamily& family, const IterationObserver& observer = {});

/// Full proximal gradient; every record counts the whole family as selected.
RunResult run_pgd(const SolverConfig& config, const SmoothObjective& obj, const Regularizer& reg,
                  const SubspaceFamily& family, const IterationObserver& observer = {});

struct ReferenceSolution {
  Vector x;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// PGD with the default step until ||x - pgd_step(x)|| / gamma <= tol.
ReferenceSolution reference_solve(const SmoothObjective& obj, const Regularizer& reg, double tol = 1e-12,
                                  std::size_t max_iters = 2'000'000);

struct LambdaSearch {
  double lambda = 0.0;
  std::size_t pattern_size = 0;
  std::size_t evaluations = 0;
};

/// Bisection on log(lambda1) for a solution whose pattern has about `target`
/// nonzero bits. The regularizer's own lambda is ignored.
LambdaSearch tune_lambda1(const SmoothObjective& obj, const Regularizer& reg, std::size_t target,
                          double lo = 1e-6, double hi = 1.0, std::size_t max_evaluations = 40);

}  // namespace rpsd
