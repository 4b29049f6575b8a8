#include "rpsd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rpsd/error.hpp"
#include "rpsd/kernels.hpp"

namespace rpsd {
namespace {

double resolve_gamma(const SolverConfig& config, const SmoothObjective& obj) {
  const double gamma = config.gamma.value_or(default_step_size(obj));
  validate_step_size(obj, gamma);
  return gamma;
}

void check_family(const SmoothObjective& obj, const SubspaceFamily& family) {
  if (family.dimension() != obj.dimension())
    throw InvalidConfiguration("family dimension " + std::to_string(family.dimension()) +
                               " does not match the objective dimension " + std::to_string(obj.dimension()));
}

Regularizer with_lambda(const Regularizer& reg, double lambda) {
  Regularizer out = reg;
  std::visit([lambda](auto& r) { r.lambda = lambda; }, out);
  return out;
}

IterationRecord first_record(const SolverState& state, const Regularizer& reg, std::size_t pattern_size) {
  IterationRecord rec;
  rec.objective = state.fx + regularizer_value(reg, state.x);
  rec.pattern_size = pattern_size;
  return rec;
}

bool reached(const SolverConfig& config, double objective) {
  return config.stop_objective && objective <= *config.stop_objective;
}

}  // namespace

double default_step_size(const SmoothObjective& obj) {
  const double mu = obj.strong_convexity();
  const double L = obj.lipschitz();
  return mu > 0.0 ? 2.0 / (mu + L) : 1.0 / L;
}

void validate_step_size(const SmoothObjective& obj, double gamma) {
  const double mu = obj.strong_convexity();
  const double L = obj.lipschitz();
  if (!(gamma > 0.0)) throw InvalidConfiguration("step size must be positive");
  if (mu > 0.0) {
    if (gamma > 2.0 / (mu + L) * (1.0 + 1e-12))
      throw InvalidConfiguration("step size above 2/(mu+L) = " + std::to_string(2.0 / (mu + L)));
  } else if (gamma >= 2.0 / L) {
    throw InvalidConfiguration("step size must stay below 2/L = " + std::to_string(2.0 / L));
  }
}

double default_beta(const SmoothObjective& obj, double gamma) {
  const double mu = obj.strong_convexity();
  const double L = obj.lipschitz();
  return gamma * mu * L / (static_cast<double>(obj.dimension()) * (mu + L));
}

double composite_objective(const SmoothObjective& obj, const Regularizer& reg, const Vector& x) {
  return obj.value(x) + regularizer_value(reg, x);
}

Vector pgd_step(const SmoothObjective& obj, const Regularizer& reg, double gamma, const Vector& x) {
  Vector grad;
  obj.value_and_gradient(x, grad);
  Vector v = x;
  kernels::axpy(-gamma, as_span(grad), as_span(v));
  return prox(reg, gamma, v);
}

SolverState make_state(const SmoothObjective& obj, const SubspaceFamily& family, const SelectionLaw& law,
                       const Vector& x, const std::optional<Vector>& z) {
  check_family(obj, family);
  SolverState state;
  state.law = law;
  state.proj = average_projection(family, law);
  state.x = x;
  if (z) {
    state.z = *z;
  } else {
    state.proj.apply_q(x, state.z);
  }
  state.fx = obj.value_and_gradient(state.x, state.grad);
  return state;
}

void rpsd_step(SolverState& state, const SmoothObjective& obj, const Regularizer& reg, double gamma,
               const SubspaceFamily& family, const Selection& sel) {
  Vector v = state.x;
  kernels::axpy(-gamma, as_span(state.grad), as_span(v));
  Vector y;
  state.proj.apply_q(v, y);
  blend_projection(family, sel, y, state.z);
  Vector u;
  state.proj.apply_qinv(state.z, u);
  prox_into(reg, gamma, u, state.x);
  state.fx = obj.value_and_gradient(state.x, state.grad);
}

SelectionLaw build_adapted_law(const SparsityVector& pattern, const LawOption& option) {
  const std::size_t m = pattern.size();
  if (m == 0) throw InvalidConfiguration("empty sparsity pattern");
  if (const auto* o1 = std::get_if<Option1>(&option)) {
    if (!(o1->p > 0.0 && o1->p <= 1.0)) throw InvalidConfiguration("Option1 probability must lie in (0, 1]");
    std::vector<double> p(m, o1->p);
    for (std::size_t i = 0; i < m; ++i)
      if (pattern.test(i)) p[i] = 1.0;
    return bernoulli_law(std::move(p));
  }
  const std::size_t s = std::get<Option2>(option).s;
  if (s == 0) throw InvalidConfiguration("Option2 needs s >= 1");
  std::vector<std::size_t> forced;
  for (std::size_t i = 0; i < m; ++i)
    if (pattern.test(i)) forced.push_back(i);
  const std::size_t sample = std::min(s, m - forced.size());
  return uniform_law(m, sample, std::move(forced));
}

double rate_constant(const AveragedProjection& proj, const SmoothObjective& obj, double gamma) {
  const double mu = obj.strong_convexity();
  const double L = obj.lipschitz();
  return 2.0 * gamma * mu * L * proj.lambda_min() / (mu + L);
}

double theoretical_rate(const AveragedProjection& proj, const SmoothObjective& obj, double gamma) {
  if (!(obj.strong_convexity() > 0.0)) throw InvalidConfiguration("rate undefined without strong convexity");
  return 1.0 - rate_constant(proj, obj, gamma);
}

std::size_t inter_adaptation_time(double transition_norm_sq, double alpha, double beta) {
  if (!(alpha > 0.0)) throw InvalidConfiguration("waiting time undefined for alpha = 0");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidConfiguration("beta must lie in (0, 1)");
  if (!(transition_norm_sq > 0.0)) throw InvalidConfiguration("transition norm must be positive");
  if (alpha >= 1.0) return 1;
  const double a = transition_norm_sq;
  const double target = 1.0 - beta;
  const double raw = std::ceil((std::log(a) - std::log1p(-beta)) / -std::log1p(-alpha));
  std::size_t c = raw < 1.0 ? 1 : static_cast<std::size_t>(raw);
  // The ceiling can land one off when the ratio is an integer up to rounding.
  const auto lhs = [&](std::size_t k) { return a * std::pow(1.0 - alpha, static_cast<double>(k)); };
  while (lhs(c) > target) ++c;
  while (c > 1 && lhs(c - 1) <= target) --c;
  return c;
}

std::size_t fixed_cadence(double transition_norm_sq, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidConfiguration("alpha must lie in (0, 1)");
  if (transition_norm_sq <= 1.0) return 1;
  const double c = std::ceil(std::log(transition_norm_sq) / std::log((2.0 - alpha) / (2.0 - 2.0 * alpha)));
  return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

bool decide_adaptation(const SolverState& state, const SparsityVector& pattern_now, std::size_t k) {
  return k >= state.last_adapt_iter + state.min_gap && !(pattern_now == state.pattern_at_adapt);
}

RunResult arpsd_run(const SolverConfig& config, const SmoothObjective& obj, const Regularizer& reg,
                    const SubspaceFamily& family, const IterationObserver& observer) {
  check_family(obj, family);
  validate_regularizer(reg, obj.dimension());
  const double gamma = resolve_gamma(config, obj);
  const double tol = config.tol_pattern.value_or(default_pattern_tolerance(family.kind()));
  const bool adaptive = config.adaptation != Adaptation::None;
  const bool strongly_convex = obj.strong_convexity() > 0.0;
  const double beta = config.beta.value_or(default_beta(obj, gamma));
  if (config.adaptation == Adaptation::IdentificationDriven && strongly_convex && !(beta > 0.0 && beta < 1.0))
    throw InvalidConfiguration("beta must lie in (0, 1)");
  if (config.adaptation == Adaptation::FixedCadence && config.cadence == 0)
    throw InvalidConfiguration("cadence must be at least 1");

  const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(obj.dimension()));
  SparsityVector pattern = sparsity_vector(family.kind(), x0, tol);
  SolverState state = make_state(obj, family, build_adapted_law(pattern, config.selection), x0);
  state.pattern_at_adapt = pattern;
  state.alpha = rate_constant(state.proj, obj, gamma);
  state.min_gap = 1;

  RunResult result;
  RunMetrics& metrics = result.metrics;
  metrics.records.reserve(std::min<std::size_t>(config.max_iters, 1'000'000) + 1);
  metrics.records.push_back(first_record(state, reg, pattern.count()));
  if (observer) observer(0, state);

  struct Candidate {
    SparsityVector pattern;
    SelectionLaw law;
    AveragedProjection proj = AveragedProjection::identity(0, AveragedProjection::Representation::Diagonal);
    double norm = 1.0;
    std::size_t gap = 1;
  };
  std::optional<Candidate> candidate;

  Rng rng(config.seed);
  std::uint64_t explored = 0;
  for (std::size_t k = 0; k < config.max_iters && !reached(config, metrics.records.back().objective); ++k) {
    bool adapted = false;
    if (adaptive && !(pattern == state.pattern_at_adapt)) {
      if (!candidate || !(candidate->pattern == pattern)) {
        Candidate c;
        c.pattern = pattern;
        c.law = build_adapted_law(pattern, config.selection);
        c.proj = average_projection(family, c.law);
        c.norm = transition_norm(c.proj, state.proj);
        if (config.adaptation == Adaptation::FixedCadence || !strongly_convex) {
          c.gap = config.cadence;
          if (!strongly_convex && config.adaptation == Adaptation::IdentificationDriven)
            metrics.rate_uncontrolled = true;
        } else {
          c.gap = inter_adaptation_time(c.norm, state.alpha, beta);
        }
        candidate = std::move(c);
      }
      state.min_gap = candidate->gap;
      if (decide_adaptation(state, pattern, k)) {
        // z <- Q_new Q_old^{-1} z, keeping x unchanged.
        Vector u;
        state.proj.apply_qinv(state.z, u);
        candidate->proj.apply_q(u, state.z);
        state.law = std::move(candidate->law);
        state.proj = std::move(candidate->proj);
        state.pattern_at_adapt = pattern;
        state.last_adapt_iter = k;
        state.alpha = rate_constant(state.proj, obj, gamma);
        ++state.cycle;
        metrics.adaptations.push_back({k, state.cycle, candidate->norm, candidate->gap, pattern.count()});
        candidate.reset();
        adapted = true;
      }
    }

    const Selection sel = draw_selection(state.law, rng);
    rpsd_step(state, obj, reg, gamma, family, sel);
    pattern = sparsity_vector(family.kind(), state.x, tol);
    explored += sel.size();

    IterationRecord rec;
    rec.iter = k + 1;
    rec.objective = state.fx + regularizer_value(reg, state.x);
    rec.pattern_size = pattern.count();
    rec.selection_size = sel.size();
    rec.subspaces_explored = explored;
    rec.cycle = state.cycle;
    rec.adapted = adapted;
    metrics.records.push_back(rec);
    if (observer) observer(k + 1, state);
  }

  result.x = state.x;
  result.pattern = std::move(pattern);
  result.state = std::move(state);
  return result;
}

RunResult run_pgd(const SolverConfig& config, const SmoothObjective& obj, const Regularizer& reg,
                  const SubspaceFamily& family, const IterationObserver& observer) {
  check_family(obj, family);
  validate_regularizer(reg, obj.dimension());
  const double gamma = resolve_gamma(config, obj);
  const double tol = config.tol_pattern.value_or(default_pattern_tolerance(family.kind()));
  const Selection all = full_selection(family);

  const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(obj.dimension()));
  SolverState state = make_state(obj, family, uniform_law(family.size(), family.size()), x0);
  SparsityVector pattern = sparsity_vector(family.kind(), state.x, tol);
  state.pattern_at_adapt = pattern;

  RunResult result;
  RunMetrics& metrics = result.metrics;
  metrics.records.push_back(first_record(state, reg, pattern.count()));
  if (observer) observer(0, state);

  std::uint64_t explored = 0;
  Vector v;
  for (std::size_t k = 0; k < config.max_iters && !reached(config, metrics.records.back().objective); ++k) {
    v = state.x;
    kernels::axpy(-gamma, as_span(state.grad), as_span(v));
    prox_into(reg, gamma, v, state.x);
    state.z = state.x;
    state.fx = obj.value_and_gradient(state.x, state.grad);
    pattern = sparsity_vector(family.kind(), state.x, tol);
    explored += all.size();

    IterationRecord rec;
    rec.iter = k + 1;
    rec.objective = state.fx + regularizer_value(reg, state.x);
    rec.pattern_size = pattern.count();
    rec.selection_size = all.size();
    rec.subspaces_explored = explored;
    metrics.records.push_back(rec);
    if (observer) observer(k + 1, state);
  }

  result.x = state.x;
  result.pattern = std::move(pattern);
  result.state = std::move(state);
  return result;
}

ReferenceSolution reference_solve(const SmoothObjective& obj, const Regularizer& reg, double tol,
                                  std::size_t max_iters) {
  validate_regularizer(reg, obj.dimension());
  const double gamma = 1.0 / obj.lipschitz();
  const Eigen::Index n = static_cast<Eigen::Index>(obj.dimension());

  // Accelerated proximal gradient with gradient-based restart; the stopping
  // test is the plain gradient mapping at the returned point.
  Vector x = Vector::Zero(n), x_prev = x, w = x, grad(n), v(n), next(n);
  double t = 1.0;
  ReferenceSolution out;
  for (std::size_t k = 0; k < max_iters; ++k) {
    obj.value_and_gradient(w, grad);
    v = w - gamma * grad;
    prox_into(reg, gamma, v, next);

    if ((w - next).dot(next - x) > 0.0) {  // restart momentum
      t = 1.0;
      w = x;
      continue;
    }
    x_prev = x;
    x = next;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    w = x + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    out.iterations = k + 1;

    if (k % 16 == 0) {
      const double mapping = (x - pgd_step(obj, reg, gamma, x)).norm() / gamma;
      if (mapping <= tol) {
        out.converged = true;
        break;
      }
    }
  }
  out.x = x;
  out.objective = composite_objective(obj, reg, x);
  return out;
}

LambdaSearch tune_lambda1(const SmoothObjective& obj, const Regularizer& reg, std::size_t target, double lo,
                          double hi, std::size_t max_evaluations) {
  if (!(lo > 0.0 && hi > lo)) throw InvalidConfiguration("lambda search needs 0 < lo < hi");
  const FamilyKind kind = natural_family(reg);
  const double tol = default_pattern_tolerance(kind);
  LambdaSearch best;
  std::size_t best_miss = std::numeric_limits<std::size_t>::max();
  for (std::size_t e = 0; e < max_evaluations; ++e) {
    const double mid = std::sqrt(lo * hi);
    const ReferenceSolution sol = reference_solve(obj, with_lambda(reg, mid), 1e-10, 200'000);
    const std::size_t size = sparsity_vector(kind, sol.x, tol).count();
    const std::size_t miss = size > target ? size - target : target - size;
    best.evaluations = e + 1;
    if (miss < best_miss) {
      best_miss = miss;
      best.lambda = mid;
      best.pattern_size = size;
    }
    if (miss == 0) break;
    (size > target ? lo : hi) = mid;
  }
  return best;
}

}  // namespace rpsd
