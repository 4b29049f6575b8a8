#include "rpsd/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rpsd/error.hpp"
#include "rpsd/kernels.hpp"

namespace rpsd {

std::vector<std::vector<std::size_t>> contiguous_groups(std::size_t n, std::size_t group_size) {
  if (group_size == 0) throw InvalidConfiguration("group size must be positive");
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t begin = 0; begin < n; begin += group_size) {
    auto& g = groups.emplace_back();
    for (std::size_t i = begin; i < std::min(n, begin + group_size); ++i) g.push_back(i);
  }
  return groups;
}

void validate_regularizer(const Regularizer& reg, std::size_t n) {
  const double lambda = std::visit([](const auto& r) { return r.lambda; }, reg);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidConfiguration("regularization weight must be >= 0");
  if (const auto* group = std::get_if<GroupL1L2>(&reg)) {
    std::vector<bool> seen(n, false);
    std::size_t total = 0;
    for (const auto& g : group->groups) {
      if (g.empty()) throw InvalidConfiguration("empty group");
      for (std::size_t i : g) {
        if (i >= n || seen[i]) throw InvalidConfiguration("groups must partition the coordinates");
        seen[i] = true;
        ++total;
      }
    }
    if (total != n) throw InvalidConfiguration("groups must cover every coordinate");
  }
}

double regularizer_value(const Regularizer& reg, const Vector& x) {
  if (const auto* l1 = std::get_if<L1Norm>(&reg)) return l1->lambda * x.lpNorm<1>();
  if (const auto* tv = std::get_if<TotalVariation1D>(&reg)) {
    if (x.size() < 2) return 0.0;
    return tv->lambda * (x.tail(x.size() - 1) - x.head(x.size() - 1)).lpNorm<1>();
  }
  const auto& group = std::get<GroupL1L2>(reg);
  double total = 0.0;
  for (const auto& g : group.groups) {
    double sq = 0.0;
    for (std::size_t i : g) sq += x[static_cast<Eigen::Index>(i)] * x[static_cast<Eigen::Index>(i)];
    total += std::sqrt(sq);
  }
  return group.lambda * total;
}

FamilyKind natural_family(const Regularizer& reg) noexcept {
  return std::holds_alternative<TotalVariation1D>(reg) ? FamilyKind::Jumps : FamilyKind::Axes;
}

// Condat's direct algorithm: a single forward pass that tracks the admissible
// range [vmin, vmax] of the current segment value together with the dual
// residuals, emitting a segment whenever the range can no longer be extended.
void tv1d_denoise(std::span<const double> input, double weight, std::span<double> output) {
  const std::size_t width = input.size();
  if (width == 0) return;
  if (weight <= 0.0) {
    std::copy(input.begin(), input.end(), output.begin());
    return;
  }
  const double lambda = weight;
  const double twolambda = 2.0 * lambda;
  const double minlambda = -lambda;
  std::size_t k = 0, k0 = 0;
  std::size_t kplus = 0, kminus = 0;
  double umin = lambda, umax = minlambda;
  double vmin = input[0] - lambda, vmax = input[0] + lambda;
  for (;;) {
    while (k == width - 1) {
      if (umin < 0.0) {
        do output[k0++] = vmin;
        while (k0 <= kminus);
        k = kminus = k0;
        vmin = input[k];
        umin = lambda;
        umax = vmin + umin - vmax;
      } else if (umax > 0.0) {
        do output[k0++] = vmax;
        while (k0 <= kplus);
        k = kplus = k0;
        vmax = input[k];
        umax = minlambda;
        umin = vmax + umax - vmin;
      } else {
        vmin += umin / static_cast<double>(k - k0 + 1);
        do output[k0++] = vmin;
        while (k0 <= k);
        return;
      }
    }
    if ((umin += input[k + 1] - vmin) < minlambda) {
      do output[k0++] = vmin;
      while (k0 <= kminus);
      k = kplus = kminus = k0;
      vmin = input[k];
      vmax = vmin + twolambda;
      umin = lambda;
      umax = minlambda;
    } else if ((umax += input[k + 1] - vmax) > lambda) {
      do output[k0++] = vmax;
      while (k0 <= kplus);
      k = kplus = kminus = k0;
      vmax = input[k];
      vmin = vmax - twolambda;
      umin = lambda;
      umax = minlambda;
    } else {
      ++k;
      if (umin >= lambda) {
        kminus = k;
        vmin += (umin - lambda) / static_cast<double>(kminus - k0 + 1);
        umin = lambda;
      }
      if (umax <= minlambda) {
        kplus = k;
        vmax += (umax + lambda) / static_cast<double>(kplus - k0 + 1);
        umax = minlambda;
      }
    }
  }
}

void prox_into(const Regularizer& reg, double gamma, const Vector& u, Vector& out) {
  if (!(gamma > 0.0)) throw InvalidConfiguration("prox step must be positive");
  out.resize(u.size());
  if (const auto* l1 = std::get_if<L1Norm>(&reg)) {
    kernels::soft_threshold(as_span(u), gamma * l1->lambda, as_span(out));
    return;
  }
  if (const auto* tv = std::get_if<TotalVariation1D>(&reg)) {
    tv1d_denoise(as_span(u), gamma * tv->lambda, as_span(out));
    return;
  }
  const auto& group = std::get<GroupL1L2>(reg);
  const double threshold = gamma * group.lambda;
  for (const auto& g : group.groups) {
    double sq = 0.0;
    for (std::size_t i : g) sq += u[static_cast<Eigen::Index>(i)] * u[static_cast<Eigen::Index>(i)];
    const double norm = std::sqrt(sq);
    const double scale = norm > threshold ? 1.0 - threshold / norm : 0.0;
    for (std::size_t i : g) out[static_cast<Eigen::Index>(i)] = scale * u[static_cast<Eigen::Index>(i)];
  }
}

Vector prox(const Regularizer& reg, double gamma, const Vector& u) {
  Vector out;
  prox_into(reg, gamma, u, out);
  return out;
}

// Sparsity patterns ------------------------------------------------------

SparsityVector::SparsityVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::size_t SparsityVector::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {
void require_same_length(const SparsityVector& a, const SparsityVector& b) {
  if (a.size() != b.size())
    throw InvalidConfiguration("sparsity vectors of different lengths (" + std::to_string(a.size()) + " vs " +
                               std::to_string(b.size()) + ")");
}
}  // namespace

bool pattern_leq(const SparsityVector& a, const SparsityVector& b) {
  require_same_length(a, b);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.bits()[i] > b.bits()[i]) return false;
  return true;
}

SparsityVector pattern_union(const SparsityVector& a, const SparsityVector& b) {
  require_same_length(a, b);
  std::vector<std::uint8_t> bits(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) bits[i] = a.bits()[i] | b.bits()[i];
  return SparsityVector(std::move(bits));
}

SparsityVector sparsity_vector(FamilyKind kind, const Vector& x, double tol) {
  if (!(tol >= 0.0)) throw InvalidConfiguration("pattern tolerance must be >= 0");
  const auto n = static_cast<std::size_t>(x.size());
  if (kind == FamilyKind::Axes) {
    SparsityVector s(n);
    for (std::size_t i = 0; i < n; ++i) s.set(i, std::abs(x[static_cast<Eigen::Index>(i)]) > tol);
    return s;
  }
  SparsityVector s(n > 0 ? n - 1 : 0);
  const double threshold = n > 0 ? tol * std::max(1.0, x.lpNorm<Eigen::Infinity>()) : 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    s.set(i, std::abs(x[j + 1] - x[j]) > threshold);
  }
  return s;
}

double default_pattern_tolerance(FamilyKind kind) noexcept { return kind == FamilyKind::Axes ? 0.0 : 1e-12; }

}  // namespace rpsd
