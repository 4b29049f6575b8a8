#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "rpsd/subspace.hpp"
#include "rpsd/types.hpp"

namespace rpsd {

/// g(x) = lambda ||x||_1
struct L1Norm {
  double lambda = 0.0;
};

/// g(x) = lambda sum_b ||x_b||_2 over a partition of the coordinates.
struct GroupL1L2 {
  double lambda = 0.0;
  std::vector<std::vector<std::size_t>> groups;
};

/// g(x) = lambda sum_i |x_{i+1} - x_i|
struct TotalVariation1D {
  double lambda = 0.0;
};

using Regularizer = std::variant<L1Norm, GroupL1L2, TotalVariation1D>;

/// Consecutive groups of `group_size` coordinates; the last one may be shorter.
std::vector<std::vector<std::size_t>> contiguous_groups(std::size_t n, std::size_t group_size);

/// Checks lambda >= 0 and, for groups, that they partition {0..n-1}.
void validate_regularizer(const Regularizer& reg, std::size_t n);

double regularizer_value(const Regularizer& reg, const Vector& x);

/// Family whose sparsity pattern the regularizer promotes: Axes for the
/// coordinate-structured norms, Jumps for total variation.
FamilyKind natural_family(const Regularizer& reg) noexcept;

/// argmin_y g(y) + ||y - u||^2 / (2 gamma). Throws InvalidConfiguration for gamma <= 0.
Vector prox(const Regularizer& reg, double gamma, const Vector& u);
void prox_into(const Regularizer& reg, double gamma, const Vector& u, Vector& out);

/// Exact 1D total-variation denoising: argmin_y weight sum |y_{i+1}-y_i| + ||y-u||^2/2.
/// Output is piecewise constant with bit-identical values inside each segment.
void tv1d_denoise(std::span<const double> input, double weight, std::span<double> output);

/// {0,1}-pattern recording which identification subspaces do NOT contain x.
class SparsityVector {
 public:
  SparsityVector() = default;
  explicit SparsityVector(std::size_t size) : bits_(size, 0) {}
  explicit SparsityVector(std::vector<std::uint8_t> bits);

  std::size_t size() const noexcept { return bits_.size(); }
  bool test(std::size_t i) const { return bits_.at(i) != 0; }
  void set(std::size_t i, bool value) { bits_.at(i) = value ? 1 : 0; }
  /// ||S||_1
  std::size_t count() const noexcept;
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  friend bool operator==(const SparsityVector&, const SparsityVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Bitwise a <= b. Throws InvalidConfiguration on length mismatch.
bool pattern_leq(const SparsityVector& a, const SparsityVector& b);
/// Bitwise OR.
SparsityVector pattern_union(const SparsityVector& a, const SparsityVector& b);

/// Axes: bit i = 1 iff |x_i| > tol (the support).
/// Jumps: bit i = 1 iff |x_{i+1} - x_i| > tol * max(1, ||x||_inf) (the jumps).
SparsityVector sparsity_vector(FamilyKind kind, const Vector& x, double tol);

/// 0 for supports (soft-thresholding is exact), 1e-12 for jumps.
double default_pattern_tolerance(FamilyKind kind) noexcept;

}  // namespace rpsd
