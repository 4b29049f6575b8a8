#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "rpsd/types.hpp"

namespace rpsd {

enum class FamilyKind { Axes, Jumps };

/// A finite covering family {C_i} of subspaces of R^n.
///
/// Axes:  C_i = span(e_i), i = 0..n-1.
/// Jumps: C_i = {x : x_j = x_{j+1} for all j != i}, i = 0..n-2; member i is
///        the freedom to jump between positions i and i+1.
class SubspaceFamily {
 public:
  static SubspaceFamily axes(std::size_t n);
  static SubspaceFamily jumps(std::size_t n);

  FamilyKind kind() const noexcept { return kind_; }
  /// Ambient dimension n.
  std::size_t dimension() const noexcept { return n_; }
  /// Number of members m (n for Axes, n-1 for Jumps).
  std::size_t size() const noexcept { return kind_ == FamilyKind::Axes ? n_ : n_ - 1; }

  friend bool operator==(const SubspaceFamily&, const SubspaceFamily&) = default;

 private:
  SubspaceFamily(FamilyKind kind, std::size_t n) : kind_(kind), n_(n) {}
  FamilyKind kind_;
  std::size_t n_;
};

/// Each member i is included independently with probability p[i].
struct BernoulliLaw {
  std::vector<double> p;
};

/// Every index of `forced` is always included; `s` further members are drawn
/// uniformly without replacement from the remaining ones.
struct FixedSampleSizeLaw {
  std::size_t family_size = 0;
  std::size_t s = 0;
  std::vector<std::size_t> forced;  // sorted, unique
};

using SelectionLaw = std::variant<BernoulliLaw, FixedSampleSizeLaw>;

SelectionLaw bernoulli_law(std::vector<double> p);
SelectionLaw uniform_law(std::size_t family_size, std::size_t s, std::vector<std::size_t> forced = {});

/// Number of family members the law draws from.
std::size_t law_size(const SelectionLaw& law);

/// P[C_i ⊆ S] for every member.
std::vector<double> inclusion_probabilities(const SelectionLaw& law);

/// Throws InvalidConfiguration for malformed laws (probabilities outside
/// [0, 1], s larger than the non-forced pool, forced index out of range).
void validate_law(const SelectionLaw& law);

/// Throws AdmissibilityError when some member has zero inclusion probability.
void require_admissible(const SelectionLaw& law);

/// One drawn outcome: sorted member indices.
struct Selection {
  std::vector<std::size_t> chosen;

  std::size_t size() const noexcept { return chosen.size(); }
  friend bool operator==(const Selection&, const Selection&) = default;
};

Selection full_selection(const SubspaceFamily& family);

Selection draw_selection(const SelectionLaw& law, Rng& rng);

/// P_S v, computed matrix-free (masking for Axes, block means for Jumps).
Vector apply_projection(const SubspaceFamily& family, const Selection& sel, const Vector& v);

/// z <- P_S y + (I - P_S) z, in place.
void blend_projection(const SubspaceFamily& family, const Selection& sel, const Vector& y, Vector& z);

/// Explicit n x n matrix of P_S. Only meant for estimation and tests.
Matrix projection_matrix(const SubspaceFamily& family, const Selection& sel);

/// P̄ = E[P_S] together with Q = P̄^{-1/2} and Q^{-1} = P̄^{1/2}.
///
/// Axes families are kept diagonal (only the diagonal vectors are filled);
/// Jumps families carry dense symmetric matrices.
class AveragedProjection {
 public:
  enum class Representation { Diagonal, Dense };

  /// Eigenvalues below this are treated as singular.
  static constexpr double kEigenFloor = 1e-12;

  static AveragedProjection from_diagonal(Vector pbar_diagonal);
  static AveragedProjection from_dense(const Matrix& pbar);
  static AveragedProjection identity(std::size_t n, Representation representation);

  Representation representation() const noexcept { return representation_; }
  bool is_diagonal() const noexcept { return representation_ == Representation::Diagonal; }
  std::size_t dimension() const noexcept;

  double lambda_min() const noexcept { return lambda_min_; }
  double lambda_max() const noexcept { return lambda_max_; }

  /// Dense copies regardless of representation.
  Matrix pbar() const;
  Matrix q() const;
  Matrix qinv() const;

  const Vector& pbar_diagonal() const noexcept { return pbar_diag_; }
  const Vector& q_diagonal() const noexcept { return q_diag_; }
  const Vector& qinv_diagonal() const noexcept { return qinv_diag_; }

  /// out = Q v
  void apply_q(const Vector& v, Vector& out) const;
  /// out = Q^{-1} v
  void apply_qinv(const Vector& v, Vector& out) const;

 private:
  AveragedProjection() = default;

  Representation representation_ = Representation::Diagonal;
  Vector pbar_diag_, q_diag_, qinv_diag_;
  Matrix pbar_, q_, qinv_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

struct ProjectionEstimate {
  enum class Mode { Exact, MonteCarlo };
  Mode mode = Mode::Exact;
  std::size_t samples = 100000;
  std::uint64_t seed = 0x5eed5eedULL;

  static ProjectionEstimate exact() { return {}; }
  static ProjectionEstimate monte_carlo(std::size_t samples, std::uint64_t seed) {
    return {Mode::MonteCarlo, samples, seed};
  }
};

/// Computes P̄ for `law` on `family`.
///
/// Exact mode uses closed forms: inclusion probabilities on the diagonal for
/// Axes, and for Jumps the probability that [l, r] is a constant block of the
/// selection, P̄_ab = sum_{l <= a <= b <= r} P[[l, r] is a block] / (r - l + 1).
/// Monte-Carlo mode averages drawn projection matrices and symmetrizes.
AveragedProjection average_projection(const SubspaceFamily& family, const SelectionLaw& law,
                                      const ProjectionEstimate& estimate = ProjectionEstimate::exact());

/// ||Q_new Q_old^{-1}||_2^2
double transition_norm(const AveragedProjection& q_new, const AveragedProjection& q_old);

}  // namespace rpsd
