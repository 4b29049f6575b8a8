#include "rpsd/subspace.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rpsd/error.hpp"
#include "rpsd/kernels.hpp"

namespace rpsd {

SubspaceFamily SubspaceFamily::axes(std::size_t n) {
  if (n == 0) throw InvalidConfiguration("axes family needs n >= 1");
  return {FamilyKind::Axes, n};
}

SubspaceFamily SubspaceFamily::jumps(std::size_t n) {
  if (n < 2) throw InvalidConfiguration("jumps family needs n >= 2");
  return {FamilyKind::Jumps, n};
}

SelectionLaw bernoulli_law(std::vector<double> p) {
  SelectionLaw law = BernoulliLaw{std::move(p)};
  validate_law(law);
  return law;
}

SelectionLaw uniform_law(std::size_t family_size, std::size_t s, std::vector<std::size_t> forced) {
  std::sort(forced.begin(), forced.end());
  forced.erase(std::unique(forced.begin(), forced.end()), forced.end());
  SelectionLaw law = FixedSampleSizeLaw{family_size, s, std::move(forced)};
  validate_law(law);
  return law;
}

std::size_t law_size(const SelectionLaw& law) {
  if (const auto* b = std::get_if<BernoulliLaw>(&law)) return b->p.size();
  return std::get<FixedSampleSizeLaw>(law).family_size;
}

void validate_law(const SelectionLaw& law) {
  if (const auto* b = std::get_if<BernoulliLaw>(&law)) {
    if (b->p.empty()) throw InvalidConfiguration("Bernoulli law over an empty family");
    for (double p : b->p)
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidConfiguration("Bernoulli probability outside [0, 1]");
    return;
  }
  const auto& f = std::get<FixedSampleSizeLaw>(law);
  if (f.family_size == 0) throw InvalidConfiguration("sample-size law over an empty family");
  if (!std::is_sorted(f.forced.begin(), f.forced.end()) ||
      std::adjacent_find(f.forced.begin(), f.forced.end()) != f.forced.end())
    throw InvalidConfiguration("forced set must be sorted and unique");
  if (!f.forced.empty() && f.forced.back() >= f.family_size)
    throw InvalidConfiguration("forced index out of range");
  const std::size_t pool = f.family_size - f.forced.size();
  if (f.s > pool)
    throw InvalidConfiguration("sample size " + std::to_string(f.s) + " exceeds the " + std::to_string(pool) +
                               " non-forced members");
}

std::vector<double> inclusion_probabilities(const SelectionLaw& law) {
  if (const auto* b = std::get_if<BernoulliLaw>(&law)) return b->p;
  const auto& f = std::get<FixedSampleSizeLaw>(law);
  const std::size_t pool = f.family_size - f.forced.size();
  const double rate = pool == 0 ? 0.0 : static_cast<double>(f.s) / static_cast<double>(pool);
  std::vector<double> probs(f.family_size, rate);
  for (std::size_t i : f.forced) probs[i] = 1.0;
  return probs;
}

void require_admissible(const SelectionLaw& law) {
  validate_law(law);
  const auto probs = inclusion_probabilities(law);
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (!(probs[i] > 0.0))
      throw AdmissibilityError("member " + std::to_string(i) + " is never selected; the law is not admissible");
}

Selection full_selection(const SubspaceFamily& family) {
  Selection sel;
  sel.chosen.resize(family.size());
  std::iota(sel.chosen.begin(), sel.chosen.end(), std::size_t{0});
  return sel;
}

Selection draw_selection(const SelectionLaw& law, Rng& rng) {
  validate_law(law);
  Selection sel;
  if (const auto* b = std::get_if<BernoulliLaw>(&law)) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < b->p.size(); ++i)
      if (unit(rng) < b->p[i]) sel.chosen.push_back(i);
    return sel;
  }
  const auto& f = std::get<FixedSampleSizeLaw>(law);
  std::vector<std::size_t> pool;
  pool.reserve(f.family_size - f.forced.size());
  for (std::size_t i = 0, next = 0; i < f.family_size; ++i) {
    if (next < f.forced.size() && f.forced[next] == i) {
      ++next;
      continue;
    }
    pool.push_back(i);
  }
  // Partial Fisher-Yates: the first s slots become a uniform s-subset.
  for (std::size_t j = 0; j < f.s; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
    std::swap(pool[j], pool[pick(rng)]);
  }
  sel.chosen = f.forced;
  sel.chosen.insert(sel.chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(f.s));
  std::sort(sel.chosen.begin(), sel.chosen.end());
  return sel;
}

namespace {

void check_dimension(const SubspaceFamily& family, Eigen::Index size) {
  if (static_cast<std::size_t>(size) != family.dimension())
    throw InvalidConfiguration("vector dimension " + std::to_string(size) + " does not match family dimension " +
                               std::to_string(family.dimension()));
}

// Calls fn(begin, end) for every constant block [begin, end) of a Jumps selection.
template <class Fn>
void for_each_block(std::size_t n, const Selection& sel, Fn&& fn) {
  std::size_t begin = 0;
  for (std::size_t jump : sel.chosen) {
    fn(begin, jump + 1);
    begin = jump + 1;
  }
  fn(begin, n);
}

}  // namespace

Vector apply_projection(const SubspaceFamily& family, const Selection& sel, const Vector& v) {
  check_dimension(family, v.size());
  Vector out = Vector::Zero(v.size());
  if (family.kind() == FamilyKind::Axes) {
    for (std::size_t i : sel.chosen) out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(i)];
    return out;
  }
  for_each_block(family.dimension(), sel, [&](std::size_t begin, std::size_t end) {
    const auto len = static_cast<Eigen::Index>(end - begin);
    const auto start = static_cast<Eigen::Index>(begin);
    out.segment(start, len).setConstant(v.segment(start, len).mean());
  });
  return out;
}

void blend_projection(const SubspaceFamily& family, const Selection& sel, const Vector& y, Vector& z) {
  check_dimension(family, y.size());
  check_dimension(family, z.size());
  if (family.kind() == FamilyKind::Axes) {
    for (std::size_t i : sel.chosen) z[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(i)];
    return;
  }
  // z + P_S (y - z): each block of z is shifted by the block mean of y - z.
  for_each_block(family.dimension(), sel, [&](std::size_t begin, std::size_t end) {
    const auto len = static_cast<Eigen::Index>(end - begin);
    const auto start = static_cast<Eigen::Index>(begin);
    const double shift = (y.segment(start, len) - z.segment(start, len)).mean();
    z.segment(start, len).array() += shift;
  });
}

Matrix projection_matrix(const SubspaceFamily& family, const Selection& sel) {
  const auto n = static_cast<Eigen::Index>(family.dimension());
  Matrix p = Matrix::Zero(n, n);
  if (family.kind() == FamilyKind::Axes) {
    for (std::size_t i : sel.chosen) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    return p;
  }
  for_each_block(family.dimension(), sel, [&](std::size_t begin, std::size_t end) {
    const auto len = static_cast<Eigen::Index>(end - begin);
    const auto start = static_cast<Eigen::Index>(begin);
    p.block(start, start, len, len).setConstant(1.0 / static_cast<double>(len));
  });
  return p;
}

// AveragedProjection -------------------------------------------------------

AveragedProjection AveragedProjection::from_diagonal(Vector pbar_diagonal) {
  AveragedProjection ap;
  ap.representation_ = Representation::Diagonal;
  ap.lambda_min_ = pbar_diagonal.minCoeff();
  ap.lambda_max_ = pbar_diagonal.maxCoeff();
  if (!(ap.lambda_min_ >= kEigenFloor))
    throw NearSingularError("averaged projection has eigenvalue " + std::to_string(ap.lambda_min_) +
                            " below the floor");
  ap.q_diag_ = pbar_diagonal.array().rsqrt();
  ap.qinv_diag_ = pbar_diagonal.array().sqrt();
  ap.pbar_diag_ = std::move(pbar_diagonal);
  return ap;
}

AveragedProjection AveragedProjection::from_dense(const Matrix& pbar) {
  if (pbar.rows() != pbar.cols() || pbar.rows() == 0)
    throw InvalidConfiguration("averaged projection must be a non-empty square matrix");
  const Matrix sym = 0.5 * (pbar + pbar.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NearSingularError("eigendecomposition of the averaged projection failed");
  const Vector& values = eig.eigenvalues();
  AveragedProjection ap;
  ap.representation_ = Representation::Dense;
  ap.lambda_min_ = values.minCoeff();
  ap.lambda_max_ = values.maxCoeff();
  if (!(ap.lambda_min_ >= kEigenFloor))
    throw NearSingularError("averaged projection has eigenvalue " + std::to_string(ap.lambda_min_) +
                            " below the floor");
  const Matrix& vecs = eig.eigenvectors();
  Matrix q = vecs * values.array().rsqrt().matrix().asDiagonal() * vecs.transpose();
  Matrix qinv = vecs * values.array().sqrt().matrix().asDiagonal() * vecs.transpose();
  ap.q_ = 0.5 * (q + q.transpose());
  ap.qinv_ = 0.5 * (qinv + qinv.transpose());
  ap.pbar_ = sym;
  return ap;
}

AveragedProjection AveragedProjection::identity(std::size_t n, Representation representation) {
  const auto size = static_cast<Eigen::Index>(n);
  AveragedProjection ap;
  ap.representation_ = representation;
  if (representation == Representation::Diagonal) {
    ap.pbar_diag_ = ap.q_diag_ = ap.qinv_diag_ = Vector::Ones(size);
  } else {
    ap.pbar_ = ap.q_ = ap.qinv_ = Matrix::Identity(size, size);
  }
  ap.lambda_min_ = ap.lambda_max_ = 1.0;
  return ap;
}

std::size_t AveragedProjection::dimension() const noexcept {
  return static_cast<std::size_t>(is_diagonal() ? pbar_diag_.size() : pbar_.rows());
}

Matrix AveragedProjection::pbar() const { return is_diagonal() ? Matrix(pbar_diag_.asDiagonal()) : pbar_; }
Matrix AveragedProjection::q() const { return is_diagonal() ? Matrix(q_diag_.asDiagonal()) : q_; }
Matrix AveragedProjection::qinv() const { return is_diagonal() ? Matrix(qinv_diag_.asDiagonal()) : qinv_; }

void AveragedProjection::apply_q(const Vector& v, Vector& out) const {
  if (is_diagonal()) {
    out.resize(v.size());
    kernels::hadamard(as_span(q_diag_), as_span(v), as_span(out));
  } else {
    out.noalias() = q_ * v;
  }
}

void AveragedProjection::apply_qinv(const Vector& v, Vector& out) const {
  if (is_diagonal()) {
    out.resize(v.size());
    kernels::hadamard(as_span(qinv_diag_), as_span(v), as_span(out));
  } else {
    out.noalias() = qinv_ * v;
  }
}

namespace {

// P̄ for a Jumps family given the probability w(l, r) that positions [l, r]
// form exactly one constant block. Entry (a, b), a <= b, sums w(l, r)/(r-l+1)
// over l <= a, r >= b.
template <class BlockProb>
Matrix jumps_pbar(std::size_t n, BlockProb&& block_prob) {
  const auto size = static_cast<Eigen::Index>(n);
  Matrix weight = Matrix::Zero(size, size);  // weight(l, r), r >= l
  for (std::size_t l = 0; l < n; ++l) block_prob(l, [&](std::size_t r, double prob) {
      weight(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r)) = prob / static_cast<double>(r - l + 1);
    });
  // Suffix sums over r, then prefix sums over l.
  for (Eigen::Index l = 0; l < size; ++l)
    for (Eigen::Index r = size - 2; r >= 0; --r) weight(l, r) += weight(l, r + 1);
  for (Eigen::Index l = 1; l < size; ++l) weight.row(l) += weight.row(l - 1);
  Matrix pbar(size, size);
  for (Eigen::Index a = 0; a < size; ++a)
    for (Eigen::Index b = a; b < size; ++b) pbar(a, b) = pbar(b, a) = weight(a, b);
  return pbar;
}

Matrix jumps_pbar_bernoulli(std::size_t n, const std::vector<double>& p) {
  return jumps_pbar(n, [&](std::size_t l, auto&& emit) {
    const double left = l > 0 ? p[l - 1] : 1.0;
    double interior = 1.0;  // no jump inside [l, r]
    for (std::size_t r = l; r < n; ++r) {
      const double right = r + 1 < n ? p[r] : 1.0;
      emit(r, left * interior * right);
      if (r + 1 < n) interior *= 1.0 - p[r];
      if (interior == 0.0) break;
    }
  });
}

Matrix jumps_pbar_uniform(std::size_t n, const FixedSampleSizeLaw& law) {
  const std::size_t m = n - 1;
  std::vector<bool> forced(m, false);
  for (std::size_t i : law.forced) forced[i] = true;
  const double pool = static_cast<double>(m - law.forced.size());
  const double s = static_cast<double>(law.s);
  return jumps_pbar(n, [&](std::size_t l, auto&& emit) {
    // Required jumps: l-1 and r (when they exist); excluded jumps: l..r-1.
    // For `need` required non-forced jumps and `out` excluded ones the
    // probability is prod_{i<need} (s-i)/(pool-i) * prod_{i<out} (pool-s-i)/(pool-need-i).
    std::size_t need_left = (l > 0 && !forced[l - 1]) ? 1 : 0;
    double excluded[3] = {1.0, 1.0, 1.0};  // running product for need = 0, 1, 2
    for (std::size_t r = l; r < n; ++r) {
      const std::size_t out = r - l;
      const std::size_t need = need_left + ((r + 1 < n && !forced[r]) ? 1 : 0);
      double prob = excluded[need];
      for (std::size_t i = 0; i < need; ++i) prob *= (s - static_cast<double>(i)) / (pool - static_cast<double>(i));
      if (static_cast<double>(need) > s) prob = 0.0;
      emit(r, prob);
      if (r + 1 >= n) break;
      if (forced[r]) break;  // jump r is always present, so no longer block can start at l
      for (std::size_t k = 0; k < 3; ++k) {
        const double denom = pool - static_cast<double>(k) - static_cast<double>(out);
        const double numer = pool - s - static_cast<double>(out);
        excluded[k] = (denom > 0.0 && numer > 0.0) ? excluded[k] * numer / denom : 0.0;
      }
    }
  });
}

AveragedProjection monte_carlo(const SubspaceFamily& family, const SelectionLaw& law,
                               const ProjectionEstimate& estimate) {
  if (estimate.samples == 0) throw InvalidConfiguration("Monte-Carlo estimate needs at least one sample");
  Rng rng(estimate.seed);
  const auto n = static_cast<Eigen::Index>(family.dimension());
  const double inv = 1.0 / static_cast<double>(estimate.samples);
  if (family.kind() == FamilyKind::Axes) {
    Vector counts = Vector::Zero(n);
    for (std::size_t t = 0; t < estimate.samples; ++t)
      for (std::size_t i : draw_selection(law, rng).chosen) counts[static_cast<Eigen::Index>(i)] += 1.0;
    return AveragedProjection::from_diagonal(counts * inv);
  }
  Matrix sum = Matrix::Zero(n, n);
  for (std::size_t t = 0; t < estimate.samples; ++t) {
    const Selection sel = draw_selection(law, rng);
    for_each_block(family.dimension(), sel, [&](std::size_t begin, std::size_t end) {
      const auto len = static_cast<Eigen::Index>(end - begin);
      const auto start = static_cast<Eigen::Index>(begin);
      sum.block(start, start, len, len).array() += 1.0 / static_cast<double>(len);
    });
  }
  sum *= inv;
  return AveragedProjection::from_dense(0.5 * (sum + sum.transpose()));
}

}  // namespace

AveragedProjection average_projection(const SubspaceFamily& family, const SelectionLaw& law,
                                      const ProjectionEstimate& estimate) {
  if (law_size(law) != family.size())
    throw InvalidConfiguration("law draws from " + std::to_string(law_size(law)) + " members but the family has " +
                               std::to_string(family.size()));
  require_admissible(law);
  if (estimate.mode == ProjectionEstimate::Mode::MonteCarlo) return monte_carlo(family, law, estimate);

  if (family.kind() == FamilyKind::Axes) {
    const auto probs = inclusion_probabilities(law);
    return AveragedProjection::from_diagonal(Eigen::Map<const Vector>(probs.data(), static_cast<Eigen::Index>(probs.size())));
  }
  const std::size_t n = family.dimension();
  if (const auto* b = std::get_if<BernoulliLaw>(&law)) return AveragedProjection::from_dense(jumps_pbar_bernoulli(n, b->p));
  return AveragedProjection::from_dense(jumps_pbar_uniform(n, std::get<FixedSampleSizeLaw>(law)));
}

double transition_norm(const AveragedProjection& q_new, const AveragedProjection& q_old) {
  if (q_new.dimension() != q_old.dimension())
    throw InvalidConfiguration("transition between projections of different dimension");
  if (q_new.is_diagonal() && q_old.is_diagonal())
    return (q_new.q_diagonal().array() * q_old.qinv_diagonal().array()).square().maxCoeff();
  const Matrix product = q_new.q() * q_old.qinv();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(product.transpose() * product, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

}  // namespace rpsd
