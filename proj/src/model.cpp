#include "rpsd/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "rpsd/error.hpp"
#include "rpsd/kernels.hpp"

namespace rpsd {

void CsrMatrix::multiply(const Vector& x, Vector& out) const {
  if (static_cast<std::size_t>(x.size()) != cols) throw InvalidConfiguration("dimension mismatch in A x");
  out.resize(static_cast<Eigen::Index>(rows));
  const std::span<const double> dense = as_span(x);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t begin = row_ptr[i];
    const std::size_t len = row_ptr[i + 1] - begin;
    out[static_cast<Eigen::Index>(i)] =
        kernels::sparse_dot(std::span<const double>(val).subspan(begin, len),
                            std::span<const std::int32_t>(col).subspan(begin, len), dense);
  }
}

void CsrMatrix::multiply_transpose(const Vector& r, Vector& out) const {
  if (static_cast<std::size_t>(r.size()) != rows) throw InvalidConfiguration("dimension mismatch in A^T r");
  out.setZero(static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const double ri = r[static_cast<Eigen::Index>(i)];
    if (ri == 0.0) continue;
    for (std::size_t j = row_ptr[i]; j < row_ptr[i + 1]; ++j) out[col[j]] += ri * val[j];
  }
}

CsrMatrix CsrMatrix::from_dense(const Matrix& dense) {
  CsrMatrix a;
  a.rows = static_cast<std::size_t>(dense.rows());
  a.cols = static_cast<std::size_t>(dense.cols());
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        a.col.push_back(static_cast<std::int32_t>(j));
        a.val.push_back(dense(i, j));
      }
    }
    a.row_ptr.push_back(a.val.size());
  }
  return a;
}

Matrix CsrMatrix::to_dense() const {
  Matrix dense = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = row_ptr[i]; j < row_ptr[i + 1]; ++j) dense(static_cast<Eigen::Index>(i), col[j]) += val[j];
  return dense;
}

double spectral_norm_squared(const CsrMatrix& a, double tol, std::size_t max_iters) {
  if (a.cols == 0 || a.rows == 0) return 0.0;
  // Deterministic, non-degenerate start vector.
  Vector v(static_cast<Eigen::Index>(a.cols));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
  v.normalize();
  Vector av, atav;
  double estimate = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    a.multiply(v, av);
    a.multiply_transpose(av, atav);
    const double rayleigh = v.dot(atav);
    const double norm = atav.norm();
    if (norm == 0.0) return 0.0;
    v = atav / norm;
    const bool converged = std::abs(rayleigh - estimate) <= tol * std::max(1e-300, std::abs(rayleigh));
    estimate = rayleigh;
    if (converged && it > 0) break;
  }
  return estimate;
}

SmoothnessConstants lipschitz_constants(SmoothObjective::Kind kind, const CsrMatrix& a, double lambda2) {
  const double m = static_cast<double>(std::max<std::size_t>(a.rows, 1));
  const double sigma_sq = spectral_norm_squared(a);
  SmoothnessConstants c;
  if (kind == SmoothObjective::Kind::LogisticRidge) {
    c.lipschitz = sigma_sq / (4.0 * m) + lambda2;
    c.strong_convexity = lambda2;
    return c;
  }
  c.lipschitz = sigma_sq / m + lambda2;
  c.strong_convexity = lambda2;
  if (a.cols <= 2000 && a.rows >= a.cols) {
    const Matrix dense = a.to_dense();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(dense.transpose() * dense, Eigen::EigenvaluesOnly);
    c.strong_convexity += std::max(0.0, eig.eigenvalues().minCoeff()) / m;
  }
  return c;
}

double logistic_loss(double t) noexcept { return std::log1p(std::exp(-std::abs(t))) + std::max(0.0, -t); }

double logistic_sigmoid_neg(double t) noexcept {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

SmoothObjective::SmoothObjective(Kind kind, std::shared_ptr<const Dataset> data, double lambda2)
    : kind_(kind), data_(std::move(data)), lambda2_(lambda2) {
  if (!data_) throw InvalidConfiguration("objective without data");
  if (!(lambda2 >= 0.0)) throw InvalidConfiguration("ridge weight must be >= 0");
  if (data_->labels.size() != data_->features.rows) throw InvalidConfiguration("label count differs from row count");
  if (data_->features.rows == 0) throw InvalidConfiguration("objective over an empty dataset");
  constants_ = lipschitz_constants(kind_, data_->features, lambda2_);
  if (!(constants_.lipschitz > 0.0)) throw InvalidConfiguration("smoothness constant must be positive");
}

SmoothObjective SmoothObjective::logistic_ridge(std::shared_ptr<const Dataset> data, double lambda2) {
  if (data)
    for (double b : data->labels)
      if (b != 1.0 && b != -1.0) throw DataError("logistic labels must be -1 or +1");
  return SmoothObjective(Kind::LogisticRidge, std::move(data), lambda2);
}

SmoothObjective SmoothObjective::least_squares(CsrMatrix a, Vector b, double lambda2) {
  auto data = std::make_shared<Dataset>();
  data->features = std::move(a);
  data->labels.assign(b.data(), b.data() + b.size());
  return SmoothObjective(Kind::LeastSquares, std::move(data), lambda2);
}

double SmoothObjective::value_and_gradient(const Vector& x, Vector& grad) const {
  const CsrMatrix& a = data_->features;
  const std::vector<double>& b = data_->labels;
  const double inv_m = 1.0 / static_cast<double>(a.rows);
  Vector ax;
  a.multiply(x, ax);
  double loss = 0.0;
  if (kind_ == Kind::LogisticRidge) {
    for (Eigen::Index i = 0; i < ax.size(); ++i) {
      const double bi = b[static_cast<std::size_t>(i)];
      const double t = bi * ax[i];
      loss += logistic_loss(t);
      ax[i] = -bi * logistic_sigmoid_neg(t) * inv_m;
    }
  } else {
    for (Eigen::Index i = 0; i < ax.size(); ++i) {
      const double r = ax[i] - b[static_cast<std::size_t>(i)];
      loss += 0.5 * r * r;
      ax[i] = r * inv_m;
    }
  }
  a.multiply_transpose(ax, grad);
  kernels::axpy(lambda2_, as_span(x), as_span(grad));
  return loss * inv_m + 0.5 * lambda2_ * kernels::squared_norm(as_span(x));
}

double SmoothObjective::value(const Vector& x) const {
  Vector grad;
  return value_and_gradient(x, grad);
}

}  // namespace rpsd
