#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "rpsd/types.hpp"

namespace rpsd {

/// Compressed-row sparse matrix.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::int32_t> col;
  std::vector<double> val;

  std::size_t nnz() const noexcept { return val.size(); }

  /// out = A x
  void multiply(const Vector& x, Vector& out) const;
  /// out = A^T r
  void multiply_transpose(const Vector& r, Vector& out) const;

  static CsrMatrix from_dense(const Matrix& dense);
  Matrix to_dense() const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

/// Samples (a_i, b_i) with labels in {-1, +1}.
struct Dataset {
  CsrMatrix features;
  std::vector<double> labels;

  std::size_t samples() const noexcept { return features.rows; }
  std::size_t dimension() const noexcept { return features.cols; }
};

/// Reads LibSVM text ("<label> idx:val ..."), gzip-compressed when the path
/// ends in ".gz". Indices are 1-based; labels 0/-1 map to -1 and 1/+1 to +1.
/// The column count is the largest index seen unless `dimension` is given.
/// Throws ParseError (with line number) or DataError.
Dataset parse_libsvm(const std::filesystem::path& path, std::optional<std::size_t> dimension = std::nullopt);
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> dimension = std::nullopt);
void write_libsvm(const Dataset& data, std::ostream& out);

/// Largest eigenvalue of A^T A by power iteration (relative tolerance `tol`).
double spectral_norm_squared(const CsrMatrix& a, double tol = 1e-8, std::size_t max_iters = 1000);

struct SmoothnessConstants {
  double lipschitz = 0.0;         // L
  double strong_convexity = 0.0;  // mu
};

/// Smooth part f of the composite objective.
///
///   logistic:      f(x) = (1/m) sum log(1 + exp(-b_i a_i^T x)) + (lambda2/2) ||x||^2
///   least squares: f(x) = (1/(2m)) ||A x - b||^2 + (lambda2/2) ||x||^2
class SmoothObjective {
 public:
  enum class Kind { LogisticRidge, LeastSquares };

  static SmoothObjective logistic_ridge(std::shared_ptr<const Dataset> data, double lambda2);
  static SmoothObjective least_squares(CsrMatrix a, Vector b, double lambda2);

  Kind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return data_->features.cols; }
  std::size_t samples() const noexcept { return data_->features.rows; }
  double lambda2() const noexcept { return lambda2_; }
  const Dataset& data() const noexcept { return *data_; }

  double lipschitz() const noexcept { return constants_.lipschitz; }
  double strong_convexity() const noexcept { return constants_.strong_convexity; }
  const SmoothnessConstants& constants() const noexcept { return constants_; }

  /// Returns f(x) and writes grad f(x).
  double value_and_gradient(const Vector& x, Vector& grad) const;
  double value(const Vector& x) const;

 private:
  SmoothObjective(Kind kind, std::shared_ptr<const Dataset> data, double lambda2);

  Kind kind_;
  std::shared_ptr<const Dataset> data_;  // for least squares, labels hold b
  double lambda2_;
  SmoothnessConstants constants_;
};

/// L = sigma_max(A)^2/(4m) + lambda2 and mu = lambda2 for logistic;
/// L = sigma_max(A)^2/m + lambda2 and mu = sigma_min(A)^2/m + lambda2 for
/// least squares (sigma_min from a dense eigensolve when n <= 2000, else 0).
SmoothnessConstants lipschitz_constants(SmoothObjective::Kind kind, const CsrMatrix& a, double lambda2);

/// log(1 + exp(-t)) without overflow.
double logistic_loss(double t) noexcept;
/// 1 / (1 + exp(t)) without overflow.
double logistic_sigmoid_neg(double t) noexcept;

}  // namespace rpsd
