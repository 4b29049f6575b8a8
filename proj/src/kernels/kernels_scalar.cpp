#include <cmath>

#include "kernels_impl.hpp"

namespace rpsd::kernels::detail {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = y[i] + alpha * x[i];
}

void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

void soft_threshold(std::span<const double> u, double t, std::span<double> out) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double shrunk = std::abs(u[i]) - t;
    out[i] = shrunk > 0.0 ? std::copysign(shrunk, u[i]) : 0.0;
  }
}

double sparse_dot(std::span<const double> values, std::span<const std::int32_t> index,
                  std::span<const double> dense) {
  double acc = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) acc += values[j] * dense[static_cast<std::size_t>(index[j])];
  return acc;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{dot, squared_norm, axpy, hadamard, soft_threshold, sparse_dot};
  return table;
}

}  // namespace rpsd::kernels::detail
