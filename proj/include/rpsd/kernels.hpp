#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace rpsd::kernels {

// Data-parallel inner loops. Each kernel has a portable scalar reference and,
// on x86-64, an AVX2 variant selected at runtime. Elementwise kernels produce
// bit-identical results across backends; reductions agree to rounding.

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*squared_norm)(std::span<const double>);
  /// y += alpha * x
  void (*axpy)(double alpha, std::span<const double> x, std::span<double> y);
  /// out = a .* b
  void (*hadamard)(std::span<const double> a, std::span<const double> b, std::span<double> out);
  /// out_i = sign(u_i) max(|u_i| - t, 0); exact +0.0 inside the threshold.
  void (*soft_threshold)(std::span<const double> u, double t, std::span<double> out);
  /// sum_j values[j] * dense[index[j]]
  double (*sparse_dot)(std::span<const double> values, std::span<const std::int32_t> index,
                       std::span<const double> dense);
};

bool supported(Backend backend) noexcept;

/// Kernel table for a specific backend. Throws InvalidConfiguration if the
/// CPU or the build cannot run it.
const KernelTable& table(Backend backend);

/// Backend picked on first use: AVX2 when the CPU has AVX2+FMA, unless the
/// environment variable RPSD_KERNELS=scalar is set.
Backend active_backend();
void set_active_backend(Backend backend);
const KernelTable& active();

std::string_view name(Backend backend) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) { return active().dot(a, b); }
inline double squared_norm(std::span<const double> a) { return active().squared_norm(a); }
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) { active().axpy(alpha, x, y); }
inline void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  active().hadamard(a, b, out);
}
inline void soft_threshold(std::span<const double> u, double t, std::span<double> out) {
  active().soft_threshold(u, t, out);
}
inline double sparse_dot(std::span<const double> values, std::span<const std::int32_t> index,
                         std::span<const double> dense) {
  return active().sparse_dot(values, index, dense);
}

}  // namespace rpsd::kernels
