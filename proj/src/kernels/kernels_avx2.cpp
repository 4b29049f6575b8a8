// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace rpsd::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i));
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(_mm256_loadu_pd(y.data() + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void soft_threshold(std::span<const double> u, double t, std::span<double> out) {
  const std::size_t n = u.size();
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d vt = _mm256_set1_pd(t);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(u.data() + i);
    const __m256d shrunk = _mm256_sub_pd(_mm256_andnot_pd(sign_mask, v), vt);
    const __m256d keep = _mm256_cmp_pd(shrunk, zero, _CMP_GT_OQ);
    const __m256d signed_val = _mm256_or_pd(shrunk, _mm256_and_pd(sign_mask, v));
    _mm256_storeu_pd(out.data() + i, _mm256_and_pd(keep, signed_val));
  }
  for (; i < n; ++i) {
    const double shrunk = std::abs(u[i]) - t;
    out[i] = shrunk > 0.0 ? std::copysign(shrunk, u[i]) : 0.0;
  }
}

double sparse_dot(std::span<const double> values, std::span<const std::int32_t> index,
                  std::span<const double> dense) {
  const std::size_t nnz = values.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= nnz; j += 4) {
    const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(index.data() + j));
    const __m256d gathered = _mm256_i32gather_pd(dense.data(), idx, 8);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(values.data() + j), gathered, acc);
  }
  double total = hsum(acc);
  for (; j < nnz; ++j) total += values[j] * dense[static_cast<std::size_t>(index[j])];
  return total;
}

}  // namespace

const KernelTable& avx2_table() noexcept {
  static const KernelTable table{dot, squared_norm, axpy, hadamard, soft_threshold, sparse_dot};
  return table;
}

}  // namespace rpsd::kernels::detail
