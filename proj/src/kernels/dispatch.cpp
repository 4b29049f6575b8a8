#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "rpsd/error.hpp"

namespace rpsd::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(RPSD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("RPSD_KERNELS"); env != nullptr && std::string(env) == "scalar")
    return Backend::Scalar;
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{&table(detect())};
  return ptr;
}

}  // namespace

bool supported(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return cpu_has_avx2();
  }
  return false;
}

const KernelTable& table(Backend backend) {
  if (!supported(backend))
    throw InvalidConfiguration("kernel backend " + std::string(name(backend)) + " is not available");
#if defined(RPSD_HAVE_AVX2)
  if (backend == Backend::Avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

Backend active_backend() { return &active() == &detail::scalar_table() ? Backend::Scalar : Backend::Avx2; }

void set_active_backend(Backend backend) { current().store(&table(backend), std::memory_order_release); }

std::string_view name(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace rpsd::kernels
