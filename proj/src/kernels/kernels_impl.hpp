#pragma once

#include "rpsd/kernels.hpp"

namespace rpsd::kernels::detail {

const KernelTable& scalar_table() noexcept;
#if defined(RPSD_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif

}  // namespace rpsd::kernels::detail
