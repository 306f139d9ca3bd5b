#include "trig_kernel.hpp"

#include <cmath>

namespace epgp::detail {

void interleaved_cos_sin(const double* theta, double* out,
                         std::ptrdiff_t count) {
#pragma omp simd
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    out[2 * r] = std::cos(theta[r]);
    out[2 * r + 1] = std::sin(theta[r]);
  }
}

}  // namespace epgp::detail
