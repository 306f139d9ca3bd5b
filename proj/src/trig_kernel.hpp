#pragma once

#include <cstddef>

namespace epgp::detail {

// out[2r] = cos(theta[r]), out[2r + 1] = sin(theta[r]) for r < count.
// Built with vector math enabled; performs no input validation.
void interleaved_cos_sin(const double* theta, double* out, std::ptrdiff_t count);

}  // namespace epgp::detail
