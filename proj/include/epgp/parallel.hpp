#pragma once

namespace epgp {

// Applies the EPGP_THREADS environment variable (a positive integer) as the
// cap on internal parallelism. Returns the thread count in effect.
int configure_threads_from_env();

}  // namespace epgp
