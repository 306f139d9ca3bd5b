#include "epgp/parallel.hpp"

#include <cstdlib>
#include <string>

#include <Eigen/Core>
#ifdef _OPENMP
#include <omp.h>
#endif

namespace epgp {

int configure_threads_from_env() {
  const char* raw = std::getenv("EPGP_THREADS");
  if (raw != nullptr) {
    try {
      const int n = std::stoi(raw);
      if (n > 0) {
        Eigen::setNbThreads(n);
#ifdef _OPENMP
        omp_set_num_threads(n);
#endif
      }
    } catch (const std::exception&) {
      // Malformed values leave the default in place.
    }
  }
  return Eigen::nbThreads();
}

}  // namespace epgp
