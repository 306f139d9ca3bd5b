#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "epgp/likelihood.hpp"

namespace epgp::testing {

// splitmix64; independent of the library's RNG so generated cases do not
// share a stream with the code under test.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : s_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return (next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * uniform());
  }

  Eigen::MatrixXd uniform_matrix(Eigen::Index r, Eigen::Index c, double lo,
                                 double hi) {
    Eigen::MatrixXd out(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) out(i, j) = uniform(lo, hi);
    return out;
  }
  Eigen::MatrixXd normal_matrix(Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd out(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) out(i, j) = normal();
    return out;
  }

 private:
  std::uint64_t s_;
};

// -log N(Y; 0, phi^T Sigma phi + s I), straight from the dense covariance.
inline double dense_gaussian_nll(const Eigen::MatrixXd& phi,
                                 const Eigen::VectorXd& Y,
                                 const ModelState& st) {
  const Eigen::Index n = phi.cols();
  Eigen::VectorXd sig = st.log_sigma_j_sq.array().exp();
  Eigen::MatrixXd K = phi.transpose() * sig.asDiagonal() * phi;
  K.diagonal().array() += std::exp(st.log_sigma0_sq);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
  double logdet = ldlt.vectorD().array().log().sum();
  double quad = Y.dot(ldlt.solve(Y));
  return 0.5 * quad + 0.5 * logdet +
         0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

inline double rel_err(double a, double b, double floor = 0.0) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor, 1e-300});
}

}  // namespace epgp::testing
