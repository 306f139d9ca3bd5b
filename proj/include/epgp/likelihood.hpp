#pragma once

#include <optional>

#include <Eigen/Dense>

#include "epgp/basis.hpp"
#include "epgp/variety.hpp"

namespace epgp {

// All trainable quantities of a model. Variances are stored as logarithms so
// that exponentiating always yields a positive definite prior and a positive
// noise variance.
struct ModelState {
  // Squared PDE parameter; empty for the operator-free PDE.
  std::optional<double> a_sq;
  Eigen::MatrixXd z_free;          // m x free_dim
  Eigen::VectorXd log_sigma_j_sq;  // one prior variance per basis row
  double log_sigma0_sq = 0.0;      // noise variance

  [[nodiscard]] std::optional<PdeParam> param() const;
  [[nodiscard]] Eigen::Index frequency_count() const { return z_free.rows(); }
  [[nodiscard]] double noise_variance() const;

  // Throws InvalidArgument on non-finite entries or shapes inconsistent with
  // spec, ConfigError when the PDE parameter is missing.
  void validate(const VarietySpec& spec) const;
};

// Bitwise equality of every field.
[[nodiscard]] bool identical(const ModelState& a, const ModelState& b);

// Cholesky factor of A = phi phi^T + sigma0^2 Sigma^{-1} and the weights
// solving A w = phi Y.
struct Posterior {
  Eigen::MatrixXd chol_A;  // lower triangular
  Eigen::VectorXd weights;
  ModelState state_snapshot;
};

// Gradient of the NLML with the layout of ModelState. a_sq is populated only
// when requested (inverse problems).
struct NlmlGradient {
  std::optional<double> a_sq;
  Eigen::MatrixXd z_free;
  Eigen::VectorXd log_sigma_j_sq;
  double log_sigma0_sq = 0.0;
};

struct Objective {
  double value = 0.0;
  NlmlGradient gradient;
};

// Returns phi phi^T + sigma0^2 Sigma^{-1} as a full symmetric matrix.
[[nodiscard]] Eigen::MatrixXd assemble_A(const Eigen::MatrixXd& phi,
                                         const ModelState& state);

// Negative log marginal likelihood of Y under Y = phi^T w + eps with
// w ~ N(0, Sigma), eps ~ N(0, sigma0^2 I), evaluated in weight space with a
// single Cholesky factorization of the p x p matrix A.
[[nodiscard]] double nlml(const Eigen::MatrixXd& phi, const Eigen::VectorXd& Y,
                          const ModelState& state);

// The same quantity through the n x n marginal covariance
// phi^T Sigma phi + sigma0^2 I. Intended for verification at n <= 200.
[[nodiscard]] double nlml_oracle_dense(const Eigen::MatrixXd& phi,
                                       const Eigen::VectorXd& Y,
                                       const ModelState& state);

// NLML and its analytic gradient, with phi rebuilt from (z_free, a_sq).
// When with_a_sq is false the parameter is held fixed and its component is
// left empty.
[[nodiscard]] Objective nlml_with_gradient(const VarietySpec& spec,
                                           const Eigen::MatrixXd& points,
                                           const Eigen::VectorXd& Y,
                                           const ModelState& state,
                                           bool with_a_sq);

[[nodiscard]] inline NlmlGradient nlml_gradient(const VarietySpec& spec,
                                                const Eigen::MatrixXd& points,
                                                const Eigen::VectorXd& Y,
                                                const ModelState& state,
                                                bool with_a_sq) {
  return nlml_with_gradient(spec, points, Y, state, with_a_sq).gradient;
}

// Throws NumericalError carrying the failing leading minor on breakdown.
[[nodiscard]] Posterior posterior(const Eigen::MatrixXd& phi,
                                  const Eigen::VectorXd& Y,
                                  const ModelState& state);

// phi_star^T w for a basis already evaluated at the test points.
[[nodiscard]] Eigen::VectorXd predict(const Posterior& post,
                                      const Eigen::MatrixXd& phi_star);

// Rebuilds the test basis from the posterior's state snapshot.
[[nodiscard]] Eigen::VectorXd predict(const Posterior& post,
                                      const VarietySpec& spec,
                                      const Eigen::MatrixXd& test_points);

}  // namespace epgp
