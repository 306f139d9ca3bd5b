#include "epgp/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "epgp/errors.hpp"

namespace epgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_shapes(const Eigen::MatrixXd& phi, const Eigen::VectorXd& Y,
                  const ModelState& state) {
  if (phi.cols() < 1) throw InvalidArgument("need at least one data point");
  if (phi.cols() != Y.size()) {
    throw InvalidArgument("basis has " + std::to_string(phi.cols()) +
                          " columns but Y has " + std::to_string(Y.size()) +
                          " entries");
  }
  if (phi.rows() != state.log_sigma_j_sq.size()) {
    throw InvalidArgument("basis has " + std::to_string(phi.rows()) +
                          " rows but " +
                          std::to_string(state.log_sigma_j_sq.size()) +
                          " prior variances were given");
  }
  if (!state.log_sigma_j_sq.allFinite() ||
      !std::isfinite(state.log_sigma0_sq)) {
    throw InvalidArgument("variance parameters must be finite");
  }
}

// First leading minor that is not positive definite, by the unblocked
// Cholesky recurrence.
long failing_minor(const Eigen::MatrixXd& A) {
  const Eigen::Index p = A.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double d = A(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) return static_cast<long>(j);
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      L(i, j) = (A(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
    }
  }
  return -1;
}

// Lower triangle of A = phi phi^T + s Sigma^{-1}.
Eigen::MatrixXd lower_A(const Eigen::MatrixXd& phi, const ModelState& state) {
  const Eigen::Index p = phi.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  A.selfadjointView<Eigen::Lower>().rankUpdate(phi);
  A.diagonal().array() +=
      state.noise_variance() * (-state.log_sigma_j_sq.array()).exp();
  return A;
}

// Lower factor of A from the QR decomposition of the stacked matrix
// [phi^T; sqrt(s) Sigma^{-1/2}], whose Gram matrix is A. Used when the
// direct Cholesky loses positivity to rounding: the product phi phi^T is
// never formed, so a positive regularizer always survives.
Eigen::MatrixXd factor_by_qr(const Eigen::MatrixXd& phi,
                             const ModelState& state) {
  const Eigen::Index p = phi.rows();
  const Eigen::Index n = phi.cols();
  Eigen::MatrixXd M(n + p, p);
  M.topRows(n) = phi.transpose();
  M.bottomRows(p).setZero();
  M.bottomRows(p).diagonal() =
      (state.log_sigma0_sq - state.log_sigma_j_sq.array())
          .matrix()
          .unaryExpr([](double v) { return std::exp(0.5 * v); });
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(std::move(M));
  Eigen::MatrixXd L =
      qr.matrixQR().topRows(p).triangularView<Eigen::Upper>().transpose();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (L(j, j) < 0.0) L.col(j) = -L.col(j);
    if (!(L(j, j) > 0.0) || !std::isfinite(L(j, j))) {
      throw NumericalError("QR factorization of A is singular at column " +
                               std::to_string(j),
                           static_cast<long>(j));
    }
  }
  return L;
}

// One Cholesky factorization of A and everything the objective needs from it.
struct WeightSpaceSolve {
  Eigen::MatrixXd L;
  Eigen::VectorXd w;         // A^{-1} phi Y
  Eigen::VectorXd residual;  // Y - phi^T w
  double value = 0.0;
};

WeightSpaceSolve solve_weight_space(const Eigen::MatrixXd& phi,
                                    const Eigen::VectorXd& Y,
                                    const ModelState& state) {
  check_shapes(phi, Y, state);
  const auto n = static_cast<double>(phi.cols());
  const auto p = static_cast<double>(phi.rows());
  const double s = state.noise_variance();

  WeightSpaceSolve out;
  out.L = lower_A(phi, state);
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(out.L);
  if (llt.info() != Eigen::Success) {
    const Eigen::MatrixXd A = lower_A(phi, state);
    if (!(s > 0.0)) {
      const long minor = failing_minor(A.selfadjointView<Eigen::Lower>());
      throw NumericalError(
          "Cholesky factorization of A failed at leading minor " +
              std::to_string(minor) + " (sigma0^2 = " + std::to_string(s) + ")",
          minor);
    }
    out.L = factor_by_qr(phi, state);
  } else {
    out.L.triangularView<Eigen::StrictlyUpper>().setZero();
  }

  out.w = phi * Y;
  out.L.triangularView<Eigen::Lower>().solveInPlace(out.w);
  out.L.transpose().triangularView<Eigen::Upper>().solveInPlace(out.w);
  out.residual = Y - phi.transpose() * out.w;

  const Eigen::ArrayXd inv_prior = (-state.log_sigma_j_sq.array()).exp();
  // Y^T Y - Y^T phi^T A^{-1} phi Y, written without cancellation.
  const double fit = out.residual.squaredNorm() +
                     s * (inv_prior * out.w.array().square()).sum();
  const double log_det_A = 2.0 * out.L.diagonal().array().log().sum();
  out.value = fit / (2.0 * s) + 0.5 * (n - p) * state.log_sigma0_sq +
              0.5 * state.log_sigma_j_sq.sum() + 0.5 * log_det_A +
              0.5 * n * kLog2Pi;
  if (!std::isfinite(out.value)) {
    throw NumericalError("NLML evaluated to a non-finite value");
  }
  return out;
}

}  // namespace

std::optional<PdeParam> ModelState::param() const {
  if (!a_sq) return std::nullopt;
  return PdeParam(*a_sq);
}

double ModelState::noise_variance() const { return std::exp(log_sigma0_sq); }

void ModelState::validate(const VarietySpec& spec) const {
  if (z_free.cols() != spec.free_dim) {
    throw InvalidArgument("z_free has wrong column count");
  }
  if (z_free.rows() < 1) throw InvalidArgument("z_free is empty");
  if (log_sigma_j_sq.size() != spec.rows_per_frequency() * z_free.rows()) {
    throw InvalidArgument("log_sigma_j_sq length " +
                          std::to_string(log_sigma_j_sq.size()) +
                          " does not match basis row count " +
                          std::to_string(spec.rows_per_frequency() *
                                         z_free.rows()));
  }
  if (!z_free.allFinite() || !log_sigma_j_sq.allFinite() ||
      !std::isfinite(log_sigma0_sq)) {
    throw InvalidArgument("model state contains non-finite values");
  }
  if (spec.needs_param()) {
    if (!a_sq) throw ConfigError("model state lacks the PDE parameter");
    (void)PdeParam(*a_sq);
  }
}

bool identical(const ModelState& a, const ModelState& b) {
  return a.a_sq == b.a_sq && a.z_free.rows() == b.z_free.rows() &&
         a.z_free.cols() == b.z_free.cols() && a.z_free == b.z_free &&
         a.log_sigma_j_sq.size() == b.log_sigma_j_sq.size() &&
         a.log_sigma_j_sq == b.log_sigma_j_sq &&
         a.log_sigma0_sq == b.log_sigma0_sq;
}

Eigen::MatrixXd assemble_A(const Eigen::MatrixXd& phi,
                           const ModelState& state) {
  if (phi.rows() != state.log_sigma_j_sq.size()) {
    throw InvalidArgument("basis rows and prior variances disagree");
  }
  Eigen::MatrixXd A = lower_A(phi, state);
  A.triangularView<Eigen::StrictlyUpper>() = A.transpose();
  return A;
}

double nlml(const Eigen::MatrixXd& phi, const Eigen::VectorXd& Y,
            const ModelState& state) {
  return solve_weight_space(phi, Y, state).value;
}

double nlml_oracle_dense(const Eigen::MatrixXd& phi, const Eigen::VectorXd& Y,
                         const ModelState& state) {
  check_shapes(phi, Y, state);
  const Eigen::Index n = phi.cols();
  const Eigen::VectorXd prior = state.log_sigma_j_sq.array().exp().matrix();
  Eigen::MatrixXd K = phi.transpose() * prior.asDiagonal() * phi;
  K.diagonal().array() += state.noise_variance();
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("marginal covariance is not positive definite");
  }
  const Eigen::VectorXd alpha = llt.matrixL().solve(Y);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return 0.5 * alpha.squaredNorm() + 0.5 * log_det +
         0.5 * static_cast<double>(n) * kLog2Pi;
}

Objective nlml_with_gradient(const VarietySpec& spec,
                             const Eigen::MatrixXd& points,
                             const Eigen::VectorXd& Y, const ModelState& state,
                             bool with_a_sq) {
  state.validate(spec);
  if (with_a_sq && !spec.needs_param()) {
    throw ConfigError("this PDE has no parameter to differentiate");
  }
  const BasisMatrix basis = build_phi(spec, points, state.z_free, state.param());
  const Eigen::MatrixXd& phi = basis.phi();
  WeightSpaceSolve solved = solve_weight_space(phi, Y, state);

  const double s = state.noise_variance();
  const auto n = static_cast<double>(phi.cols());
  const Eigen::Index p = phi.rows();

  // dNLML/dphi = A^{-1} phi - (1/s) w r^T
  Eigen::MatrixXd dphi = phi;
  solved.L.triangularView<Eigen::Lower>().solveInPlace(dphi);
  solved.L.transpose().triangularView<Eigen::Upper>().solveInPlace(dphi);
  // q_j = (A^{-1} phi phi^T)_jj, which also gives s Sigma^{-1}_jj (A^{-1})_jj
  // = 1 - q_j without forming A^{-1}.
  const Eigen::VectorXd q = (dphi.array() * phi.array()).rowwise().sum();
  dphi.noalias() -= (1.0 / s) * solved.w * solved.residual.transpose();

  Objective out;
  out.value = solved.value;
  NlmlGradient& grad = out.gradient;
  grad.log_sigma0_sq =
      -solved.residual.squaredNorm() / (2.0 * s) + 0.5 * (n - q.sum());
  grad.log_sigma_j_sq =
      0.5 * q.array() - 0.5 * (-state.log_sigma_j_sq.array()).exp() *
                            solved.w.array().square();

  // Chain rule through phi(r, i) = e^{decay} {cos, sin}(oscillation).
  const Eigen::Index pairs = p / 2;
  using RowView =
      Eigen::Map<const Eigen::MatrixXd, 0, Eigen::Stride<Eigen::Dynamic, 2>>;
  const Eigen::Stride<Eigen::Dynamic, 2> stride(p, 2);
  const RowView gc(dphi.data(), pairs, phi.cols(), stride);
  const RowView gs(dphi.data() + 1, pairs, phi.cols(), stride);
  const RowView pc(phi.data(), pairs, phi.cols(), stride);
  const RowView ps(phi.data() + 1, pairs, phi.cols(), stride);
  const Eigen::MatrixXd d_osc =
      (gs.array() * pc.array() - gc.array() * ps.array()).matrix();
  const Eigen::MatrixXd d_decay =
      (gc.array() * pc.array() + gs.array() * ps.array()).matrix();
  const Eigen::MatrixXd dxi_osc = d_osc * points;
  const Eigen::MatrixXd dxi_decay = d_decay * points;
  const std::vector<bool> mask = variety_for(spec.pde_id).decay_mask();

  const int b = spec.branch_count;
  const double a_sq = resolve_param(spec, state.param());
  const Variety& variety = variety_for(spec.pde_id);
  grad.z_free = Eigen::MatrixXd::Zero(state.z_free.rows(), spec.free_dim);
  double d_a_sq = 0.0;
  for (Eigen::Index j = 0; j < state.z_free.rows(); ++j) {
    const Eigen::VectorXd z = state.z_free.row(j).transpose();
    const auto jacobians = variety.lift_jacobian(z, a_sq);
    for (int br = 0; br < b; ++br) {
      const Eigen::Index pair = j * b + br;
      Eigen::VectorXd dxi(spec.ambient_dim);
      for (int k = 0; k < spec.ambient_dim; ++k) {
        dxi(k) = mask[static_cast<std::size_t>(k)] ? dxi_decay(pair, k)
                                                   : dxi_osc(pair, k);
      }
      const BranchJacobian& jac = jacobians[static_cast<std::size_t>(br)];
      grad.z_free.row(j) += (jac.d_free.transpose() * dxi).transpose();
      d_a_sq += jac.d_param.dot(dxi);
    }
  }
  if (with_a_sq) grad.a_sq = d_a_sq;
  return out;
}

Posterior posterior(const Eigen::MatrixXd& phi, const Eigen::VectorXd& Y,
                    const ModelState& state) {
  WeightSpaceSolve solved = solve_weight_space(phi, Y, state);
  return Posterior{std::move(solved.L), std::move(solved.w), state};
}

Eigen::VectorXd predict(const Posterior& post,
                        const Eigen::MatrixXd& phi_star) {
  if (phi_star.rows() != post.weights.size()) {
    throw InvalidArgument("test basis has " + std::to_string(phi_star.rows()) +
                          " rows, posterior has " +
                          std::to_string(post.weights.size()) + " weights");
  }
  return phi_star.transpose() * post.weights;
}

Eigen::VectorXd predict(const Posterior& post, const VarietySpec& spec,
                        const Eigen::MatrixXd& test_points) {
  const BasisMatrix basis = build_phi(spec, test_points,
                                      post.state_snapshot.z_free,
                                      post.state_snapshot.param());
  return predict(post, basis.phi());
}

}  // namespace epgp
