#include "epgp/variety.hpp"

#include <cmath>
#include <random>
#include <string>

#include "epgp/errors.hpp"

namespace epgp {

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidArgument(std::string(what) + " contains non-finite values");
  }
}

// u_tt = a^2 (u_xx + u_yy); the variety is the double cone
// xi_t^2 = a^2 (xi_x^2 + xi_y^2).
class Wave2dVariety final : public Variety {
 public:
  VarietySpec spec() const override { return {PdeId::Wave2d, 3, 2, 2, 0}; }

  std::vector<Eigen::VectorXd> lift(const Eigen::VectorXd& z,
                                    double a_sq) const override {
    const double xi_t = std::sqrt(a_sq) * std::hypot(z(0), z(1));
    return {Eigen::Vector3d(z(0), z(1), xi_t),
            Eigen::Vector3d(z(0), z(1), -xi_t)};
  }

  std::vector<BranchJacobian> lift_jacobian(const Eigen::VectorXd& z,
                                            double a_sq) const override {
    const double a = std::sqrt(a_sq);
    const double rho = std::hypot(z(0), z(1));
    std::vector<BranchJacobian> out;
    for (const double sign : {1.0, -1.0}) {
      BranchJacobian jac{Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3)};
      jac.d_free(0, 0) = 1.0;
      jac.d_free(1, 1) = 1.0;
      // The cone is not differentiable at its vertex; use the zero subgradient.
      if (rho > 0.0) {
        jac.d_free(2, 0) = sign * a * z(0) / rho;
        jac.d_free(2, 1) = sign * a * z(1) / rho;
        jac.d_param(2) = sign * rho / (2.0 * a);
      }
      out.push_back(std::move(jac));
    }
    return out;
  }

  double symbol(const Eigen::VectorXd& xi, double a_sq) const override {
    return xi(2) * xi(2) - a_sq * (xi(0) * xi(0) + xi(1) * xi(1));
  }

  std::vector<OperatorTerm> operator_terms(double a_sq) const override {
    return {{{0, 0, 2}, 1.0}, {{2, 0, 0}, -a_sq}, {{0, 2, 0}, -a_sq}};
  }
};

// u_tt = a^2 u_xx in (x, t).
class Wave1dVariety final : public Variety {
 public:
  VarietySpec spec() const override { return {PdeId::Wave1d, 2, 1, 2, 0}; }

  std::vector<Eigen::VectorXd> lift(const Eigen::VectorXd& z,
                                    double a_sq) const override {
    const double xi_t = std::sqrt(a_sq) * std::abs(z(0));
    return {Eigen::Vector2d(z(0), xi_t), Eigen::Vector2d(z(0), -xi_t)};
  }

  std::vector<BranchJacobian> lift_jacobian(const Eigen::VectorXd& z,
                                            double a_sq) const override {
    const double a = std::sqrt(a_sq);
    std::vector<BranchJacobian> out;
    for (const double sign : {1.0, -1.0}) {
      BranchJacobian jac{Eigen::MatrixXd::Zero(2, 1), Eigen::VectorXd::Zero(2)};
      jac.d_free(0, 0) = 1.0;
      if (z(0) != 0.0) {
        jac.d_free(1, 0) = sign * a * (z(0) > 0.0 ? 1.0 : -1.0);
        jac.d_param(1) = sign * std::abs(z(0)) / (2.0 * a);
      }
      out.push_back(std::move(jac));
    }
    return out;
  }

  double symbol(const Eigen::VectorXd& xi, double a_sq) const override {
    return xi(1) * xi(1) - a_sq * xi(0) * xi(0);
  }

  std::vector<OperatorTerm> operator_terms(double a_sq) const override {
    return {{{0, 2}, 1.0}, {{2, 0}, -a_sq}};
  }
};

// u_t - a u_x = 0. The stored parameter is the speed a itself.
class Transport1dVariety final : public Variety {
 public:
  VarietySpec spec() const override {
    return {PdeId::Transport1d, 2, 1, 1, 0};
  }

  std::vector<Eigen::VectorXd> lift(const Eigen::VectorXd& z,
                                    double speed) const override {
    return {Eigen::Vector2d(z(0), speed * z(0))};
  }

  std::vector<BranchJacobian> lift_jacobian(const Eigen::VectorXd& z,
                                            double speed) const override {
    BranchJacobian jac{Eigen::MatrixXd::Zero(2, 1), Eigen::VectorXd::Zero(2)};
    jac.d_free(0, 0) = 1.0;
    jac.d_free(1, 0) = speed;
    jac.d_param(1) = z(0);
    return {jac};
  }

  double symbol(const Eigen::VectorXd& xi, double speed) const override {
    return xi(1) - speed * xi(0);
  }

  std::vector<OperatorTerm> operator_terms(double speed) const override {
    return {{{0, 1}, 1.0}, {{1, 0}, -speed}};
  }
};

// u_t = kappa u_xx. Oscillatory in x, decaying in t:
// exp(xi_t t) cos(xi_x x) with xi_t = -kappa xi_x^2.
class Heat1dVariety final : public Variety {
 public:
  VarietySpec spec() const override { return {PdeId::Heat1d, 2, 1, 1, 0}; }

  std::vector<Eigen::VectorXd> lift(const Eigen::VectorXd& z,
                                    double kappa) const override {
    return {Eigen::Vector2d(z(0), -kappa * z(0) * z(0))};
  }

  std::vector<BranchJacobian> lift_jacobian(const Eigen::VectorXd& z,
                                            double kappa) const override {
    BranchJacobian jac{Eigen::MatrixXd::Zero(2, 1), Eigen::VectorXd::Zero(2)};
    jac.d_free(0, 0) = 1.0;
    jac.d_free(1, 0) = -2.0 * kappa * z(0);
    jac.d_param(1) = -z(0) * z(0);
    return {jac};
  }

  double symbol(const Eigen::VectorXd& xi, double kappa) const override {
    return xi(1) + kappa * xi(0) * xi(0);
  }

  std::vector<OperatorTerm> operator_terms(double kappa) const override {
    return {{{0, 1}, 1.0}, {{2, 0}, -kappa}};
  }

  std::vector<bool> decay_mask() const override { return {false, true}; }
};

// No PDE: every frequency in R^3 is admissible.
class FreeVariety final : public Variety {
 public:
  VarietySpec spec() const override { return {PdeId::Free, 3, 3, 1, 0}; }

  std::vector<Eigen::VectorXd> lift(const Eigen::VectorXd& z,
                                    double) const override {
    return {z};
  }

  std::vector<BranchJacobian> lift_jacobian(const Eigen::VectorXd&,
                                            double) const override {
    return {{Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)}};
  }

  double symbol(const Eigen::VectorXd&, double) const override { return 0.0; }

  std::vector<OperatorTerm> operator_terms(double) const override { return {}; }
};

}  // namespace

std::string_view to_string(PdeId id) {
  switch (id) {
    case PdeId::Wave2d: return "wave2d";
    case PdeId::Wave1d: return "wave1d";
    case PdeId::Transport1d: return "transport1d";
    case PdeId::Heat1d: return "heat1d";
    case PdeId::Free: return "free";
  }
  return "unknown";
}

PdeId parse_pde_id(std::string_view name) {
  for (const PdeId id : {PdeId::Wave2d, PdeId::Wave1d, PdeId::Transport1d,
                         PdeId::Heat1d, PdeId::Free}) {
    if (to_string(id) == name) return id;
  }
  throw ConfigError("unknown pde id '" + std::string(name) + "'");
}

VarietySpec VarietySpec::for_pde(PdeId id) { return variety_for(id).spec(); }

PdeParam::PdeParam(double a_sq) : a_sq_(a_sq) {
  if (!std::isfinite(a_sq) || a_sq <= 0.0) {
    throw InvalidArgument("PDE parameter must be finite and positive, got " +
                          std::to_string(a_sq));
  }
}

const Variety& variety_for(PdeId id) {
  static const Wave2dVariety wave2d;
  static const Wave1dVariety wave1d;
  static const Transport1dVariety transport1d;
  static const Heat1dVariety heat1d;
  static const FreeVariety free;
  switch (id) {
    case PdeId::Wave2d: return wave2d;
    case PdeId::Wave1d: return wave1d;
    case PdeId::Transport1d: return transport1d;
    case PdeId::Heat1d: return heat1d;
    case PdeId::Free: return free;
  }
  throw ConfigError("unregistered pde id");
}

double resolve_param(const VarietySpec& spec, std::optional<PdeParam> param) {
  if (!spec.needs_param()) return 0.0;
  if (!param) {
    throw ConfigError(std::string(to_string(spec.pde_id)) +
                      " requires a PDE parameter");
  }
  return param->a_sq();
}

std::vector<Eigen::VectorXd> parametrize(const VarietySpec& spec,
                                         const Eigen::VectorXd& z_free,
                                         std::optional<PdeParam> param) {
  if (z_free.size() != spec.free_dim) {
    throw InvalidArgument("free frequency has length " +
                          std::to_string(z_free.size()) + ", expected " +
                          std::to_string(spec.free_dim));
  }
  require_finite(z_free, "free frequency");
  return variety_for(spec.pde_id).lift(z_free, resolve_param(spec, param));
}

std::vector<BranchJacobian> parametrize_jacobian(
    const VarietySpec& spec, const Eigen::VectorXd& z_free,
    std::optional<PdeParam> param) {
  if (z_free.size() != spec.free_dim) {
    throw InvalidArgument("free frequency has wrong length");
  }
  require_finite(z_free, "free frequency");
  return variety_for(spec.pde_id)
      .lift_jacobian(z_free, resolve_param(spec, param));
}

Eigen::MatrixXd sample_free_frequencies(const VarietySpec& spec, int m,
                                        std::uint64_t seed) {
  if (m < 1) {
    throw InvalidArgument("frequency count must be positive, got " +
                          std::to_string(m));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(m, spec.free_dim);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < spec.free_dim; ++k) z(j, k) = normal(rng);
  }
  return z;
}

double symbol_residual(const VarietySpec& spec, const Eigen::VectorXd& xi,
                       std::optional<PdeParam> param) {
  if (xi.size() != spec.ambient_dim) {
    throw InvalidArgument("frequency vector has length " +
                          std::to_string(xi.size()) + ", expected " +
                          std::to_string(spec.ambient_dim));
  }
  require_finite(xi, "frequency vector");
  return variety_for(spec.pde_id).symbol(xi, resolve_param(spec, param));
}

}  // namespace epgp
