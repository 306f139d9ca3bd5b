#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace epgp {

enum class PdeId { Wave2d, Wave1d, Transport1d, Heat1d, Free };

[[nodiscard]] std::string_view to_string(PdeId id);
// Throws ConfigError for unknown ids.
[[nodiscard]] PdeId parse_pde_id(std::string_view name);

// Shape of a PDE's characteristic-variety parametrization.
struct VarietySpec {
  PdeId pde_id = PdeId::Wave2d;
  int ambient_dim = 3;
  int free_dim = 2;
  int branch_count = 2;
  int multiplier_degree = 0;

  [[nodiscard]] static VarietySpec for_pde(PdeId id);
  [[nodiscard]] bool needs_param() const { return pde_id != PdeId::Free; }
  // Basis rows generated per free frequency (cos and sin per branch).
  [[nodiscard]] int rows_per_frequency() const { return 2 * branch_count; }

  friend bool operator==(const VarietySpec&, const VarietySpec&) = default;
};

// Squared PDE parameter: a^2 for wave equations, the diffusivity for heat,
// the speed itself for transport.
class PdeParam {
 public:
  // Throws InvalidArgument unless a_sq is finite and positive.
  explicit PdeParam(double a_sq);
  [[nodiscard]] double a_sq() const noexcept { return a_sq_; }

 private:
  double a_sq_;
};

// One term c * d^orders of the PDE operator, used by finite-difference checks.
struct OperatorTerm {
  std::vector<int> orders;
  double coefficient = 0.0;
};

// Derivatives of one branch's frequency vector.
struct BranchJacobian {
  Eigen::MatrixXd d_free;   // ambient_dim x free_dim
  Eigen::VectorXd d_param;  // ambient_dim, derivative with respect to a_sq
};

// Generic parametrization interface. New constant-coefficient PDEs with
// constant Noetherian multipliers plug in by implementing this and adding a
// registry entry.
//
// A frequency vector xi encodes the basis pair
//   exp(<x, xi_decay>) * {cos, sin}(<x, xi_osc>)
// where decay coordinates are flagged by decay_mask(). Hyperbolic and
// transport PDEs have no decay coordinates, so their basis is purely
// trigonometric.
class Variety {
 public:
  virtual ~Variety() = default;

  [[nodiscard]] virtual VarietySpec spec() const = 0;
  [[nodiscard]] virtual std::vector<Eigen::VectorXd> lift(
      const Eigen::VectorXd& z_free, double a_sq) const = 0;
  [[nodiscard]] virtual std::vector<BranchJacobian> lift_jacobian(
      const Eigen::VectorXd& z_free, double a_sq) const = 0;
  [[nodiscard]] virtual double symbol(const Eigen::VectorXd& xi,
                                      double a_sq) const = 0;
  [[nodiscard]] virtual std::vector<OperatorTerm> operator_terms(
      double a_sq) const = 0;
  [[nodiscard]] virtual std::vector<bool> decay_mask() const {
    return std::vector<bool>(static_cast<std::size_t>(spec().ambient_dim),
                             false);
  }
};

[[nodiscard]] const Variety& variety_for(PdeId id);

// Maps free coordinates onto the variety, one vector per branch (+ sheet
// first). Throws InvalidArgument for non-finite or wrongly sized input and
// ConfigError when a required parameter is missing.
[[nodiscard]] std::vector<Eigen::VectorXd> parametrize(
    const VarietySpec& spec, const Eigen::VectorXd& z_free,
    std::optional<PdeParam> param);

[[nodiscard]] std::vector<BranchJacobian> parametrize_jacobian(
    const VarietySpec& spec, const Eigen::VectorXd& z_free,
    std::optional<PdeParam> param);

// m x free_dim matrix of i.i.d. standard normal entries, a pure function of
// (spec, m, seed).
[[nodiscard]] Eigen::MatrixXd sample_free_frequencies(const VarietySpec& spec,
                                                      int m,
                                                      std::uint64_t seed);

// Symbol-equation residual at xi; zero exactly on the variety.
[[nodiscard]] double symbol_residual(const VarietySpec& spec,
                                     const Eigen::VectorXd& xi,
                                     std::optional<PdeParam> param);

// The parameter value the variety code should use: a_sq when required,
// ignored (0) for PDEs without one.
[[nodiscard]] double resolve_param(const VarietySpec& spec,
                                   std::optional<PdeParam> param);

}  // namespace epgp
