#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "epgp/variety.hpp"

namespace epgp {

enum class TrigKind : std::uint8_t { Cos = 0, Sin = 1 };

struct RowEntry {
  int frequency = 0;
  int branch = 0;
  TrigKind kind = TrigKind::Cos;

  friend bool operator==(const RowEntry&, const RowEntry&) = default;
};

// Row of basis function (frequency j, branch b, kind) given b branches per
// frequency. Frequency-major, then branch, cos before sin.
[[nodiscard]] constexpr int basis_row(int frequency, int branch, TrigKind kind,
                                      int branch_count) {
  return (frequency * branch_count + branch) * 2 + static_cast<int>(kind);
}

// The p x n feature matrix phi with phi(r, i) = basis function r at point i.
class BasisMatrix {
 public:
  BasisMatrix(Eigen::MatrixXd phi, std::vector<RowEntry> row_map,
              Eigen::MatrixXd frequencies);

  [[nodiscard]] const Eigen::MatrixXd& phi() const noexcept { return phi_; }
  [[nodiscard]] const std::vector<RowEntry>& row_map() const noexcept {
    return row_map_;
  }
  // Lifted frequency vectors, one row per (frequency, branch) pair in row
  // order; (m * branch_count) x ambient_dim.
  [[nodiscard]] const Eigen::MatrixXd& frequencies() const noexcept {
    return frequencies_;
  }
  [[nodiscard]] Eigen::Index rows() const noexcept { return phi_.rows(); }
  [[nodiscard]] Eigen::Index cols() const noexcept { return phi_.cols(); }

 private:
  Eigen::MatrixXd phi_;
  std::vector<RowEntry> row_map_;
  Eigen::MatrixXd frequencies_;
};

// Evaluates every basis function of the frequencies z_free (m x free_dim) at
// points (n x ambient_dim). Throws InvalidArgument on shape mismatch.
[[nodiscard]] BasisMatrix build_phi(const VarietySpec& spec,
                                    const Eigen::MatrixXd& points,
                                    const Eigen::MatrixXd& z_free,
                                    std::optional<PdeParam> param);

// Applies the PDE operator by central differences of step h to the 2b basis
// functions of one free frequency at `point`; returns the largest absolute
// residual. Zero for the operator-free PDE.
[[nodiscard]] double pde_residual_of_basis(const VarietySpec& spec,
                                           const Eigen::VectorXd& z_free,
                                           std::optional<PdeParam> param,
                                           const Eigen::VectorXd& point,
                                           double h);

}  // namespace epgp
