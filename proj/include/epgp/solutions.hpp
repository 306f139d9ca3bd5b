#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace epgp {

enum class SolutionId { LowFreqCos, PolySq, HighFreqCos };

[[nodiscard]] std::string_view to_string(SolutionId id);
// Throws ConfigError for unknown ids.
[[nodiscard]] SolutionId parse_solution_id(std::string_view name);

// Closed-form solutions of u_tt = a^2 (u_xx + u_yy):
//   lowfreq_cos   cos(x - sqrt3 t) + cos(y - sqrt3 t)          a^2 = 3
//   poly_sq       (x + y - sqrt3 t)^2                          a^2 = 1.5
//   highfreq_cos  cos(3(x - sqrt3 t)) + cos(6(y - sqrt3 t))    a^2 = 3
class TrueSolution {
 public:
  explicit TrueSolution(SolutionId id) : id_(id) {}

  [[nodiscard]] SolutionId id() const noexcept { return id_; }
  [[nodiscard]] std::string_view name() const { return to_string(id_); }
  [[nodiscard]] double a_sq() const noexcept;

  [[nodiscard]] double operator()(double x, double y, double t) const;
  // Evaluates every row (x, y, t) of points.
  [[nodiscard]] Eigen::VectorXd evaluate(const Eigen::MatrixXd& points) const;

 private:
  SolutionId id_;
};

}  // namespace epgp
