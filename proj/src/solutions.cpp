#include "epgp/solutions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "epgp/errors.hpp"

namespace epgp {

std::string_view to_string(SolutionId id) {
  switch (id) {
    case SolutionId::LowFreqCos: return "lowfreq_cos";
    case SolutionId::PolySq: return "poly_sq";
    case SolutionId::HighFreqCos: return "highfreq_cos";
  }
  return "unknown";
}

SolutionId parse_solution_id(std::string_view name) {
  for (const SolutionId id :
       {SolutionId::LowFreqCos, SolutionId::PolySq, SolutionId::HighFreqCos}) {
    if (to_string(id) == name) return id;
  }
  throw ConfigError("unknown solution id '" + std::string(name) + "'");
}

double TrueSolution::a_sq() const noexcept {
  return id_ == SolutionId::PolySq ? 1.5 : 3.0;
}

double TrueSolution::operator()(double x, double y, double t) const {
  constexpr double s3 = std::numbers::sqrt3;
  switch (id_) {
    case SolutionId::LowFreqCos:
      return std::cos(x - s3 * t) + std::cos(y - s3 * t);
    case SolutionId::PolySq: {
      const double u = x + y - s3 * t;
      return u * u;
    }
    case SolutionId::HighFreqCos:
      return std::cos(3.0 * (x - s3 * t)) + std::cos(6.0 * (y - s3 * t));
  }
  return 0.0;
}

Eigen::VectorXd TrueSolution::evaluate(const Eigen::MatrixXd& points) const {
  if (points.cols() != 3) {
    throw InvalidArgument("solutions are evaluated at (x, y, t) points");
  }
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out(i) = (*this)(points(i, 0), points(i, 1), points(i, 2));
  }
  return out;
}

}  // namespace epgp
