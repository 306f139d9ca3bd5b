#pragma once

#include <Eigen/Dense>

namespace epgp {

// Root mean squared difference. Throws InvalidArgument on length mismatch or
// empty input.
[[nodiscard]] double rmse(const Eigen::VectorXd& pred,
                          const Eigen::VectorXd& truth);

// Mean absolute difference.
[[nodiscard]] double mae(const Eigen::VectorXd& pred,
                         const Eigen::VectorXd& truth);

}  // namespace epgp
