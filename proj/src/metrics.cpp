#include "epgp/metrics.hpp"

#include <cmath>

#include "epgp/errors.hpp"

namespace epgp {

namespace {

void check(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size()) {
    throw InvalidArgument("prediction and truth differ in length");
  }
  if (pred.size() < 1) throw InvalidArgument("metrics need at least one value");
}

}  // namespace

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  check(pred, truth);
  return std::sqrt((pred - truth).squaredNorm() /
                   static_cast<double>(pred.size()));
}

double mae(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  check(pred, truth);
  return (pred - truth).cwiseAbs().mean();
}

}  // namespace epgp
