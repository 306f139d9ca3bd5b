#pragma once

#include <filesystem>

#include <Eigen/Dense>

#include "epgp/checkpoint.hpp"
#include "epgp/dataset.hpp"
#include "epgp/solutions.hpp"

namespace epgp {

// prediction - truth on a resolution x resolution grid over the spatial box
// at a fixed time. Row-major: y is the outer index, x the inner one.
struct ErrorGrid {
  int resolution = 0;
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd err;
};

// Throws InvalidArgument for resolution < 2 and ConfigError when the
// checkpoint's PDE is not the one the solution satisfies.
[[nodiscard]] ErrorGrid compute_error_grid(const ModelCheckpoint& model,
                                           const TrueSolution& solution,
                                           double t, int resolution,
                                           const Domain& domain = {});

[[nodiscard]] std::string format_error_grid(const ErrorGrid& grid);

// Writes "x,y,err" rows.
void export_error_grid(const ModelCheckpoint& model,
                       const TrueSolution& solution, double t, int resolution,
                       const std::filesystem::path& out,
                       const Domain& domain = {});

}  // namespace epgp
