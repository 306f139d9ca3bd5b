#include "epgp/error_grid.hpp"

#include <cmath>
#include <string>

#include "epgp/errors.hpp"

namespace epgp {

ErrorGrid compute_error_grid(const ModelCheckpoint& model,
                             const TrueSolution& solution, double t,
                             int resolution, const Domain& domain) {
  if (resolution < 2) {
    throw InvalidArgument("error grid resolution must be at least 2");
  }
  if (!std::isfinite(t)) throw InvalidArgument("time slice must be finite");
  if (model.pde != PdeId::Wave2d) {
    throw ConfigError("solution " + std::string(solution.name()) +
                      " solves wave2d but the checkpoint models " +
                      std::string(to_string(model.pde)));
  }
  const int n = resolution * resolution;
  Eigen::MatrixXd points(n, 3);
  for (int iy = 0; iy < resolution; ++iy) {
    const double fy = static_cast<double>(iy) / (resolution - 1);
    const double y = domain.lower(1) + fy * (domain.upper(1) - domain.lower(1));
    for (int ix = 0; ix < resolution; ++ix) {
      const double fx = static_cast<double>(ix) / (resolution - 1);
      const double x =
          domain.lower(0) + fx * (domain.upper(0) - domain.lower(0));
      points.row(iy * resolution + ix) << x, y, t;
    }
  }
  ErrorGrid grid;
  grid.resolution = resolution;
  grid.t = t;
  grid.x = points.col(0);
  grid.y = points.col(1);
  grid.err = model.predict(points) - solution.evaluate(points);
  return grid;
}

std::string format_error_grid(const ErrorGrid& grid) {
  std::string text = "x,y,err\n";
  for (Eigen::Index i = 0; i < grid.err.size(); ++i) {
    text += format_double(grid.x(i)) + ',' + format_double(grid.y(i)) + ',' +
            format_double(grid.err(i)) + '\n';
  }
  return text;
}

void export_error_grid(const ModelCheckpoint& model,
                       const TrueSolution& solution, double t, int resolution,
                       const std::filesystem::path& out,
                       const Domain& domain) {
  write_file_atomic(out, format_error_grid(compute_error_grid(
                             model, solution, t, resolution, domain)));
}

}  // namespace epgp
