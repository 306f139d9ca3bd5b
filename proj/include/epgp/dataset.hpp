#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

namespace epgp {

// Axis-aligned box in (x, y, t).
struct Domain {
  Eigen::Vector3d lower{-6.0, -6.0, 0.0};
  Eigen::Vector3d upper{6.0, 6.0, 12.0};

  // [-6, 6] x [-6, 6] x [0, 12]
  [[nodiscard]] static Domain wave_box() { return {}; }
  [[nodiscard]] bool empty() const;
  [[nodiscard]] bool contains(const Eigen::Vector3d& p) const;
};

struct DatasetMeta {
  std::string solution_id;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  Domain domain;
};

struct Dataset {
  Eigen::MatrixXd points;  // n x 3, columns x, y, t
  Eigen::VectorXd values;  // Y
  DatasetMeta meta;

  [[nodiscard]] Eigen::Index size() const { return points.rows(); }
};

// Sidecar metadata path for a dataset file: "<path>.meta.json".
[[nodiscard]] std::filesystem::path metadata_path(
    const std::filesystem::path& data_path);

// Writes "x,y,t,Y" rows plus the JSON sidecar. Both files are written to a
// temporary name first and renamed into place.
void save_dataset(const Dataset& data, const std::filesystem::path& path);

// Reads a dataset file. The sidecar is optional; the Y column is optional
// when require_values is false (prediction inputs).
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& path,
                                   bool require_values = true);

// Writes `text` to path via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& text);

}  // namespace epgp

#include "epgp/solutions.hpp"

namespace epgp {

// n points uniform on the domain with Y = u(point) + N(0, noise_std^2).
// Points and noise come from separate streams derived from seed, so the
// points for a given seed do not depend on noise_std. Throws ConfigError for
// an empty domain and InvalidArgument for n < 1 or negative noise.
[[nodiscard]] Dataset generate_dataset(const TrueSolution& solution, int n,
                                       const Domain& domain, double noise_std,
                                       std::uint64_t seed);

// Shortest round-trip decimal representation of a double.
[[nodiscard]] std::string format_double(double v);

}  // namespace epgp
