#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epgp/solutions.hpp"
#include "epgp/training.hpp"

namespace epgp {

enum class TableId { T1, T2, T3 };

[[nodiscard]] std::string_view to_string(TableId id);
[[nodiscard]] TableId parse_table_id(std::string_view name);

// Published reference numbers for one experiment row.
struct ReferenceValues {
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> a_sq;
};

// One experiment of a table: the data, the training mode, and the reference.
struct ExperimentSpec {
  SolutionId solution = SolutionId::LowFreqCos;
  TrainMode mode = TrainMode::Direct;
  int n = 100;
  int m = 10;
  double noise_std = 0.0;
  std::optional<double> a_sq_init;
  ReferenceValues reference;
};

[[nodiscard]] std::vector<ExperimentSpec> table_experiments(
    TableId table, double noise_std = 1e-3);

struct BenchmarkOptions {
  double scale = 1.0;
  std::optional<int> iters;
  std::optional<double> lr;
  std::uint64_t seed = 0;
  double noise_std = 1e-3;  // T3 noise level
  int test_points = 2000;
  // Staged rows accept stage 1 against the known a^2 when true.
  bool benchmark_stage1 = true;
};

struct BenchmarkRow {
  std::string table;
  ExperimentSpec experiment;
  int n = 0;
  int m = 0;
  bool ok = false;
  std::string error;
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> a_sq;
  int restarts = 0;
  bool converged = true;
};

// Scaled size: max(floor_value, round(value * scale)).
[[nodiscard]] int scaled(int value, double scale, int floor_value);

// The training configuration and datasets a benchmark row uses.
[[nodiscard]] TrainConfig experiment_config(const ExperimentSpec& exp, int m,
                                            const BenchmarkOptions& opts);

// Trains and evaluates one experiment on a held-out uniform test sample
// drawn with a seed disjoint from the training seed.
[[nodiscard]] BenchmarkRow run_experiment(const std::string& table,
                                          const ExperimentSpec& exp,
                                          const BenchmarkOptions& opts,
                                          const ProgressSink& sink = {});

// Runs every row; failures are recorded per row. When out_dir is given the
// result table is rewritten atomically after each row as
// out_dir/<table>.csv.
[[nodiscard]] std::vector<BenchmarkRow> run_benchmark(
    TableId table, const BenchmarkOptions& opts,
    const std::optional<std::filesystem::path>& out_dir = std::nullopt,
    const ProgressSink& sink = {});

[[nodiscard]] std::string format_benchmark_csv(
    const std::vector<BenchmarkRow>& rows);

}  // namespace epgp
