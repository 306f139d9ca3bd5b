#include "epgp/benchmark.hpp"

#include <cmath>
#include <string>

#include "epgp/dataset.hpp"
#include "epgp/errors.hpp"
#include "epgp/metrics.hpp"

namespace epgp {

namespace {

constexpr std::uint64_t kTestSeedOffset = 1000003;

std::string opt_number(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

std::string ratio(double achieved, double reference) {
  return reference != 0.0 ? format_double(achieved / reference) : std::string{};
}

}  // namespace

std::string_view to_string(TableId id) {
  switch (id) {
    case TableId::T1: return "T1";
    case TableId::T2: return "T2";
    case TableId::T3: return "T3";
  }
  return "unknown";
}

TableId parse_table_id(std::string_view name) {
  if (name == "T1") return TableId::T1;
  if (name == "T2") return TableId::T2;
  if (name == "T3") return TableId::T3;
  throw ConfigError("unknown table '" + std::string(name) + "'");
}

std::vector<ExperimentSpec> table_experiments(TableId table, double noise_std) {
  using S = SolutionId;
  using M = TrainMode;
  switch (table) {
    case TableId::T1:
      return {
          {S::LowFreqCos, M::Direct, 100, 10, 0.0, std::nullopt,
           {7.91e-7, 9.20e-7, std::nullopt}},
          {S::LowFreqCos, M::InverseJoint, 1000, 100, 0.0, 1.0,
           {5.63e-5, 7.65e-5, 3.0002}},
      };
    case TableId::T2:
      return {
          {S::LowFreqCos, M::Direct, 10000, 1000, 0.0, std::nullopt,
           {3.067e-8, 1.065e-8, std::nullopt}},
          {S::LowFreqCos, M::InverseJoint, 10000, 1000, 0.0, 1.0,
           {5.632e-5, 7.647e-5, 3.0002}},
          {S::PolySq, M::Direct, 1000, 100, 0.0, std::nullopt,
           {3.459e-4, 9.410e-5, std::nullopt}},
          {S::PolySq, M::InverseJoint, 1000, 100, 0.0, 1.0,
           {3.006e-4, 1e-4, 1.5018}},
          {S::HighFreqCos, M::Direct, 10000, 1000, 0.0, std::nullopt,
           {2.483e-7, 2.099e-7, std::nullopt}},
          {S::HighFreqCos, M::InverseStaged, 10000, 1000, 0.0, 2.0,
           {3.508e-5, 1.744e-5, 2.9999}},
      };
    case TableId::T3:
      return {
          {S::LowFreqCos, M::Direct, 10000, 1000, noise_std, std::nullopt,
           {9.868e-4, 8e-4, std::nullopt}},
          {S::LowFreqCos, M::InverseJoint, 10000, 1000, noise_std, 1.0,
           {9.812e-4, 8e-4, 2.99989}},
          {S::HighFreqCos, M::Direct, 10000, 1000, noise_std, std::nullopt,
           {8.254e-4, 9e-4, std::nullopt}},
          {S::HighFreqCos, M::InverseStaged, 10000, 1000, noise_std, 2.0,
           {1.095e-3, 8e-4, 2.99999}},
      };
  }
  throw ConfigError("unknown table");
}

int scaled(int value, double scale, int floor_value) {
  return std::max(floor_value,
                  static_cast<int>(std::lround(static_cast<double>(value) * scale)));
}

TrainConfig experiment_config(const ExperimentSpec& exp, int m,
                              const BenchmarkOptions& opts) {
  const TrueSolution solution(exp.solution);
  TrainConfig cfg;
  cfg.mode = exp.mode;
  cfg.m = m;
  cfg.seed = opts.seed;
  if (opts.iters) cfg.iters = *opts.iters;
  if (opts.lr) cfg.lr = *opts.lr;
  if (exp.mode == TrainMode::Direct) {
    cfg.a_sq_init = solution.a_sq();
  } else {
    cfg.a_sq_init = exp.a_sq_init.value_or(1.0);
  }
  if (exp.mode == TrainMode::InverseStaged && opts.benchmark_stage1) {
    cfg.a_sq_true = solution.a_sq();
  }
  return cfg;
}

BenchmarkRow run_experiment(const std::string& table, const ExperimentSpec& exp,
                            const BenchmarkOptions& opts,
                            const ProgressSink& sink) {
  BenchmarkRow row;
  row.table = table;
  row.experiment = exp;
  row.n = scaled(exp.n, opts.scale, 10);
  row.m = scaled(exp.m, opts.scale, 2);
  try {
    const TrueSolution solution(exp.solution);
    const VarietySpec spec = VarietySpec::for_pde(PdeId::Wave2d);
    const Domain domain = Domain::wave_box();
    const Dataset train_data =
        generate_dataset(solution, row.n, domain, exp.noise_std, opts.seed);
    const Dataset test_data = generate_dataset(
        solution, opts.test_points, domain, 0.0, opts.seed + kTestSeedOffset);

    const TrainConfig cfg = experiment_config(exp, row.m, opts);
    const TrainReport report = train(train_data, spec, cfg, sink);
    const Eigen::VectorXd pred =
        predict(report.posterior, spec, test_data.points);
    row.rmse = rmse(pred, test_data.values);
    row.mae = mae(pred, test_data.values);
    if (exp.mode != TrainMode::Direct) row.a_sq = report.state.a_sq;
    row.restarts = report.restarts;
    row.converged = report.converged;
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

std::vector<BenchmarkRow> run_benchmark(
    TableId table, const BenchmarkOptions& opts,
    const std::optional<std::filesystem::path>& out_dir,
    const ProgressSink& sink) {
  if (!(opts.scale > 0.0)) throw ConfigError("scale must be positive");
  std::vector<BenchmarkRow> rows;
  const std::string name(to_string(table));
  for (const ExperimentSpec& exp : table_experiments(table, opts.noise_std)) {
    rows.push_back(run_experiment(name, exp, opts, sink));
    if (out_dir) {
      write_file_atomic(*out_dir / (name + ".csv"), format_benchmark_csv(rows));
    }
  }
  return rows;
}

std::string format_benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::string text =
      "table,solution,mode,n,m,noise_std,status,rmse,mae,a_sq,ref_rmse,"
      "ref_mae,ref_a_sq,rmse_ratio,mae_ratio,a_sq_ratio,restarts,error\n";
  for (const BenchmarkRow& r : rows) {
    const ExperimentSpec& e = r.experiment;
    const ReferenceValues& ref = e.reference;
    std::string status = r.ok ? (r.converged ? "ok" : "non-converged") : "failed";
    std::string err = r.error;
    for (char& c : err) {
      if (c == ',' || c == '\n') c = ';';
    }
    text += r.table + ',' + std::string(to_string(e.solution)) + ',' +
            std::string(to_string(e.mode)) + ',' + std::to_string(r.n) + ',' +
            std::to_string(r.m) + ',' + format_double(e.noise_std) + ',' +
            status + ',';
    if (r.ok) {
      text += format_double(r.rmse) + ',' + format_double(r.mae) + ',' +
              opt_number(r.a_sq) + ',';
    } else {
      text += ",,,";
    }
    text += format_double(ref.rmse) + ',' + format_double(ref.mae) + ',' +
            opt_number(ref.a_sq) + ',';
    if (r.ok) {
      text += ratio(r.rmse, ref.rmse) + ',' + ratio(r.mae, ref.mae) + ',' +
              (r.a_sq && ref.a_sq ? ratio(*r.a_sq, *ref.a_sq) : "") + ',';
    } else {
      text += ",,,";
    }
    text += std::to_string(r.restarts) + ',' + err + '\n';
  }
  return text;
}

}  // namespace epgp
