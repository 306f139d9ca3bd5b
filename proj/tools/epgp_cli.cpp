// Command-line front end: generate data, train, predict, reproduce tables,
// and export error grids.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 non-converged (staged restarts exhausted).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "epgp/benchmark.hpp"
#include "epgp/checkpoint.hpp"
#include "epgp/dataset.hpp"
#include "epgp/error_grid.hpp"
#include "epgp/errors.hpp"
#include "epgp/parallel.hpp"
#include "epgp/solutions.hpp"
#include "epgp/training.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNonConverged = 4;

// Per-iteration progress as "iteration,stage,restart,loss,a_sq" lines.
class ProgressLog {
 public:
  explicit ProgressLog(const std::string& target) {
    if (target.empty()) return;
    if (target == "-") {
      out_ = &std::cerr;
    } else {
      file_ = std::make_unique<std::ofstream>(target, std::ios::trunc);
      if (!*file_) throw epgp::ConfigError("cannot open log " + target);
      out_ = file_.get();
    }
    *out_ << "iteration,stage,restart,loss,a_sq\n";
  }

  [[nodiscard]] epgp::ProgressSink sink() {
    if (out_ == nullptr) return {};
    return [this](const epgp::ProgressRecord& r) {
      *out_ << r.iteration << ',' << r.stage << ',' << r.restart << ','
            << epgp::format_double(r.loss) << ','
            << (r.a_sq ? epgp::format_double(*r.a_sq) : "") << '\n';
    };
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
};

struct GenerateArgs {
  std::string solution = "lowfreq_cos";
  int n = 1000;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainArgs {
  std::string mode = "direct";
  std::string pde = "wave2d";
  std::string data;
  int m = 100;
  int iters = 3000;
  double lr = 1e-2;
  std::optional<double> a2_init;
  std::optional<double> a2_true;
  std::uint64_t seed = 0;
  std::string checkpoint;
  std::string log;
  int stage1_iters = 500;
  int max_restarts = 5;
  double convergence_tol = 0.0;
};

struct PredictArgs {
  std::string checkpoint;
  std::string points;
  std::string out;
};

struct BenchmarkArgs {
  std::string table = "T1";
  double scale = 1.0;
  std::string out;
  std::optional<int> iters;
  std::optional<double> lr;
  std::uint64_t seed = 0;
  double noise = 1e-3;
  std::string log;
};

struct ErrorGridArgs {
  std::string checkpoint;
  std::string solution;
  double t = 0.5;
  int res = 101;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  const epgp::TrueSolution solution(epgp::parse_solution_id(a.solution));
  const epgp::Dataset data = epgp::generate_dataset(
      solution, a.n, epgp::Domain::wave_box(), a.noise, a.seed);
  epgp::save_dataset(data, a.out);
  return kExitOk;
}

int run_train(const TrainArgs& a) {
  const epgp::VarietySpec spec =
      epgp::VarietySpec::for_pde(epgp::parse_pde_id(a.pde));
  const epgp::Dataset data = epgp::load_dataset(a.data);

  epgp::TrainConfig cfg;
  cfg.mode = epgp::parse_train_mode(a.mode);
  cfg.m = a.m;
  cfg.iters = a.iters;
  cfg.lr = a.lr;
  cfg.seed = a.seed;
  cfg.a_sq_init = a.a2_init;
  cfg.a_sq_true = a.a2_true;
  cfg.stage1_iters = a.stage1_iters;
  cfg.max_restarts = a.max_restarts;
  cfg.convergence_tol = a.convergence_tol;

  ProgressLog log(a.log);
  const epgp::TrainReport report = epgp::train(data, spec, cfg, log.sink());
  epgp::save_checkpoint(epgp::make_checkpoint(report, spec, cfg), a.checkpoint);

  std::cerr << "best NLML " << epgp::format_double(report.best_loss);
  if (report.state.a_sq) {
    std::cerr << ", a^2 = " << epgp::format_double(*report.state.a_sq);
  }
  std::cerr << ", restarts " << report.restarts << '\n';
  if (!report.converged) {
    std::cerr << "stage-1 criterion never met; restarts exhausted\n";
    return kExitNonConverged;
  }
  return kExitOk;
}

int run_predict(const PredictArgs& a) {
  const epgp::ModelCheckpoint model = epgp::load_checkpoint(a.checkpoint);
  const epgp::Dataset pts = epgp::load_dataset(a.points, false);
  const Eigen::VectorXd pred = model.predict(pts.points);
  std::string text = "x,y,t,pred\n";
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      text += epgp::format_double(pts.points(i, k)) + ',';
    }
    text += epgp::format_double(pred(i)) + '\n';
  }
  epgp::write_file_atomic(a.out, text);
  return kExitOk;
}

int run_benchmark(const BenchmarkArgs& a) {
  epgp::BenchmarkOptions opts;
  opts.scale = a.scale;
  opts.iters = a.iters;
  opts.lr = a.lr;
  opts.seed = a.seed;
  opts.noise_std = a.noise;
  ProgressLog log(a.log);
  const auto table = epgp::parse_table_id(a.table);
  const auto rows = epgp::run_benchmark(table, opts, a.out, log.sink());
  std::cout << epgp::format_benchmark_csv(rows);
  return kExitOk;
}

int run_error_grid(const ErrorGridArgs& a) {
  const epgp::ModelCheckpoint model = epgp::load_checkpoint(a.checkpoint);
  const epgp::TrueSolution solution(epgp::parse_solution_id(a.solution));
  epgp::export_error_grid(model, solution, a.t, a.res, a.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variety-constrained spectral GP regression for linear PDEs"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a synthetic dataset");
  generate->add_option("--solution", gen.solution,
                       "lowfreq_cos | poly_sq | highfreq_cos");
  generate->add_option("--n", gen.n, "Number of points");
  generate->add_option("--noise", gen.noise, "Gaussian noise std");
  generate->add_option("--seed", gen.seed, "RNG seed");
  generate->add_option("--out", gen.out, "Output CSV path")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Fit a model to a dataset");
  train->add_option("--mode", tr.mode, "direct | inverse | inverse-staged");
  train->add_option("--pde", tr.pde, "wave2d | wave1d | transport1d | heat1d | free");
  train->add_option("--data", tr.data, "Dataset CSV")->required();
  train->add_option("--m", tr.m, "Number of free frequencies");
  train->add_option("--iters", tr.iters, "Optimizer iterations");
  train->add_option("--lr", tr.lr, "Adam learning rate");
  train->add_option("--a2-init", tr.a2_init,
                    "Initial a^2 (the fixed, known a^2 in direct mode)");
  train->add_option("--a2-true", tr.a2_true,
                    "Known a^2 for the benchmark stage-1 criterion");
  train->add_option("--seed", tr.seed, "RNG seed");
  train->add_option("--checkpoint", tr.checkpoint, "Output checkpoint")
      ->required();
  train->add_option("--log", tr.log, "Progress log path, '-' for stderr");
  train->add_option("--stage1-iters", tr.stage1_iters, "Staged: a^2-only iterations");
  train->add_option("--max-restarts", tr.max_restarts, "Staged: restart budget");
  train->add_option("--convergence-tol", tr.convergence_tol,
                    "Relative NLML improvement threshold (0 disables)");

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Evaluate a checkpoint at points");
  predict->add_option("--checkpoint", pr.checkpoint, "Checkpoint")->required();
  predict->add_option("--points", pr.points, "CSV with x,y,t columns")->required();
  predict->add_option("--out", pr.out, "Output CSV")->required();

  BenchmarkArgs bm;
  auto* benchmark = app.add_subcommand("benchmark", "Reproduce a result table");
  benchmark->add_option("--table", bm.table, "T1 | T2 | T3");
  benchmark->add_option("--scale", bm.scale, "Multiplier on n and m");
  benchmark->add_option("--out", bm.out, "Output directory")->required();
  benchmark->add_option("--iters", bm.iters, "Optimizer iterations per row");
  benchmark->add_option("--lr", bm.lr, "Adam learning rate per row");
  benchmark->add_option("--seed", bm.seed, "RNG seed");
  benchmark->add_option("--noise", bm.noise, "Noise std for T3");
  benchmark->add_option("--log", bm.log, "Progress log path, '-' for stderr");

  ErrorGridArgs eg;
  auto* grid = app.add_subcommand("error-grid", "Export prediction - truth at fixed t");
  grid->add_option("--checkpoint", eg.checkpoint, "Checkpoint")->required();
  grid->add_option("--solution", eg.solution, "True solution id")->required();
  grid->add_option("--t", eg.t, "Time slice");
  grid->add_option("--res", eg.res, "Grid points per axis");
  grid->add_option("--out", eg.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  epgp::configure_threads_from_env();
  try {
    if (*generate) return run_generate(gen);
    if (*train) return run_train(tr);
    if (*predict) return run_predict(pr);
    if (*benchmark) return run_benchmark(bm);
    if (*grid) return run_error_grid(eg);
  } catch (const epgp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const epgp::Error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
