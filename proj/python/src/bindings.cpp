#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "epgp/basis.hpp"
#include "epgp/benchmark.hpp"
#include "epgp/checkpoint.hpp"
#include "epgp/dataset.hpp"
#include "epgp/error_grid.hpp"
#include "epgp/errors.hpp"
#include "epgp/likelihood.hpp"
#include "epgp/metrics.hpp"
#include "epgp/parallel.hpp"
#include "epgp/solutions.hpp"
#include "epgp/training.hpp"
#include "epgp/variety.hpp"

namespace py = pybind11;
using namespace epgp;

namespace {

VarietySpec spec_of(const std::string& pde) {
  return VarietySpec::for_pde(parse_pde_id(pde));
}

std::optional<PdeParam> param_of(std::optional<double> a_sq) {
  if (!a_sq) return std::nullopt;
  return PdeParam(*a_sq);
}

py::dict gradient_dict(const NlmlGradient& g) {
  py::dict d;
  d["a_sq"] = g.a_sq;
  d["z_free"] = g.z_free;
  d["log_sigma_j_sq"] = g.log_sigma_j_sq;
  d["log_sigma0_sq"] = g.log_sigma0_sq;
  return d;
}

py::dict row_dict(const BenchmarkRow& r) {
  py::dict d;
  d["table"] = r.table;
  d["solution"] = std::string(to_string(r.experiment.solution));
  d["mode"] = std::string(to_string(r.experiment.mode));
  d["n"] = r.n;
  d["m"] = r.m;
  d["noise_std"] = r.experiment.noise_std;
  d["ok"] = r.ok;
  d["error"] = r.error;
  d["rmse"] = r.rmse;
  d["mae"] = r.mae;
  d["a_sq"] = r.a_sq;
  d["restarts"] = r.restarts;
  d["converged"] = r.converged;
  d["ref_rmse"] = r.experiment.reference.rmse;
  d["ref_mae"] = r.experiment.reference.mae;
  d["ref_a_sq"] = r.experiment.reference.a_sq;
  return d;
}

}  // namespace

PYBIND11_MODULE(_epgp, m) {
  m.doc() = "Variety-constrained spectral Gaussian process regression";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<LoadError>(m, "LoadError", base.ptr());

  configure_threads_from_env();

  // variety
  py::class_<VarietySpec>(m, "VarietySpec")
      .def_static("for_pde", &spec_of, py::arg("pde"))
      .def_property_readonly("pde", [](const VarietySpec& s) {
        return std::string(to_string(s.pde_id));
      })
      .def_readonly("ambient_dim", &VarietySpec::ambient_dim)
      .def_readonly("free_dim", &VarietySpec::free_dim)
      .def_readonly("branch_count", &VarietySpec::branch_count)
      .def_readonly("multiplier_degree", &VarietySpec::multiplier_degree)
      .def("rows_per_frequency", &VarietySpec::rows_per_frequency)
      .def("__repr__", [](const VarietySpec& s) {
        return "VarietySpec('" + std::string(to_string(s.pde_id)) + "')";
      });

  m.def("parametrize",
        [](const std::string& pde, const Eigen::VectorXd& z,
           std::optional<double> a_sq) {
          return parametrize(spec_of(pde), z, param_of(a_sq));
        },
        py::arg("pde"), py::arg("z_free"), py::arg("a_sq") = py::none(),
        "Lift free coordinates onto the characteristic variety, one vector "
        "per branch.");
  m.def("sample_free_frequencies",
        [](const std::string& pde, int count, std::uint64_t seed) {
          return sample_free_frequencies(spec_of(pde), count, seed);
        },
        py::arg("pde"), py::arg("m"), py::arg("seed"));
  m.def("symbol_residual",
        [](const std::string& pde, const Eigen::VectorXd& xi,
           std::optional<double> a_sq) {
          return symbol_residual(spec_of(pde), xi, param_of(a_sq));
        },
        py::arg("pde"), py::arg("xi"), py::arg("a_sq") = py::none());

  // basis
  m.def("build_phi",
        [](const std::string& pde, const Eigen::MatrixXd& points,
           const Eigen::MatrixXd& z_free, std::optional<double> a_sq) {
          return build_phi(spec_of(pde), points, z_free, param_of(a_sq)).phi();
        },
        py::arg("pde"), py::arg("points"), py::arg("z_free"),
        py::arg("a_sq") = py::none(), "p x n basis matrix.");
  m.def("pde_residual_of_basis",
        [](const std::string& pde, const Eigen::VectorXd& z,
           std::optional<double> a_sq, const Eigen::VectorXd& point, double h) {
          return pde_residual_of_basis(spec_of(pde), z, param_of(a_sq), point, h);
        },
        py::arg("pde"), py::arg("z_free"), py::arg("a_sq"), py::arg("point"),
        py::arg("h") = 1e-3);

  // likelihood
  py::class_<ModelState>(m, "ModelState")
      .def(py::init<>())
      .def(py::init([](std::optional<double> a_sq, Eigen::MatrixXd z,
                       Eigen::VectorXd log_sigma_j_sq, double log_sigma0_sq) {
             ModelState s;
             s.a_sq = a_sq;
             s.z_free = std::move(z);
             s.log_sigma_j_sq = std::move(log_sigma_j_sq);
             s.log_sigma0_sq = log_sigma0_sq;
             return s;
           }),
           py::arg("a_sq"), py::arg("z_free"), py::arg("log_sigma_j_sq"),
           py::arg("log_sigma0_sq"))
      .def_readwrite("a_sq", &ModelState::a_sq)
      .def_readwrite("z_free", &ModelState::z_free)
      .def_readwrite("log_sigma_j_sq", &ModelState::log_sigma_j_sq)
      .def_readwrite("log_sigma0_sq", &ModelState::log_sigma0_sq);

  py::class_<Posterior>(m, "Posterior")
      .def_readonly("chol_A", &Posterior::chol_A)
      .def_readonly("weights", &Posterior::weights)
      .def_readonly("state", &Posterior::state_snapshot);

  m.def("assemble_A", &assemble_A, py::arg("phi"), py::arg("state"));
  m.def("nlml", &nlml, py::arg("phi"), py::arg("Y"), py::arg("state"));
  m.def("nlml_oracle_dense", &nlml_oracle_dense, py::arg("phi"), py::arg("Y"),
        py::arg("state"));
  m.def("nlml_with_gradient",
        [](const std::string& pde, const Eigen::MatrixXd& points,
           const Eigen::VectorXd& Y, const ModelState& state, bool with_a_sq) {
          Objective o = nlml_with_gradient(spec_of(pde), points, Y, state, with_a_sq);
          return py::make_tuple(o.value, gradient_dict(o.gradient));
        },
        py::arg("pde"), py::arg("points"), py::arg("Y"), py::arg("state"),
        py::arg("with_a_sq") = true);
  m.def("posterior", &posterior, py::arg("phi"), py::arg("Y"), py::arg("state"));
  m.def("predict",
        [](const Posterior& post, const Eigen::MatrixXd& phi_star) {
          return predict(post, phi_star);
        },
        py::arg("posterior"), py::arg("phi_star"));
  m.def("predict_points",
        [](const Posterior& post, const std::string& pde,
           const Eigen::MatrixXd& points) {
          return predict(post, spec_of(pde), points);
        },
        py::arg("posterior"), py::arg("pde"), py::arg("points"));

  // data
  py::class_<Dataset>(m, "Dataset")
      .def_readwrite("points", &Dataset::points)
      .def_readwrite("values", &Dataset::values)
      .def_property_readonly("solution_id",
                             [](const Dataset& d) { return d.meta.solution_id; })
      .def_property_readonly("noise_std",
                             [](const Dataset& d) { return d.meta.noise_std; })
      .def_property_readonly("seed", [](const Dataset& d) { return d.meta.seed; })
      .def("__len__", [](const Dataset& d) { return d.size(); });

  m.def("true_solution",
        [](const std::string& id, const Eigen::MatrixXd& points) {
          return TrueSolution(parse_solution_id(id)).evaluate(points);
        },
        py::arg("solution"), py::arg("points"));
  m.def("true_a_sq",
        [](const std::string& id) { return TrueSolution(parse_solution_id(id)).a_sq(); },
        py::arg("solution"));
  m.def("generate_dataset",
        [](const std::string& id, int n, double noise_std, std::uint64_t seed) {
          return generate_dataset(TrueSolution(parse_solution_id(id)), n,
                                  Domain::wave_box(), noise_std, seed);
        },
        py::arg("solution"), py::arg("n"), py::arg("noise_std") = 0.0,
        py::arg("seed") = 0);
  m.def("save_dataset", &save_dataset, py::arg("data"), py::arg("path"));
  m.def("load_dataset", &load_dataset, py::arg("path"),
        py::arg("require_values") = true);
  m.def("rmse", &rmse, py::arg("pred"), py::arg("truth"));
  m.def("mae", &mae, py::arg("pred"), py::arg("truth"));

  // training
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_property("mode",
                    [](const TrainConfig& c) { return std::string(to_string(c.mode)); },
                    [](TrainConfig& c, const std::string& s) { c.mode = parse_train_mode(s); })
      .def_readwrite("m", &TrainConfig::m)
      .def_readwrite("iters", &TrainConfig::iters)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("a_sq_init", &TrainConfig::a_sq_init)
      .def_readwrite("a_sq_true", &TrainConfig::a_sq_true)
      .def_readwrite("stage1_iters", &TrainConfig::stage1_iters)
      .def_readwrite("stage1_tol", &TrainConfig::stage1_tol)
      .def_readwrite("max_restarts", &TrainConfig::max_restarts)
      .def_readwrite("stage1_step_tol", &TrainConfig::stage1_step_tol)
      .def_readwrite("stage1_patience", &TrainConfig::stage1_patience)
      .def_readwrite("stage1_min_gain", &TrainConfig::stage1_min_gain)
      .def_readwrite("min_log_noise", &TrainConfig::min_log_noise)
      .def_readwrite("convergence_tol", &TrainConfig::convergence_tol)
      .def_readwrite("convergence_window", &TrainConfig::convergence_window)
      .def_readwrite("init_prior_var", &TrainConfig::init_prior_var)
      .def_readwrite("init_noise_var", &TrainConfig::init_noise_var)
      .def_readwrite("freeze_a_sq", &TrainConfig::freeze_a_sq)
      .def("validate", &TrainConfig::validate);

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("state", &TrainReport::state)
      .def_readonly("posterior", &TrainReport::posterior)
      .def_readonly("loss_trace", &TrainReport::loss_trace)
      .def_readonly("a_sq_trace", &TrainReport::a_sq_trace)
      .def_readonly("restarts", &TrainReport::restarts)
      .def_readonly("converged", &TrainReport::converged)
      .def_readonly("best_loss", &TrainReport::best_loss)
      .def_readonly("wall_seconds", &TrainReport::wall_seconds);

  m.def("train",
        [](const Dataset& data, const std::string& pde, const TrainConfig& cfg,
           std::optional<std::function<void(py::dict)>> progress) {
          const VarietySpec spec = spec_of(pde);
          if (!progress) {
            py::gil_scoped_release release;
            return train(data, spec, cfg);
          }
          auto cb = *progress;
          return train(data, spec, cfg, [&cb](const ProgressRecord& r) {
            py::dict d;
            d["iteration"] = r.iteration;
            d["stage"] = r.stage;
            d["restart"] = r.restart;
            d["loss"] = r.loss;
            d["a_sq"] = r.a_sq;
            cb(d);
          });
        },
        py::arg("data"), py::arg("pde"), py::arg("config"),
        py::arg("progress") = py::none());

  // checkpoints and experiments
  py::class_<ModelCheckpoint>(m, "ModelCheckpoint")
      .def_readonly("format_version", &ModelCheckpoint::format_version)
      .def_property_readonly("pde", [](const ModelCheckpoint& c) {
        return std::string(to_string(c.pde));
      })
      .def_readonly("mode", &ModelCheckpoint::mode)
      .def_readonly("config_hash", &ModelCheckpoint::config_hash)
      .def_readonly("state", &ModelCheckpoint::state)
      .def_readwrite("weights", &ModelCheckpoint::weights)
      .def("predict", &ModelCheckpoint::predict, py::arg("points"));

  m.def("make_checkpoint",
        [](const TrainReport& r, const std::string& pde, const TrainConfig& cfg) {
          return make_checkpoint(r, spec_of(pde), cfg);
        },
        py::arg("report"), py::arg("pde"), py::arg("config"));
  m.def("save_checkpoint", &save_checkpoint, py::arg("checkpoint"), py::arg("path"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
  m.def("serialize_checkpoint", &serialize_checkpoint, py::arg("checkpoint"));
  m.def("parse_checkpoint", &parse_checkpoint, py::arg("text"));

  m.def("error_grid",
        [](const ModelCheckpoint& model, const std::string& id, double t, int res) {
          ErrorGrid g = compute_error_grid(model, TrueSolution(parse_solution_id(id)), t, res);
          return py::make_tuple(g.x, g.y, g.err);
        },
        py::arg("checkpoint"), py::arg("solution"), py::arg("t") = 0.5,
        py::arg("resolution") = 101, "Returns (x, y, err), x varying fastest.");

  m.def("run_benchmark",
        [](const std::string& table, double scale, std::optional<int> iters,
           std::optional<double> lr, std::uint64_t seed, double noise_std,
           int test_points) {
          BenchmarkOptions opts;
          opts.scale = scale;
          opts.iters = iters;
          opts.lr = lr;
          opts.seed = seed;
          opts.noise_std = noise_std;
          opts.test_points = test_points;
          std::vector<BenchmarkRow> rows;
          {
            py::gil_scoped_release release;
            rows = run_benchmark(parse_table_id(table), opts);
          }
          py::list out;
          for (const auto& r : rows) out.append(row_dict(r));
          return out;
        },
        py::arg("table"), py::arg("scale") = 1.0, py::arg("iters") = py::none(),
        py::arg("lr") = py::none(), py::arg("seed") = 0,
        py::arg("noise_std") = 1e-3, py::arg("test_points") = 2000);
}
