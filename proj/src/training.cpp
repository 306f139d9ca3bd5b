#include "epgp/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "epgp/errors.hpp"

namespace epgp {

namespace {

// Flat parameter layout: [log a^2][z_free row-major][log sigma_j^2][log s].
struct Layout {
  bool has_a = false;
  Eigen::Index m = 0;
  Eigen::Index free_dim = 0;
  Eigen::Index p = 0;

  [[nodiscard]] Eigen::Index z_offset() const { return has_a ? 1 : 0; }
  [[nodiscard]] Eigen::Index sigma_offset() const {
    return z_offset() + m * free_dim;
  }
  [[nodiscard]] Eigen::Index noise_offset() const { return sigma_offset() + p; }
  [[nodiscard]] Eigen::Index size() const { return noise_offset() + 1; }
};

struct Groups {
  bool a_sq = false;
  bool z_free = true;
  bool sigma = true;
  bool noise = true;
};

Layout layout_of(const ModelState& s) {
  return {s.a_sq.has_value(), s.z_free.rows(), s.z_free.cols(),
          s.log_sigma_j_sq.size()};
}

Eigen::VectorXd pack(const ModelState& s, const Layout& lay) {
  Eigen::VectorXd theta(lay.size());
  if (lay.has_a) theta(0) = std::log(*s.a_sq);
  for (Eigen::Index j = 0; j < lay.m; ++j) {
    for (Eigen::Index k = 0; k < lay.free_dim; ++k) {
      theta(lay.z_offset() + j * lay.free_dim + k) = s.z_free(j, k);
    }
  }
  theta.segment(lay.sigma_offset(), lay.p) = s.log_sigma_j_sq;
  theta(lay.noise_offset()) = s.log_sigma0_sq;
  return theta;
}

ModelState unpack(const Eigen::VectorXd& theta, const Layout& lay) {
  ModelState s;
  if (lay.has_a) s.a_sq = std::exp(theta(0));
  s.z_free.resize(lay.m, lay.free_dim);
  for (Eigen::Index j = 0; j < lay.m; ++j) {
    for (Eigen::Index k = 0; k < lay.free_dim; ++k) {
      s.z_free(j, k) = theta(lay.z_offset() + j * lay.free_dim + k);
    }
  }
  s.log_sigma_j_sq = theta.segment(lay.sigma_offset(), lay.p);
  s.log_sigma0_sq = theta(lay.noise_offset());
  return s;
}

Eigen::VectorXd pack_gradient(const Objective& obj, const ModelState& s,
                              const Layout& lay, const Groups& groups) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(lay.size());
  if (lay.has_a && groups.a_sq && obj.gradient.a_sq) {
    // d/d(log a^2) = a^2 d/d(a^2)
    g(0) = *s.a_sq * *obj.gradient.a_sq;
  }
  if (groups.z_free) {
    for (Eigen::Index j = 0; j < lay.m; ++j) {
      for (Eigen::Index k = 0; k < lay.free_dim; ++k) {
        g(lay.z_offset() + j * lay.free_dim + k) = obj.gradient.z_free(j, k);
      }
    }
  }
  if (groups.sigma) {
    g.segment(lay.sigma_offset(), lay.p) = obj.gradient.log_sigma_j_sq;
  }
  if (groups.noise) g(lay.noise_offset()) = obj.gradient.log_sigma0_sq;
  return g;
}

double sample_variance(const Eigen::VectorXd& Y) {
  if (Y.size() < 2) return 1.0;
  const double mean = Y.mean();
  const double var =
      (Y.array() - mean).square().sum() / static_cast<double>(Y.size() - 1);
  // A constant signal still needs a positive prior scale.
  return var > 0.0 ? var : std::max(mean * mean, 1.0);
}

struct Problem {
  const VarietySpec& spec;
  const Dataset& data;
  const TrainConfig& cfg;
  const ProgressSink& sink;
};

struct Segment {
  ModelState best;
  double best_loss = std::numeric_limits<double>::infinity();
  double first_loss = 0.0;
  std::vector<double> losses;
  std::vector<double> a_trace;
  bool stopped_early = false;
};

// Decides after each evaluation whether a segment should stop.
using StopRule = std::function<bool(const ModelState&, double loss, int it)>;

Segment run_segment(const Problem& prob, const ModelState& start,
                    const Groups& groups, int iters, int stage, int restart,
                    int& global_iter, const StopRule& stop = {}) {
  const Layout lay = layout_of(start);
  Eigen::VectorXd theta = pack(start, lay);
  AdamState adam(lay.size());
  const bool with_a = lay.has_a && groups.a_sq;
  const TrainConfig& cfg = prob.cfg;

  Segment seg;
  seg.best = start;
  for (int it = 0; it < iters; ++it, ++global_iter) {
    ModelState state = unpack(theta, lay);
    // A parameter that is not trained keeps its exact value rather than
    // exp(log(a^2)).
    if (lay.has_a && (!with_a || cfg.freeze_a_sq)) state.a_sq = start.a_sq;
    Objective obj;
    try {
      obj = nlml_with_gradient(prob.spec, prob.data.points, prob.data.values,
                               state, with_a);
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << "training aborted at iteration " << global_iter << " (stage "
          << stage << ", restart " << restart << "): " << e.what()
          << "; log sigma0^2 = " << state.log_sigma0_sq;
      if (state.a_sq) msg << ", a^2 = " << *state.a_sq;
      throw NumericalError(msg.str(), e.minor_index());
    }
    Eigen::VectorXd grad = pack_gradient(obj, state, lay, groups);
    if (!grad.allFinite()) {
      throw NumericalError("non-finite gradient at iteration " +
                           std::to_string(global_iter));
    }
    if (cfg.freeze_a_sq && lay.has_a) grad(0) = 0.0;

    if (it == 0) seg.first_loss = obj.value;
    seg.losses.push_back(obj.value);
    if (state.a_sq) seg.a_trace.push_back(*state.a_sq);
    if (obj.value < seg.best_loss) {
      seg.best_loss = obj.value;
      seg.best = state;
    }
    if (prob.sink) {
      prob.sink({global_iter, stage, restart, obj.value, state.a_sq});
    }
    if (stop && stop(state, obj.value, it)) {
      seg.stopped_early = true;
      ++global_iter;
      break;
    }
    if (cfg.convergence_tol > 0.0 && it >= cfg.convergence_window) {
      const auto& l = seg.losses;
      double old_best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i + cfg.convergence_window < l.size(); ++i) {
        old_best = std::min(old_best, l[i]);
      }
      if (old_best - seg.best_loss <
          cfg.convergence_tol * (1.0 + std::abs(seg.best_loss))) {
        ++global_iter;
        break;
      }
    }

    adam_step(theta, grad, adam, cfg.lr);
    double& log_noise = theta(lay.noise_offset());
    log_noise = std::max(log_noise, cfg.min_log_noise);
  }
  return seg;
}

TrainReport finish(const Problem& prob, TrainReport report,
                   std::chrono::steady_clock::time_point t0) {
  const BasisMatrix basis = build_phi(prob.spec, prob.data.points,
                                     report.state.z_free, report.state.param());
  report.posterior = posterior(basis.phi(), prob.data.values, report.state);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

void append(std::vector<double>& dst, const std::vector<double>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void check_data(const Dataset& data, const VarietySpec& spec) {
  if (data.size() < 1) throw InvalidArgument("dataset is empty");
  if (data.points.cols() != spec.ambient_dim) {
    throw InvalidArgument("dataset dimension does not match the PDE");
  }
  if (data.values.size() != data.size()) {
    throw InvalidArgument("dataset values and points disagree in length");
  }
}

double required_a_init(const TrainConfig& cfg) {
  if (!cfg.a_sq_init) {
    throw ConfigError("inverse training requires an initial a^2");
  }
  return PdeParam(*cfg.a_sq_init).a_sq();
}

}  // namespace

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::Direct: return "direct";
    case TrainMode::InverseJoint: return "inverse";
    case TrainMode::InverseStaged: return "inverse-staged";
  }
  return "unknown";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "direct") return TrainMode::Direct;
  if (name == "inverse" || name == "inverse_joint" || name == "inverse-joint") {
    return TrainMode::InverseJoint;
  }
  if (name == "inverse-staged" || name == "inverse_staged") {
    return TrainMode::InverseStaged;
  }
  throw ConfigError("unknown training mode '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (m < 1) throw ConfigError("m must be at least 1");
  if (iters < 1) throw ConfigError("iters must be at least 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw ConfigError("learning rate must be positive");
  }
  if (!(stage1_tol > 0.0)) throw ConfigError("stage1_tol must be positive");
  if (stage1_iters < 1) throw ConfigError("stage1_iters must be at least 1");
  if (max_restarts < 0) throw ConfigError("max_restarts must be non-negative");
  if (convergence_tol < 0.0) {
    throw ConfigError("convergence_tol must be non-negative");
  }
  if (convergence_window < 1) {
    throw ConfigError("convergence_window must be at least 1");
  }
  if (init_prior_var && !(*init_prior_var > 0.0)) {
    throw ConfigError("init_prior_var must be positive");
  }
  if (init_noise_var && !(*init_noise_var > 0.0)) {
    throw ConfigError("init_noise_var must be positive");
  }
  if (a_sq_init && !(*a_sq_init > 0.0 && std::isfinite(*a_sq_init))) {
    throw ConfigError("a_sq_init must be finite and positive");
  }
}

void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size() || state.m.size() != grads.size()) {
    throw InvalidArgument("Adam parameter, gradient, and moment sizes differ");
  }
  ++state.t;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v +
            (1.0 - state.beta2) * grads.array().square().matrix();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  params.array() -= lr * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + state.eps);
}

ModelState initial_state(const VarietySpec& spec, const Eigen::VectorXd& Y,
                         const TrainConfig& cfg, std::optional<double> a_sq,
                         std::uint64_t seed) {
  const double v = sample_variance(Y);
  const Eigen::Index p = static_cast<Eigen::Index>(spec.rows_per_frequency()) *
                         cfg.m;
  ModelState s;
  s.a_sq = a_sq;
  s.z_free = sample_free_frequencies(spec, cfg.m, seed);
  const double prior = cfg.init_prior_var.value_or(2.0 * v /
                                                   static_cast<double>(p));
  s.log_sigma_j_sq = Eigen::VectorXd::Constant(p, std::log(prior));
  s.log_sigma0_sq = std::log(cfg.init_noise_var.value_or(1e-2 * v));
  return s;
}

TrainReport train_direct(const Dataset& data, const VarietySpec& spec,
                         PdeParam param, const TrainConfig& cfg,
                         const ProgressSink& sink) {
  cfg.validate();
  check_data(data, spec);
  const auto t0 = std::chrono::steady_clock::now();
  const Problem prob{spec, data, cfg, sink};

  std::optional<double> a_sq;
  if (spec.needs_param()) a_sq = param.a_sq();
  const ModelState start = initial_state(spec, data.values, cfg, a_sq, cfg.seed);
  int global_iter = 0;
  Segment seg = run_segment(prob, start, Groups{}, cfg.iters, 0, 0, global_iter);

  TrainReport report;
  report.state = std::move(seg.best);
  report.best_loss = seg.best_loss;
  report.loss_trace = std::move(seg.losses);
  return finish(prob, std::move(report), t0);
}

TrainReport train_inverse_joint(const Dataset& data, const VarietySpec& spec,
                                const TrainConfig& cfg,
                                const ProgressSink& sink) {
  cfg.validate();
  check_data(data, spec);
  if (!spec.needs_param()) {
    throw ConfigError("inverse training needs a PDE with a parameter");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Problem prob{spec, data, cfg, sink};
  const ModelState start =
      initial_state(spec, data.values, cfg, required_a_init(cfg), cfg.seed);

  Groups groups;
  groups.a_sq = true;
  int global_iter = 0;
  Segment seg = run_segment(prob, start, groups, cfg.iters, 0, 0, global_iter);

  TrainReport report;
  report.state = std::move(seg.best);
  report.best_loss = seg.best_loss;
  report.loss_trace = std::move(seg.losses);
  report.a_sq_trace = std::move(seg.a_trace);
  return finish(prob, std::move(report), t0);
}

TrainReport train_inverse_staged(const Dataset& data, const VarietySpec& spec,
                                 const TrainConfig& cfg,
                                 const ProgressSink& sink) {
  cfg.validate();
  check_data(data, spec);
  if (!spec.needs_param()) {
    throw ConfigError("inverse training needs a PDE with a parameter");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Problem prob{spec, data, cfg, sink};
  const double a_init = required_a_init(cfg);

  TrainReport report;
  int global_iter = 0;
  bool accepted = false;
  std::optional<Segment> best_attempt;

  const Groups stage1{true, false, false, false};
  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    const ModelState start = initial_state(
        spec, data.values, cfg, a_init,
        cfg.seed + static_cast<std::uint64_t>(attempt));

    double prev_a = a_init;
    int quiet = 0;
    double start_loss = 0.0;
    bool met = false;
    StopRule rule = [&](const ModelState& s, double loss, int it) {
      if (it == 0) start_loss = loss;
      if (cfg.a_sq_true) {
        met = std::abs(*s.a_sq - *cfg.a_sq_true) < cfg.stage1_tol;
        return met;
      }
      const double step = std::abs(*s.a_sq - prev_a);
      prev_a = *s.a_sq;
      quiet = (it > 0 && step < cfg.stage1_step_tol) ? quiet + 1 : 0;
      const double gain = start_loss - loss;
      met = quiet >= cfg.stage1_patience &&
            gain >= cfg.stage1_min_gain * std::abs(start_loss);
      return met;
    };
    Segment seg = run_segment(prob, start, stage1, cfg.stage1_iters, 1,
                              attempt, global_iter, rule);
    append(report.loss_trace, seg.losses);
    append(report.a_sq_trace, seg.a_trace);

    if (met) {
      // The state at acceptance, not merely the lowest-loss one.
      ModelState accepted_state = start;
      accepted_state.a_sq = seg.a_trace.back();
      seg.best = accepted_state;
      best_attempt = std::move(seg);
      report.restarts = attempt;
      accepted = true;
      break;
    }
    if (!best_attempt || seg.best_loss < best_attempt->best_loss) {
      best_attempt = std::move(seg);
    }
    report.restarts = attempt;
  }
  report.converged = accepted;

  Groups stage2;
  stage2.a_sq = true;
  Segment seg = run_segment(prob, best_attempt->best, stage2, cfg.iters, 2,
                            report.restarts, global_iter);
  append(report.loss_trace, seg.losses);
  append(report.a_sq_trace, seg.a_trace);
  report.state = std::move(seg.best);
  report.best_loss = seg.best_loss;
  return finish(prob, std::move(report), t0);
}

TrainReport train(const Dataset& data, const VarietySpec& spec,
                  const TrainConfig& cfg, const ProgressSink& sink) {
  switch (cfg.mode) {
    case TrainMode::Direct: {
      if (!spec.needs_param()) {
        // The parameter is ignored by PDEs that have none.
        return train_direct(data, spec, PdeParam(1.0), cfg, sink);
      }
      if (!cfg.a_sq_init) {
        throw ConfigError("direct training requires the known a^2");
      }
      return train_direct(data, spec, PdeParam(*cfg.a_sq_init), cfg, sink);
    }
    case TrainMode::InverseJoint:
      return train_inverse_joint(data, spec, cfg, sink);
    case TrainMode::InverseStaged:
      return train_inverse_staged(data, spec, cfg, sink);
  }
  throw ConfigError("unknown training mode");
}

}  // namespace epgp
