#include <cmath>

#include <gtest/gtest.h>

#include "epgp/dataset.hpp"
#include "epgp/errors.hpp"
#include "epgp/training.hpp"

using namespace epgp;

namespace {

const VarietySpec kWave = VarietySpec::for_pde(PdeId::Wave2d);

Dataset small_data(int n = 60, std::uint64_t seed = 1) {
  return generate_dataset(TrueSolution(SolutionId::LowFreqCos), n,
                          Domain::wave_box(), 0.0, seed);
}

TrainConfig small_cfg(TrainMode mode) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.m = 5;
  cfg.iters = 150;
  cfg.lr = 1e-2;
  cfg.seed = 3;
  cfg.a_sq_init = mode == TrainMode::Direct ? 3.0 : 2.0;
  return cfg;
}

}  // namespace

TEST(Adam, ZeroGradientFromRestIsNoOp) {
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  const Eigen::VectorXd before = x;
  AdamState st(3);
  for (int i = 0; i < 5; ++i) adam_step(x, Eigen::VectorXd::Zero(3), st, 0.1);
  EXPECT_EQ(x, before);
  EXPECT_TRUE(st.m.isZero(0.0));
}

TEST(Adam, ZeroGradientDecaysMoments) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  AdamState st(2);
  st.m << 1.0, -1.0;
  st.v << 4.0, 4.0;
  adam_step(x, Eigen::VectorXd::Zero(2), st, 0.1);
  EXPECT_DOUBLE_EQ(st.m(0), 0.9);
  EXPECT_DOUBLE_EQ(st.v(0), 0.999 * 4.0);
}

TEST(Adam, FirstStepClosedForm) {
  for (double g : {3.0, -0.02, 1e-9}) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(1, g);
    AdamState st(1);
    adam_step(x, grad, st, 0.05);
    EXPECT_NEAR(x(0), -0.05 * g / (std::abs(g) + 1e-8), 1e-15);
    EXPECT_EQ(st.t, 1);
  }
}

// fixed point of the bias-corrected moments under a constant gradient
TEST(Adam, ConstantGradientStepApproachesLr) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd grad(2);
  grad << 0.7, -40.0;
  AdamState st(2);
  Eigen::VectorXd prev = x;
  for (int i = 0; i < 2000; ++i) {
    prev = x;
    adam_step(x, grad, st, 1e-3);
  }
  Eigen::VectorXd step = x - prev;
  EXPECT_NEAR(step(0), -1e-3, 1e-10);
  EXPECT_NEAR(step(1), 1e-3, 1e-10);
}

TEST(Adam, SizeMismatch) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  AdamState st(2);
  EXPECT_THROW(adam_step(x, Eigen::VectorXd::Zero(3), st, 0.1),
               InvalidArgument);
}

TEST(TrainConfig, Validation) {
  TrainConfig ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = [&](auto&& mutate) {
    TrainConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  bad([](TrainConfig& c) { c.lr = 0.0; });
  bad([](TrainConfig& c) { c.iters = 0; });
  bad([](TrainConfig& c) { c.m = 0; });
  bad([](TrainConfig& c) { c.stage1_tol = 0.0; });
  bad([](TrainConfig& c) { c.max_restarts = -1; });
  bad([](TrainConfig& c) { c.a_sq_init = -1.0; });
}

TEST(TrainMode, Names) {
  EXPECT_EQ(parse_train_mode("direct"), TrainMode::Direct);
  EXPECT_EQ(parse_train_mode("inverse"), TrainMode::InverseJoint);
  EXPECT_EQ(parse_train_mode("inverse-staged"), TrainMode::InverseStaged);
  EXPECT_EQ(parse_train_mode("inverse_staged"), TrainMode::InverseStaged);
  for (TrainMode m : {TrainMode::Direct, TrainMode::InverseJoint,
                      TrainMode::InverseStaged})
    EXPECT_EQ(parse_train_mode(to_string(m)), m);
  EXPECT_THROW((void)parse_train_mode("newton"), ConfigError);
}

TEST(InitialState, Defaults) {
  Dataset d = small_data();
  TrainConfig cfg = small_cfg(TrainMode::Direct);
  ModelState s = initial_state(kWave, d.values, cfg, 3.0, 9);
  EXPECT_EQ(s.z_free, sample_free_frequencies(kWave, 5, 9));
  EXPECT_EQ(s.log_sigma_j_sq.size(), 20);
  const double mean = d.values.mean();
  const double v = (d.values.array() - mean).square().sum() / (d.size() - 1);
  EXPECT_NEAR(s.log_sigma_j_sq(0), std::log(2 * v / 20), 1e-12);
  EXPECT_NEAR(s.log_sigma0_sq, std::log(1e-2 * v), 1e-12);
}

TEST(TrainDirect, LossTraceAndBestState) {
  Dataset d = small_data();
  TrainReport r = train(d, kWave, small_cfg(TrainMode::Direct));
  ASSERT_EQ(r.loss_trace.size(), 150u);
  double run_min = r.loss_trace.front();
  for (double l : r.loss_trace) {
    EXPECT_TRUE(std::isfinite(l));
    run_min = std::min(run_min, l);
  }
  EXPECT_EQ(r.best_loss, run_min);
  EXPECT_LE(r.best_loss, r.loss_trace.front());
  EXPECT_EQ(*r.state.a_sq, 3.0);
  EXPECT_TRUE(r.a_sq_trace.empty());
  EXPECT_TRUE(r.converged);
}

TEST(TrainDirect, ZeroSignalPredictsZero) {
  Dataset d = small_data();
  d.values.setZero();
  TrainReport r = train(d, kWave, small_cfg(TrainMode::Direct));
  EXPECT_LE(r.posterior.weights.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(predict(r.posterior, kWave, d.points).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(TrainDirect, Deterministic) {
  Dataset d = small_data();
  TrainConfig cfg = small_cfg(TrainMode::Direct);
  TrainReport a = train(d, kWave, cfg);
  TrainReport b = train(d, kWave, cfg);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_TRUE(identical(a.state, b.state));
  EXPECT_EQ(a.posterior.weights, b.posterior.weights);
}

TEST(TrainDirect, ProgressSinkSeesEveryIteration) {
  Dataset d = small_data();
  std::vector<ProgressRecord> seen;
  TrainReport r = train(d, kWave, small_cfg(TrainMode::Direct),
                        [&](const ProgressRecord& p) { seen.push_back(p); });
  ASSERT_EQ(seen.size(), r.loss_trace.size());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i].iteration, static_cast<int>(i));
    EXPECT_EQ(seen[i].loss, r.loss_trace[i]);
  }
}

TEST(TrainDirect, RequiresParameter) {
  TrainConfig cfg = small_cfg(TrainMode::Direct);
  cfg.a_sq_init.reset();
  EXPECT_THROW((void)train(small_data(), kWave, cfg), ConfigError);
}

TEST(TrainDirect, ConvergenceToleranceStopsEarly) {
  TrainConfig cfg = small_cfg(TrainMode::Direct);
  cfg.iters = 2000;
  cfg.convergence_tol = 1e-2;
  cfg.convergence_window = 20;
  TrainReport r = train(small_data(), kWave, cfg);
  EXPECT_LT(r.loss_trace.size(), 2000u);
}

// cross-check: a frozen inverse run started at the truth is the direct run
TEST(TrainInverseJoint, FrozenAtTruthEqualsDirect) {
  Dataset d = small_data();
  TrainConfig direct = small_cfg(TrainMode::Direct);
  TrainConfig inv = small_cfg(TrainMode::InverseJoint);
  inv.a_sq_init = 3.0;
  inv.freeze_a_sq = true;
  TrainReport a = train(d, kWave, direct);
  TrainReport b = train(d, kWave, inv);
  ASSERT_EQ(a.loss_trace.size(), b.loss_trace.size());
  for (std::size_t i = 0; i < a.loss_trace.size(); ++i)
    EXPECT_NEAR(a.loss_trace[i], b.loss_trace[i],
                1e-10 * std::abs(a.loss_trace[i]));
  EXPECT_EQ(*b.state.a_sq, 3.0);
  EXPECT_LE((a.posterior.weights - b.posterior.weights).cwiseAbs().maxCoeff(),
            1e-8);
}

TEST(TrainInverseJoint, StartAtTruthStaysNear) {
  Dataset d = small_data(200, 4);
  TrainConfig cfg = small_cfg(TrainMode::InverseJoint);
  cfg.m = 10;
  cfg.iters = 300;
  cfg.a_sq_init = 3.0;
  TrainReport r = train(d, kWave, cfg);
  EXPECT_NEAR(*r.state.a_sq, 3.0, 5e-3);
  ASSERT_EQ(r.a_sq_trace.size(), r.loss_trace.size());
  for (double a : r.a_sq_trace) {
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_GT(a, 0.0);
  }
}

TEST(TrainInverseJoint, Errors) {
  TrainConfig cfg = small_cfg(TrainMode::InverseJoint);
  cfg.a_sq_init.reset();
  EXPECT_THROW((void)train(small_data(), kWave, cfg), ConfigError);
  Dataset free_data = small_data();
  cfg.a_sq_init = 1.0;
  EXPECT_THROW((void)train(free_data, VarietySpec::for_pde(PdeId::Free), cfg),
               ConfigError);
  Dataset wrong = small_data();
  wrong.values.conservativeResize(10);
  EXPECT_THROW((void)train(wrong, kWave, cfg), InvalidArgument);
}

TEST(TrainInverseStaged, AcceptedImmediately) {
  TrainConfig cfg = small_cfg(TrainMode::InverseStaged);
  cfg.a_sq_init = 3.0;
  cfg.a_sq_true = 3.0;
  cfg.stage1_iters = 50;
  TrainReport r = train(small_data(), kWave, cfg);
  EXPECT_EQ(r.restarts, 0);
  EXPECT_TRUE(r.converged);
  // stage 1 stops on its first evaluation
  EXPECT_EQ(r.loss_trace.size(), 1u + 150u);
}

TEST(TrainInverseStaged, AdversarialStageOneRestarts) {
  TrainConfig cfg = small_cfg(TrainMode::InverseStaged);
  cfg.a_sq_init = 1.0;
  cfg.a_sq_true = 3.0;
  cfg.stage1_iters = 1;
  cfg.max_restarts = 3;
  TrainReport r = train(small_data(), kWave, cfg);
  EXPECT_EQ(r.restarts, 3);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.loss_trace.size(), 1u * (3 + 1) + 150u);
  EXPECT_LE(r.loss_trace.size(),
            static_cast<std::size_t>(cfg.iters) * (r.restarts + 1));
}

TEST(TrainInverseStaged, RestartsUseFreshFrequencies) {
  TrainConfig cfg = small_cfg(TrainMode::InverseStaged);
  cfg.a_sq_init = 1.0;
  cfg.a_sq_true = 3.0;
  cfg.stage1_iters = 1;
  cfg.max_restarts = 2;
  std::vector<ProgressRecord> seen;
  TrainReport r = train(small_data(), kWave, cfg,
                        [&](const ProgressRecord& p) { seen.push_back(p); });
  ASSERT_GE(seen.size(), 3u);
  EXPECT_EQ(seen[0].stage, 1);
  EXPECT_EQ(seen[1].restart, 1);
  EXPECT_EQ(seen[2].restart, 2);
  // distinct frequency draws give distinct initial losses
  EXPECT_NE(seen[0].loss, seen[1].loss);
  EXPECT_EQ(seen.back().stage, 2);
  (void)r;
}

TEST(TrainInverseStaged, BlindCriterion) {
  Dataset d = small_data(150, 6);
  TrainConfig cfg = small_cfg(TrainMode::InverseStaged);
  cfg.a_sq_init = 2.0;
  cfg.stage1_iters = 400;
  cfg.max_restarts = 2;
  TrainReport r = train(d, kWave, cfg);
  EXPECT_LE(r.restarts, 2);
  EXPECT_EQ(r.a_sq_trace.size(), r.loss_trace.size());
  for (double a : r.a_sq_trace) EXPECT_GT(a, 0.0);
  // a blind run that cannot satisfy the gain requirement restarts
  TrainConfig hard = cfg;
  hard.stage1_min_gain = 10.0;
  TrainReport h = train(d, kWave, hard);
  EXPECT_EQ(h.restarts, 2);
  EXPECT_FALSE(h.converged);
}

TEST(TrainInverseStaged, Deterministic) {
  TrainConfig cfg = small_cfg(TrainMode::InverseStaged);
  cfg.stage1_iters = 30;
  cfg.max_restarts = 1;
  Dataset d = small_data();
  TrainReport a = train(d, kWave, cfg);
  TrainReport b = train(d, kWave, cfg);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_EQ(a.a_sq_trace, b.a_sq_trace);
  EXPECT_EQ(a.restarts, b.restarts);
}
