#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "epgp/basis.hpp"
#include "epgp/errors.hpp"
#include "support.hpp"

using namespace epgp;
using epgp::testing::Gen;

namespace {

const VarietySpec kWave = VarietySpec::for_pde(PdeId::Wave2d);

Eigen::MatrixXd row3(double x, double y, double t) {
  Eigen::MatrixXd p(1, 3);
  p << x, y, t;
  return p;
}

}  // namespace

TEST(BasisRow, Ordering) {
  static_assert(basis_row(0, 0, TrigKind::Cos, 2) == 0);
  static_assert(basis_row(0, 0, TrigKind::Sin, 2) == 1);
  static_assert(basis_row(0, 1, TrigKind::Cos, 2) == 2);
  static_assert(basis_row(1, 0, TrigKind::Cos, 2) == 4);
  static_assert(basis_row(3, 0, TrigKind::Sin, 1) == 7);

  Gen g(1);
  BasisMatrix B = build_phi(kWave, g.uniform_matrix(4, 3, -1, 1),
                            g.normal_matrix(5, 2), PdeParam(2.0));
  ASSERT_EQ(B.rows(), 20);
  for (int j = 0; j < 5; ++j)
    for (int b = 0; b < 2; ++b)
      for (TrigKind k : {TrigKind::Cos, TrigKind::Sin}) {
        RowEntry e = B.row_map()[basis_row(j, b, k, 2)];
        EXPECT_EQ(e, (RowEntry{j, b, k}));
      }
  EXPECT_EQ(B.frequencies().rows(), 10);
  EXPECT_EQ(B.frequencies().cols(), 3);
}

TEST(BuildPhi, OriginGivesCosOneSinZero) {
  Gen g(2);
  BasisMatrix B = build_phi(kWave, row3(0, 0, 0), g.normal_matrix(7, 2),
                            PdeParam(3.0));
  for (Eigen::Index r = 0; r < B.rows(); ++r)
    EXPECT_EQ(B.phi()(r, 0), r % 2 == 0 ? 1.0 : 0.0);
}

TEST(BuildPhi, TimeZeroHidesBranch) {
  Eigen::MatrixXd z(1, 2);
  z << 1, 0;
  BasisMatrix B = build_phi(kWave, row3(M_PI, 0, 0), z, PdeParam(3.0));
  EXPECT_NEAR(B.phi()(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(B.phi()(2, 0), -1.0, 1e-15);
  EXPECT_NEAR(B.phi()(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(B.phi()(3, 0), 0.0, 1e-15);
}

TEST(BuildPhi, BranchesAreEvenOdd) {
  Eigen::MatrixXd z(1, 2);
  z << 1, 0;
  BasisMatrix B = build_phi(kWave, row3(0, 0, 1), z, PdeParam(3.0));
  const double r3 = std::sqrt(3.0);
  EXPECT_NEAR(B.phi()(0, 0), std::cos(r3), 1e-15);
  EXPECT_NEAR(B.phi()(1, 0), std::sin(r3), 1e-15);
  EXPECT_NEAR(B.phi()(2, 0), std::cos(r3), 1e-15);
  EXPECT_NEAR(B.phi()(3, 0), -std::sin(r3), 1e-15);
}

TEST(BuildPhi, MatchesParametrizeEntrywise) {
  Gen g(3);
  Eigen::MatrixXd pts = g.uniform_matrix(37, 3, -6, 6);
  Eigen::MatrixXd z = g.normal_matrix(9, 2);
  PdeParam p(1.7);
  BasisMatrix B = build_phi(kWave, pts, z, p);
  double worst = 0.0;
  for (int j = 0; j < 9; ++j) {
    auto xi = parametrize(kWave, z.row(j).transpose(), p);
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < 37; ++i) {
        double th = pts.row(i).dot(xi[b]);
        worst = std::max(worst, std::abs(B.phi()(basis_row(j, b, TrigKind::Cos, 2), i) - std::cos(th)));
        worst = std::max(worst, std::abs(B.phi()(basis_row(j, b, TrigKind::Sin, 2), i) - std::sin(th)));
      }
  }
  EXPECT_LE(worst, 1e-13);
  EXPECT_LE(B.phi().cwiseAbs().maxCoeff(), 1.0);
}

TEST(BuildPhi, HeatRowsDecay) {
  VarietySpec heat = VarietySpec::for_pde(PdeId::Heat1d);
  Eigen::MatrixXd z(1, 1);
  z << 2.0;
  Eigen::MatrixXd pts(1, 2);
  pts << 0.3, 0.5;
  BasisMatrix B = build_phi(heat, pts, z, PdeParam(0.1));
  const double env = std::exp(-0.1 * 4.0 * 0.5);
  EXPECT_NEAR(B.phi()(0, 0), env * std::cos(0.6), 1e-15);
  EXPECT_NEAR(B.phi()(1, 0), env * std::sin(0.6), 1e-15);
}

TEST(BuildPhi, ShapeErrors) {
  Gen g(4);
  EXPECT_THROW((void)build_phi(kWave, g.uniform_matrix(3, 2, 0, 1),
                               g.normal_matrix(2, 2), PdeParam(1.0)),
               InvalidArgument);
  EXPECT_THROW((void)build_phi(kWave, g.uniform_matrix(3, 3, 0, 1),
                               g.normal_matrix(2, 3), PdeParam(1.0)),
               InvalidArgument);
}

// property: permuting points permutes columns
TEST(BasisProperty, PermutationEquivariant) {
  Gen g(5);
  for (int trial = 0; trial < 20; ++trial) {
    int n = g.integer(1, 60);
    Eigen::MatrixXd pts = g.uniform_matrix(n, 3, -6, 6);
    Eigen::MatrixXd z = g.normal_matrix(g.integer(1, 12), 2);
    PdeParam p(g.uniform(0.5, 4));
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[g.integer(0, i)]);
    Eigen::MatrixXd shuffled(n, 3);
    for (int i = 0; i < n; ++i) shuffled.row(i) = pts.row(perm[i]);
    Eigen::MatrixXd a = build_phi(kWave, pts, z, p).phi();
    Eigen::MatrixXd b = build_phi(kWave, shuffled, z, p).phi();
    for (int i = 0; i < n; ++i) EXPECT_EQ(b.col(i), a.col(perm[i]));
  }
}

TEST(BasisProperty, DifferentiableInASq) {
  Gen g(6);
  Eigen::MatrixXd pts = g.uniform_matrix(25, 3, -6, 6);
  Eigen::MatrixXd z = g.uniform_matrix(6, 2, 0.3, 1.5);
  const double a2 = 2.2, h = 1e-6;
  Eigen::MatrixXd d = (build_phi(kWave, pts, z, PdeParam(a2 + h)).phi() -
                       build_phi(kWave, pts, z, PdeParam(a2 - h)).phi()) /
                      (2 * h);
  EXPECT_TRUE(d.allFinite());
  // |d phi / d a2| <= |t| |z| / (2 a)
  EXPECT_LE(d.cwiseAbs().maxCoeff(),
            12.0 * 1.5 * std::sqrt(2.0) / (2 * std::sqrt(a2)) + 1e-6);
}

TEST(PdeResidual, SingleFrequency) {
  Eigen::VectorXd z(2), pt(3);
  z << 1, 1;
  pt << 0.3, -0.2, 0.5;
  EXPECT_LE(pde_residual_of_basis(kWave, z, PdeParam(3.0), pt, 1e-3), 1e-5);
}

// truncation error of the stencil scales like h^2
TEST(PdeResidual, StepSweepShowsSecondOrder) {
  Eigen::VectorXd z(2), pt(3);
  z << 1, 1;
  pt << 0.3, -0.2, 0.5;
  double r1 = pde_residual_of_basis(kWave, z, PdeParam(3.0), pt, 2e-2);
  double r2 = pde_residual_of_basis(kWave, z, PdeParam(3.0), pt, 1e-2);
  EXPECT_GT(r1 / r2, 3.5);
  EXPECT_LT(r1 / r2, 4.5);
  // extrapolating the sweep down to h = 1e-3 lands far under the bound
  EXPECT_LE(r2 / 100.0, 1e-5);
}

TEST(PdeResidual, VertexAndFree) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2), pt(3);
  pt << 1.0, 2.0, 3.0;
  EXPECT_EQ(pde_residual_of_basis(kWave, z, PdeParam(3.0), pt, 1e-3), 0.0);
  EXPECT_EQ(pde_residual_of_basis(VarietySpec::for_pde(PdeId::Free),
                                  Eigen::Vector3d(1, 2, 3), std::nullopt, pt,
                                  1e-3),
            0.0);
  EXPECT_THROW((void)pde_residual_of_basis(kWave, z, PdeParam(3.0), pt, 0.0),
               InvalidArgument);
}

TEST(PdeResidual, OtherOperators) {
  Gen g(7);
  for (PdeId id : {PdeId::Wave1d, PdeId::Transport1d, PdeId::Heat1d}) {
    VarietySpec s = VarietySpec::for_pde(id);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd z(s.free_dim), pt(s.ambient_dim);
      for (int k = 0; k < s.free_dim; ++k) z(k) = g.uniform(-1, 1);
      for (int k = 0; k < s.ambient_dim; ++k) pt(k) = g.uniform(-1, 1);
      EXPECT_LE(pde_residual_of_basis(s, z, PdeParam(g.uniform(0.5, 2)), pt,
                                      1e-3),
                1e-5)
          << to_string(id);
    }
  }
}

// property: 100 random basis frequencies at random interior points
TEST(BasisProperty, RandomFrequenciesSolveWaveEquation) {
  Gen g(8);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd z(2), pt(3);
    z << g.uniform(-1, 1), g.uniform(-1, 1);
    pt << g.uniform(-5.9, 5.9), g.uniform(-5.9, 5.9), g.uniform(0.1, 11.9);
    worst = std::max(worst, pde_residual_of_basis(kWave, z,
                                                  PdeParam(g.uniform(0.5, 4)),
                                                  pt, 1e-3));
  }
  EXPECT_LE(worst, 1e-5);
}
