#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "epgp/errors.hpp"
#include "epgp/variety.hpp"
#include "support.hpp"

using namespace epgp;
using epgp::testing::Gen;

namespace {

const PdeId kAllPdes[] = {PdeId::Wave2d, PdeId::Wave1d, PdeId::Transport1d,
                          PdeId::Heat1d, PdeId::Free};

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(VarietySpec, ShapesPerPde) {
  for (PdeId id : kAllPdes) {
    VarietySpec s = VarietySpec::for_pde(id);
    EXPECT_EQ(s.pde_id, id);
    EXPECT_EQ(s.ambient_dim, s.free_dim + (id == PdeId::Free ? 0 : 1));
    EXPECT_GE(s.branch_count, 1);
    EXPECT_EQ(s.multiplier_degree, 0);
    EXPECT_EQ(variety_for(id).spec(), s);
  }
  VarietySpec w = VarietySpec::for_pde(PdeId::Wave2d);
  EXPECT_EQ(w.ambient_dim, 3);
  EXPECT_EQ(w.free_dim, 2);
  EXPECT_EQ(w.branch_count, 2);
  EXPECT_EQ(w.rows_per_frequency(), 4);
  EXPECT_EQ(VarietySpec::for_pde(PdeId::Transport1d).rows_per_frequency(), 2);
}

TEST(VarietySpec, IdsRoundTrip) {
  for (PdeId id : kAllPdes) EXPECT_EQ(parse_pde_id(to_string(id)), id);
  EXPECT_THROW((void)parse_pde_id("maxwell"), ConfigError);
}

TEST(PdeParam, RejectsNonPositive) {
  EXPECT_THROW(PdeParam(0.0), InvalidArgument);
  EXPECT_THROW(PdeParam(-1.0), InvalidArgument);
  EXPECT_THROW(PdeParam(std::numeric_limits<double>::quiet_NaN()),
               InvalidArgument);
  EXPECT_DOUBLE_EQ(PdeParam(2.5).a_sq(), 2.5);
}

TEST(Parametrize, Wave2dUnitFrequency) {
  auto xi = parametrize(VarietySpec::for_pde(PdeId::Wave2d), vec({1, 0}),
                        PdeParam(3.0));
  ASSERT_EQ(xi.size(), 2u);
  EXPECT_DOUBLE_EQ(xi[0](0), 1.0);
  EXPECT_DOUBLE_EQ(xi[0](1), 0.0);
  EXPECT_NEAR(xi[0](2), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(xi[1](2), -std::sqrt(3.0), 1e-15);
}

TEST(Parametrize, ConeVertexDuplicates) {
  for (double a2 : {0.1, 3.0, 40.0}) {
    auto xi = parametrize(VarietySpec::for_pde(PdeId::Wave2d), vec({0, 0}),
                          PdeParam(a2));
    ASSERT_EQ(xi.size(), 2u);
    EXPECT_TRUE(xi[0].isZero(0.0));
    EXPECT_TRUE(xi[1].isZero(0.0));
  }
}

TEST(Parametrize, PythagoreanTriple) {
  auto xi = parametrize(VarietySpec::for_pde(PdeId::Wave2d), vec({3, 4}),
                        PdeParam(4.0));
  EXPECT_EQ(xi[0], Eigen::Vector3d(3, 4, 10));
  EXPECT_EQ(xi[1], Eigen::Vector3d(3, 4, -10));
}

TEST(Parametrize, Errors) {
  VarietySpec w = VarietySpec::for_pde(PdeId::Wave2d);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW((void)parametrize(w, vec({nan, 0}), PdeParam(1.0)),
               InvalidArgument);
  EXPECT_THROW((void)parametrize(w, vec({1, 2, 3}), PdeParam(1.0)),
               InvalidArgument);
  EXPECT_THROW((void)parametrize(w, vec({1, 2}), std::nullopt), ConfigError);
  // the free PDE does not need a parameter
  auto xi = parametrize(VarietySpec::for_pde(PdeId::Free), vec({1, 2, 3}),
                        std::nullopt);
  EXPECT_EQ(xi[0], Eigen::Vector3d(1, 2, 3));
}

TEST(SymbolResidual, Examples) {
  VarietySpec w = VarietySpec::for_pde(PdeId::Wave2d);
  EXPECT_NEAR(symbol_residual(w, vec({1, 0, std::sqrt(3.0)}), PdeParam(3.0)),
              0.0, 1e-15);
  EXPECT_DOUBLE_EQ(symbol_residual(w, vec({1, 0, 0}), PdeParam(3.0)), -3.0);
  EXPECT_DOUBLE_EQ(symbol_residual(VarietySpec::for_pde(PdeId::Transport1d),
                                   vec({1, 2}), PdeParam(2.0)),
                   0.0);
  EXPECT_THROW((void)symbol_residual(w, vec({1, 0}), PdeParam(3.0)),
               InvalidArgument);
}

TEST(SampleFreeFrequencies, DeterministicPerSeed) {
  VarietySpec w = VarietySpec::for_pde(PdeId::Wave2d);
  Eigen::MatrixXd a = sample_free_frequencies(w, 3, 7);
  Eigen::MatrixXd b = sample_free_frequencies(w, 3, 7);
  EXPECT_EQ(a.rows(), 3);
  EXPECT_EQ(a.cols(), 2);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, sample_free_frequencies(w, 3, 8));
}

TEST(SampleFreeFrequencies, StandardNormalMoments) {
  VarietySpec w = VarietySpec::for_pde(PdeId::Wave2d);
  for (std::uint64_t seed : {0u, 1u, 12345u}) {
    Eigen::MatrixXd z = sample_free_frequencies(w, 10000, seed);
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      double mean = z.col(c).mean();
      double var = (z.col(c).array() - mean).square().sum() / (z.rows() - 1);
      EXPECT_GT(mean, -0.05);
      EXPECT_LT(mean, 0.05);
      EXPECT_GT(var, 0.9);
      EXPECT_LT(var, 1.1);
    }
  }
}

TEST(SampleFreeFrequencies, FreePdeAndErrors) {
  VarietySpec f = VarietySpec::for_pde(PdeId::Free);
  Eigen::MatrixXd z = sample_free_frequencies(f, 1, 0);
  EXPECT_EQ(z.rows(), 1);
  EXPECT_EQ(z.cols(), f.ambient_dim);
  EXPECT_THROW((void)sample_free_frequencies(f, 0, 0), InvalidArgument);
}

// property: lifted frequencies sit on the variety
TEST(VarietyProperty, LiftedFrequenciesSatisfySymbol) {
  Gen g(11);
  for (PdeId id : kAllPdes) {
    VarietySpec s = VarietySpec::for_pde(id);
    for (int trial = 0; trial < 500; ++trial) {
      Eigen::VectorXd z(s.free_dim);
      double scale = std::pow(10.0, g.uniform(-3, 3));
      for (int k = 0; k < s.free_dim; ++k) z(k) = scale * g.normal();
      PdeParam p(std::pow(10.0, g.uniform(-2, 2)));
      for (const auto& xi : parametrize(s, z, p)) {
        double tol = 1e-12 * std::max(xi.squaredNorm(), 1e-300);
        // heat and transport are linear in xi_t; scale by |xi| instead
        if (id == PdeId::Heat1d || id == PdeId::Transport1d)
          tol = 1e-12 * std::max(xi.squaredNorm(), xi.norm()) * p.a_sq();
        EXPECT_LE(std::abs(symbol_residual(s, xi, p)), tol)
            << to_string(id) << " trial " << trial;
      }
    }
  }
}

// property: the jacobian agrees with finite differences, so the slope is
// bounded away from the vertex
TEST(VarietyProperty, JacobianMatchesDifferences) {
  Gen g(5);
  for (PdeId id : kAllPdes) {
    VarietySpec s = VarietySpec::for_pde(id);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd z(s.free_dim);
      for (int k = 0; k < s.free_dim; ++k) z(k) = g.uniform(0.2, 2.0) *
                                                  (g.uniform() < 0.5 ? -1 : 1);
      double a2 = g.uniform(0.5, 4.0);
      auto jac = parametrize_jacobian(s, z, PdeParam(a2));
      const double h = 1e-6;
      for (int k = 0; k < s.free_dim; ++k) {
        Eigen::VectorXd zp = z, zm = z;
        zp(k) += h;
        zm(k) -= h;
        auto xp = parametrize(s, zp, PdeParam(a2));
        auto xm = parametrize(s, zm, PdeParam(a2));
        for (std::size_t b = 0; b < xp.size(); ++b) {
          Eigen::VectorXd fd = (xp[b] - xm[b]) / (2 * h);
          EXPECT_LE((fd - jac[b].d_free.col(k)).norm(), 1e-6 * (1 + fd.norm()));
          EXPECT_LE(fd.norm(), 10.0 * (1.0 + a2) * (1.0 + z.norm()));
        }
      }
      if (!s.needs_param()) continue;
      auto xp = parametrize(s, z, PdeParam(a2 + h));
      auto xm = parametrize(s, z, PdeParam(a2 - h));
      for (std::size_t b = 0; b < xp.size(); ++b) {
        Eigen::VectorXd fd = (xp[b] - xm[b]) / (2 * h);
        EXPECT_LE((fd - jac[b].d_param).norm(), 1e-6 * (1 + fd.norm()));
      }
    }
  }
}

TEST(VarietyProperty, ConeVertexJacobianIsFinite) {
  auto jac = parametrize_jacobian(VarietySpec::for_pde(PdeId::Wave2d),
                                  vec({0, 0}), PdeParam(3.0));
  for (const auto& j : jac) {
    EXPECT_TRUE(j.d_free.allFinite());
    EXPECT_TRUE(j.d_param.isZero(0.0));
  }
}
