#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "soliton_lab/flat_ode.hpp"
#include "soliton_lab/identities.hpp"
#include "soliton_lab/warped_ode.hpp"
#include "support.hpp"

using namespace soliton_lab;
using namespace soliton_lab::testing;

TEST(WarpedRhs, GaussianConeSubstitutesExactly) {
  for (int n = 3; n <= 8; ++n) {
    for (double lambda : {-1.0, 0.0, 1.0}) {
      double worst = 0.0;
      for (double t : linspace(0.1, 10.0, 500)) {
        const auto d = rhs_warped(gaussian_cone_state(lambda, t), n, n - 2.0, lambda);
        worst = std::max({worst, std::abs(d.F - 1.0), std::abs(d.w + 1.0 / (t * t)),
                          std::abs(d.u0 - lambda)});
      }
      EXPECT_LE(worst, 1e-12) << "n=" << n << " lambda=" << lambda;
    }
  }
}

TEST(WarpedRhs, PrintedCoefficientWouldMissTheCone) {
  // The u0 equation carries (n-2) lambda; with (n-1) lambda the cone would be
  // off by exactly lambda.
  const auto d = rhs_warped(gaussian_cone_state(1.0, 2.0), 4, 2.0, 1.0);
  EXPECT_NEAR(d.u0, 1.0, 1e-15);
  EXPECT_GT(std::abs((d.u0 - 1.0) - (-1.0)), 0.5);
}

TEST(WarpedRhs, RoundCylinderIsStationary) {
  for (int n = 3; n <= 6; ++n) {
    const double mu = n - 2.0;
    const double lambda = 0.5;
    const auto d = rhs_warped(round_cylinder_state(mu, lambda, 0.7), n, mu, lambda);
    EXPECT_NEAR(d.F, 0.0, 1e-15);
    EXPECT_NEAR(d.w, 0.0, 1e-15);
    EXPECT_NEAR(d.u0, lambda, 1e-15);
  }
}

TEST(WarpedRhs, FlatFiberReducesToTheDiagonalSystem) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 4;
    const double w = uniform(rng, -2, 2), u0 = uniform(rng, -2, 2), lambda = uniform(rng, -1, 1);
    const auto d = rhs_warped({0.0, 1.3, w, u0}, n, 0.0, lambda);
    FlatSolitonState s{0.0, u0, std::vector<double>(static_cast<std::size_t>(n - 1), w)};
    const auto e = rhs(s, lambda, n, CoefficientConvention::corrected);
    EXPECT_NEAR(d.w, e.u[0], 1e-13);
    EXPECT_NEAR(d.u0, e.u0, 1e-13);
  }
}

TEST(WarpedRhs, RejectsBadInput) {
  EXPECT_THROW(rhs_warped({0, 0.0, 0, 0}, 3, 1, 0), DomainError);
  EXPECT_THROW(rhs_warped({0, -1.0, 0, 0}, 3, 1, 0), DomainError);
  EXPECT_THROW(rhs_warped({0, 1.0, 0, 0}, 2, 1, 0), ParameterError);
  EXPECT_THROW(gaussian_cone_state(1.0, 0.0), DomainError);
  EXPECT_THROW(round_cylinder_state(1.0, 0.0, 0.0), ParameterError);
}

TEST(SolitonModel, Validation) {
  EXPECT_NO_THROW((SolitonModel{SolitonKind::gaussian_cone, 5, 3.0, 1.0}.validate()));
  EXPECT_THROW((SolitonModel{SolitonKind::gaussian_cone, 5, 2.0, 1.0}.validate()), ParameterError);
  EXPECT_THROW((SolitonModel{SolitonKind::bryant, 3, 1.0, 0.5}.validate()), ParameterError);
  EXPECT_THROW((SolitonModel{SolitonKind::round_cylinder, 3, 1.0, -1.0}.validate()), ParameterError);
  EXPECT_THROW((SolitonModel{SolitonKind::custom, 2, 0.0, 0.0}.validate()), ParameterError);
  EXPECT_EQ(to_string(SolitonKind::round_cylinder), "round-cylinder");
}

TEST(WarpedIntegration, ConeTrajectoryMatchesTheExactSolution) {
  for (int n : {3, 5, 8}) {
    for (double lambda : {-1.0, 0.0, 1.0}) {
      const auto res = integrate_warped(gaussian_cone_state(lambda, 1.0), n, n - 2.0, lambda, {1.0, 4.0});
      ASSERT_EQ(res.terminationReason(), TerminationReason::reached_end);
      for (std::size_t k = 0; k < res.size(); ++k) {
        const auto s = res.state(k);
        EXPECT_NEAR(s.F, s.t, 1e-9 * s.t);
        EXPECT_NEAR(s.w, 1.0 / s.t, 1e-9);
        EXPECT_NEAR(s.u0, lambda * s.t, 1e-9);
      }
    }
  }
}

TEST(WarpedIntegration, CylinderStaysPut) {
  const auto res = integrate_warped(round_cylinder_state(1.0, 0.5, 0.0), 3, 1.0, 0.5, {0.0, 3.0});
  ASSERT_EQ(res.terminationReason(), TerminationReason::reached_end);
  const auto end = res.state(res.size() - 1);
  EXPECT_NEAR(end.F, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(end.w, 0.0, 1e-12);
  EXPECT_NEAR(end.u0, 1.5, 1e-12);
  EXPECT_NEAR(res.potential_increment(res.size() - 1), 0.25 * 9.0, 1e-11);
}

TEST(WarpedIntegration, ShrinkingWarpingCollapses) {
  // mu = 0, w = -1, u0 = 0, lambda = 0: F reaches zero in finite time.
  WarpedIntegrationOptions opt;
  opt.collapseThreshold = 1e-6;
  const auto res = integrate_warped({0.0, 1.0, -1.0, 0.0}, 3, 0.0, 0.0, {0.0, 5.0}, opt);
  EXPECT_NE(res.terminationReason(), TerminationReason::reached_end);
}

TEST(WarpedIntegration, RejectsNonpositiveWarping) {
  EXPECT_THROW(integrate_warped({0, 0.0, 0, 0}, 3, 1, 0, {0, 1}), DomainError);
  EXPECT_THROW(integrate_warped({0, 1.0, 0, 0}, 3, std::nan(""), 0, {0, 1}), ParameterError);
}

TEST(WarpedIntegration, ScalingCovariance) {
  // g -> c^2 g: t -> c t, F -> c F, w -> w / c, u0 -> u0 / c, lambda -> lambda / c^2.
  const double c = 2.0, n = 4, mu = 2.0, lambda = 0.3;
  const WarpedSolitonState s{0.0, 1.1, 0.2, -0.4};
  const auto a = integrate_warped(s, n, mu, lambda, {0.0, 1.0});
  const auto b = integrate_warped({0.0, c * s.F, s.w / c, s.u0 / c}, n, mu, lambda / (c * c), {0.0, c});
  const auto ea = a.state(a.size() - 1);
  const auto eb = b.state(b.size() - 1);
  EXPECT_NEAR(eb.F, c * ea.F, 1e-9);
  EXPECT_NEAR(eb.w, ea.w / c, 1e-9);
  EXPECT_NEAR(eb.u0, ea.u0 / c, 1e-9);
}

TEST(WarpedProfileTest, IntegratedConeHasZeroSolitonResidual) {
  const auto res = integrate_warped(gaussian_cone_state(1.0, 1.0), 4, 2.0, 1.0, {1.0, 3.0});
  const auto p = warped_to_profile(res, 0.5);
  EXPECT_LT(soliton_residual(p).maxAbs, 1e-9);
  EXPECT_NEAR(p.f.front(), 0.5, 1e-15);
  EXPECT_NEAR(p.f.back(), 0.5 + 0.5 * (9.0 - 1.0), 1e-9);
}

TEST(WarpedProfileTest, BackwardIntegrationIsStoredInIncreasingOrder) {
  const auto res = integrate_warped(gaussian_cone_state(0.0, 2.0), 3, 1.0, 0.0, {2.0, 1.0});
  const auto p = warped_to_profile(res, 0.0);
  for (std::size_t k = 1; k < p.size(); ++k) EXPECT_GT(p.grid[k], p.grid[k - 1]);
}

// Closed forms of the Bryant coefficients, obtained by order matching with a
// computer algebra system.
TEST(BryantSeriesTest, CoefficientsMatchTheClosedForms) {
  for (int n = 3; n <= 8; ++n) {
    for (double c1 : {-1.0, -0.5, -2.0}) {
      const BryantSeries s(n, c1);
      const double m = n - 1.0;
      const double c3 = c1 / (6 * m);
      const double c5 = c1 * c1 * (13 * n - 10) / (120 * m * m * (n + 2));
      const double c7 = c1 * c1 * c1 * (493.0 * n * n - 678 * n + 200) /
                        (5040 * m * m * m * (n + 2) * (n + 4));
      const double d3 = 2 * c1 * c1 / (3 * (n + 2.0));
      const double d5 = c1 * c1 * c1 * (11 * n - 10) / (15 * m * (n + 2) * (n + 4));
      EXPECT_DOUBLE_EQ(s.f_coefficient(0), 1.0);
      EXPECT_DOUBLE_EQ(s.u0_coefficient(0), c1);
      EXPECT_NEAR(s.f_coefficient(1), c3, 1e-14 * std::abs(c3));
      EXPECT_NEAR(s.f_coefficient(2), c5, 1e-13 * std::abs(c5));
      EXPECT_NEAR(s.f_coefficient(3), c7, 1e-12 * std::abs(c7));
      EXPECT_NEAR(s.u0_coefficient(1), d3, 1e-14 * std::abs(d3));
      EXPECT_NEAR(s.u0_coefficient(2), d5, 1e-13 * std::abs(d5));
    }
  }
}

TEST(BryantSeriesTest, FrozenValuesAtDimensionThree) {
  const BryantSeries s(3, -1.0);
  EXPECT_NEAR(s.f_coefficient(1), -1.0 / 12.0, 1e-16);
  EXPECT_NEAR(s.f_coefficient(2), 29.0 / 2400.0, 1e-16);
  EXPECT_NEAR(s.f_coefficient(3), -2603.0 / 1411200.0, 1e-17);
  EXPECT_NEAR(s.u0_coefficient(1), 2.0 / 15.0, 1e-16);
  EXPECT_NEAR(s.u0_coefficient(2), -23.0 / 1050.0, 1e-16);
}

TEST(BryantSeriesTest, ResidualPolynomialsVanishThroughTheSolvedOrder) {
  for (int n = 3; n <= 7; ++n) {
    const BryantSeries s(n, -1.0, 6);
    const auto r = s.residual_coefficients(10);
    for (std::size_t k = 0; k <= 10; ++k) {
      EXPECT_NEAR(r[0][k], 0.0, 1e-13) << "n=" << n << " k=" << k;
      EXPECT_NEAR(r[1][k], 0.0, 1e-13) << "n=" << n << " k=" << k;
    }
  }
}

TEST(BryantSeriesTest, PotentialIntegratesU0) {
  const BryantSeries s(4, -1.0);
  const double t = 0.2, h = 1e-5;
  EXPECT_NEAR((s.potential(t + h) - s.potential(t - h)) / (2 * h), s.u0(t), 1e-9);
  EXPECT_EQ(s.potential(0.0), 0.0);
}

TEST(BryantSeriesTest, RejectsBadParameters) {
  EXPECT_THROW(BryantSeries(2, -1.0), ParameterError);
  EXPECT_THROW(BryantSeries(3, -1.0, 1), ParameterError);
  EXPECT_THROW(bryant_series_start(3, 0.0), ParameterError);
  EXPECT_THROW(bryant_series_start(3, 0.5), ParameterError);
  EXPECT_THROW(bryant_series_start(3, 1e-3, 1.0), ParameterError);
}

TEST(BryantStart, SmoothClosingAtTheTip) {
  for (int n : {3, 4, 6}) {
    for (double eps : {1e-2, 1e-3}) {
      const auto s = bryant_series_start(n, eps);
      EXPECT_NEAR(s.F, eps, eps * eps);
      EXPECT_NEAR(s.w, 1.0 / eps, 1.0);
      EXPECT_NEAR(s.u0, -eps, eps * eps);
      // Normal and tangential sectional curvatures agree at the tip.
      const auto d = rhs_warped(s, n, n - 2.0, 0.0);
      const double Fpp = (d.w + s.w * s.w) * s.F;
      const auto c = curvature_warped_values(n, n - 2.0, s.F, s.w * s.F, Fpp);
      const double secN = c.secNormal[0];
      EXPECT_NEAR(secN, c.secTangent[0][1], 10 * eps);
      EXPECT_NEAR(c.scalar, n, 0.01);
    }
  }
}

namespace {

WarpedIntegrationResult bryant(int n, double eps, double tEnd) {
  return integrate_warped(bryant_series_start(n, eps), n, n - 2.0, 0.0, {eps, tEnd});
}

}  // namespace

TEST(BryantIntegration, ScalarPositiveAndNonincreasing) {
  for (int n : {3, 4, 5}) {
    const auto res = bryant(n, 1e-3, 50.0);
    ASSERT_EQ(res.terminationReason(), TerminationReason::reached_end) << n;
    const auto p = warped_to_profile(res, 0.0);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double S = curvature_warped(p, k).scalar;
      EXPECT_GT(S, 0.0);
      const double w = p.FPrime[k] / p.F[k];
      const double slack = 1e-12 * (1.0 + p.mu / (p.F[k] * p.F[k]) + (n - 1.0) * (n - 1.0) * w * w);
      EXPECT_LE(S, prev + slack) << "n=" << n << " t=" << p.grid[k];
      prev = S;
    }
    EXPECT_LT(soliton_residual(p).maxAbs, 1e-6);
  }
}

TEST(BryantIntegration, HamiltonQuantityIsConserved) {
  const auto p = warped_to_profile(bryant(3, 1e-3, 50.0), 0.0);
  const auto rep = hamilton_monitor(p);
  EXPECT_LT(rep.hamiltonDrift, 1e-6);
  EXPECT_NEAR(rep.hamilton_value(), 3.0, 1e-5);
}

TEST(BryantIntegration, IndependentOfTheStartingRadius) {
  const auto a = bryant(3, 1e-3, 50.0);
  const auto b = bryant(3, 5e-4, 50.0);
  for (double t : {0.5, 5.0, 50.0}) {
    const auto sa = a.state_at(t);
    const auto sb = b.state_at(t);
    EXPECT_NEAR(sa.F, sb.F, 1e-6 * std::max(1.0, sa.F));
    EXPECT_NEAR(sa.w, sb.w, 1e-6);
    EXPECT_NEAR(sa.u0, sb.u0, 1e-6);
  }
}

TEST(BryantIntegration, AsymptoticallyParabolic) {
  // F grows like sqrt(t) on the Bryant soliton: F^2 / t tends to a constant.
  const auto res = bryant(3, 1e-3, 200.0);
  const double r1 = std::pow(res.state_at(100.0).F, 2) / 100.0;
  const double r2 = std::pow(res.state_at(200.0).F, 2) / 200.0;
  EXPECT_NEAR(r1 / r2, 1.0, 0.05);
}
