#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "soliton_lab/curvature.hpp"
#include "support.hpp"

using namespace soliton_lab;
using namespace soliton_lab::testing;

namespace {

DiagonalProfile single_point(const std::vector<double>& r, const std::vector<double>& q) {
  return diagonal_from(static_cast<int>(r.size()) + 1, {0.0, 1.0}, 0.0, [&](double) {
    Sample s;
    s.h.assign(r.size(), 1.0);
    s.hp = r;
    s.hpp = q;
    return s;
  });
}

}  // namespace

TEST(ShapeTraces, ExponentialWarpingsHaveConstantLogDerivative) {
  const auto p = exponential_profile({1, 1, 1}, {0.0, 0.5, 1.0});
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto td = shape_traces(p, k);
    EXPECT_NEAR(td.A, 3.0, 1e-15);
    EXPECT_NEAR(td.B, 3.0, 1e-15);
    EXPECT_NEAR(td.trLprime, 0.0, 1e-15);
    EXPECT_EQ(td.trL2, td.B);
  }
}

TEST(ShapeTraces, OppositeRatesCancelInTheMeanCurvature) {
  const auto td = shape_traces(single_point({1, -1}, {1, 1}), 0);
  EXPECT_DOUBLE_EQ(td.A, 0.0);
  EXPECT_DOUBLE_EQ(td.B, 2.0);
}

TEST(ShapeTraces, TraceOfLPrime) {
  const auto td = shape_traces(single_point({2, 1}, {5, 2}), 0);
  EXPECT_DOUBLE_EQ(td.trLprime, 2.0);
}

TEST(ShapeTraces, NonPositiveWarpingNamesIndex) {
  auto p = exponential_profile({1, 1}, {0.0, 1.0, 2.0});
  p.h[2][1] = 0.0;
  EXPECT_NO_THROW(shape_traces(p, 1));
  try {
    shape_traces(p, 2);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("index 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("h_2"), std::string::npos) << msg;
  }
  EXPECT_THROW(curvature(p, 2), DomainError);
  EXPECT_THROW(shape_traces(p, 3), ParameterError);
}

TEST(Curvature, HyperbolicSpaceHasConstantCurvatureMinusOne) {
  for (int n = 3; n <= 7; ++n) {
    const auto p = exponential_profile(std::vector<double>(n - 1, 1.0), {-1.0, 0.0, 2.0});
    for (std::size_t k = 0; k < p.size(); ++k) {
      const auto c = curvature(p, k);
      EXPECT_NEAR(c.scalar, -n * (n - 1.0), 10 * 1e-16 * n * n);
      for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(n); ++i) {
        EXPECT_NEAR(c.secNormal[i], -1.0, 1e-15);
        for (std::size_t j = 0; j + 1 < static_cast<std::size_t>(n); ++j)
          if (i != j) { EXPECT_NEAR(c.secTangent[i][j], -1.0, 1e-15); }
        EXPECT_NEAR(c.ricDiag[i], -(n - 1.0), 1e-14);
      }
    }
  }
}

TEST(Curvature, StaticFlatIsFlat) {
  const auto p = exponential_profile({0, 0, 0}, {0.0, 1.0});
  const auto c = curvature(p, 1);
  EXPECT_EQ(c.scalar, 0.0);
  EXPECT_EQ(c.ricNN, 0.0);
  EXPECT_EQ(c.ricNormSq, 0.0);
  for (double v : c.ricDiag) EXPECT_EQ(v, 0.0);
}

TEST(Curvature, TwoRateScalar) {
  const auto p = exponential_profile({1, 2}, {0.0, 0.3});
  EXPECT_NEAR(curvature(p, 0).scalar, -14.0, 1e-13);
  EXPECT_NEAR(curvature(p, 1).scalar, -14.0, 1e-13);
}

TEST(Curvature, ReportIsInternallyConsistent) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    std::vector<double> r(n - 1), q(n - 1);
    for (auto& x : r) x = uniform(rng, -3, 3);
    for (auto& x : q) x = uniform(rng, -5, 5);
    const auto c = curvature(single_point(r, q), 0);
    double sumNormal = 0.0, sumRic = 0.0, sq = c.ricNN * c.ricNN;
    for (std::size_t i = 0; i < r.size(); ++i) {
      sumNormal += c.secNormal[i];
      sumRic += c.ricDiag[i];
      sq += c.ricDiag[i] * c.ricDiag[i];
      for (std::size_t j = 0; j < r.size(); ++j) EXPECT_EQ(c.secTangent[i][j], c.secTangent[j][i]);
    }
    EXPECT_NEAR(c.ricNN, sumNormal, 1e-12);
    EXPECT_NEAR(c.scalar, c.ricNN + sumRic, 1e-12 * (1 + std::abs(c.scalar)));
    EXPECT_NEAR(c.ricNormSq, sq, 1e-12 * (1 + sq));
  }
}

TEST(Curvature, CauchySchwarzOnTraces) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 7);
    std::vector<double> r(m), q(m, 0.0);
    for (auto& x : r) x = uniform(rng, -10, 10);
    const auto td = traces_from_ratios(r, q);
    EXPECT_GE(td.B, 0.0);
    EXPECT_LE(td.A * td.A, m * td.B * (1 + 1e-14));
  }
  const std::vector<double> equal(4, 1.7), zeros(4, 0.0);
  const auto td = traces_from_ratios(equal, zeros);
  EXPECT_NEAR(td.A * td.A, 4 * td.B, 1e-12);
}

TEST(CurvatureWarped, FlatFiberMatchesDiagonal) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 5);
    const double a = uniform(rng, 0.2, 2), b = uniform(rng, -1, 1), c = uniform(rng, -1, 1);
    // F = a exp(b t + c t^2)
    const double t = uniform(rng, -1, 1);
    const double F = a * std::exp(b * t + c * t * t);
    const double g = b + 2 * c * t;
    const double Fp = g * F;
    const double Fpp = (2 * c + g * g) * F;
    const auto w = curvature_warped_values(n, 0.0, F, Fp, Fpp);
    const auto d = curvature(single_point(std::vector<double>(n - 1, Fp / F),
                                          std::vector<double>(n - 1, Fpp / F)),
                             0);
    EXPECT_NEAR(w.scalar, d.scalar, 1e-12 * (1 + std::abs(d.scalar)));
    EXPECT_NEAR(w.ricNN, d.ricNN, 1e-12 * (1 + std::abs(d.ricNN)));
    EXPECT_NEAR(w.ricNormSq, d.ricNormSq, 1e-12 * (1 + d.ricNormSq));
    for (int i = 0; i < n - 1; ++i) {
      EXPECT_NEAR(w.ricDiag[i], d.ricDiag[i], 1e-12 * (1 + std::abs(d.ricDiag[i])));
      EXPECT_NEAR(w.secNormal[i], d.secNormal[i], 1e-12);
      for (int j = 0; j < n - 1; ++j) EXPECT_NEAR(w.secTangent[i][j], d.secTangent[i][j], 1e-12);
    }
  }
}

TEST(CurvatureWarped, CylinderOverUnitFiber) {
  const auto c = curvature_warped_values(3, 1.0, 1.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(c.ricNN, 0.0);
  EXPECT_DOUBLE_EQ(c.ricDiag[0], 1.0);
  EXPECT_DOUBLE_EQ(c.ricDiag[1], 1.0);
  EXPECT_DOUBLE_EQ(c.scalar, 2.0);
}

TEST(CurvatureWarped, ConeOverRoundSphereIsFlat) {
  for (int n = 3; n <= 8; ++n) {
    for (double t : {0.1, 1.0, 7.5}) {
      const auto c = curvature_warped_values(n, n - 2.0, t, 1.0, 0.0);
      EXPECT_NEAR(c.scalar, 0.0, 1e-12);
      EXPECT_NEAR(c.ricNN, 0.0, 1e-12);
      EXPECT_NEAR(c.ricNormSq, 0.0, 1e-20);
      for (int i = 0; i < n - 1; ++i) {
        EXPECT_NEAR(c.secNormal[i], 0.0, 1e-12);
        EXPECT_NEAR(c.ricDiag[i], 0.0, 1e-12);
        for (int j = 0; j < n - 1; ++j) EXPECT_NEAR(c.secTangent[i][j], 0.0, 1e-12);
      }
    }
  }
}

TEST(CurvatureWarped, RejectsNonPositiveF) {
  EXPECT_THROW(curvature_warped_values(3, 1.0, 0.0, 1.0, 0.0), DomainError);
  EXPECT_THROW(curvature_warped_values(3, 1.0, -1.0, 1.0, 0.0), DomainError);
  const auto p = warped_from(3, 1.0, {0.0, 1.0}, 0.0, [](double t) {
    return WarpedSample{t, 1.0, 0.0, 0, 0, 0};
  });
  EXPECT_THROW(curvature_warped(p, 0), DomainError);
  EXPECT_NO_THROW(curvature_warped(p, 1));
}

TEST(Profiles, ValidateRejectsMalformedInput) {
  auto p = exponential_profile({1, 1}, {0.0, 1.0, 2.0});
  EXPECT_NO_THROW(p.validate());
  auto bad = p;
  bad.grid[2] = 1.0;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = p;
  bad.n = 2;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = p;
  bad.h[1].pop_back();
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = p;
  bad.f.pop_back();
  EXPECT_THROW(bad.validate(), ParameterError);
}

// Replacing analytic h', h'' by centred differences perturbs every report
// entry by O(dt^2).
TEST(Curvature, FiniteDifferenceDerivativesConvergeAtSecondOrder) {
  auto hfun = [](int i, double t) {
    return i == 0 ? std::exp(std::sin(t)) : 2.0 + std::cos(1.3 * t);
  };
  auto exact = [&](double t) {
    Sample s;
    const double e = std::exp(std::sin(t));
    s.h = {e, 2.0 + std::cos(1.3 * t)};
    s.hp = {std::cos(t) * e, -1.3 * std::sin(1.3 * t)};
    s.hpp = {(std::cos(t) * std::cos(t) - std::sin(t)) * e, -1.69 * std::cos(1.3 * t)};
    return s;
  };
  auto error_at = [&](double dt) {
    const std::vector<double> pts{0.1, 0.7, 1.9};
    double worst = 0.0;
    for (double t : pts) {
      const auto ex = curvature(diagonal_from(3, {t, t + 1}, 0.0, [&](double) { return exact(t); }), 0);
      Sample s;
      for (int i = 0; i < 2; ++i) {
        const double hm = hfun(i, t - dt), h0 = hfun(i, t), hp = hfun(i, t + dt);
        s.h.push_back(h0);
        s.hp.push_back((hp - hm) / (2 * dt));
        s.hpp.push_back((hp - 2 * h0 + hm) / (dt * dt));
      }
      const auto fd = curvature(diagonal_from(3, {t, t + 1}, 0.0, [&](double) { return s; }), 0);
      worst = std::max(worst, std::abs(fd.scalar - ex.scalar));
      worst = std::max(worst, std::abs(fd.ricNN - ex.ricNN));
      worst = std::max(worst, std::abs(fd.ricNormSq - ex.ricNormSq));
      for (int i = 0; i < 2; ++i) {
        worst = std::max(worst, std::abs(fd.ricDiag[i] - ex.ricDiag[i]));
        worst = std::max(worst, std::abs(fd.secNormal[i] - ex.secNormal[i]));
      }
      worst = std::max(worst, std::abs(fd.secTangent[0][1] - ex.secTangent[0][1]));
    }
    return worst;
  };
  const double e1 = error_at(1e-2);
  const double e2 = error_at(5e-3);
  const double e3 = error_at(2.5e-3);
  EXPECT_GE(std::log2(e1 / e2), 1.9);
  EXPECT_GE(std::log2(e2 / e3), 1.9);
}
