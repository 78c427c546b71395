#pragma once

// Soliton ODEs for g = dt^2 + F(t)^2 g_fiber with Ric_fiber = mu g_fiber.
//
// With L = w Id, w = F'/F and the fiber Ricci term mu / F^2, the normal and
// tangential soliton equations become
//
//   F'  = w F
//   w'  = mu/F^2 - (n-1) w^2 + u0 w - lambda
//   u0' = (n-1) mu/F^2 - (n-1)(n-2) w^2 + (n-1) u0 w - (n-2) lambda
//
// Exact solutions used as gates: the Gaussian cone (F = t, mu = n-2,
// u0 = lambda t), the round cylinder (F^2 = mu/lambda, w = 0, u0 = lambda t)
// and, for mu = 0, the flat system with all u_i = w.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soliton_lab/curvature.hpp"
#include "soliton_lab/errors.hpp"
#include "soliton_lab/integrator.hpp"
#include "soliton_lab/jet.hpp"

namespace soliton_lab {

struct WarpedSolitonState {
  double t = 0.0;
  double F = 1.0;
  double w = 0.0;
  double u0 = 0.0;
};

struct WarpedDerivative {
  double F = 0.0;
  double w = 0.0;
  double u0 = 0.0;
};

enum class SolitonKind { gaussian_cone, round_cylinder, bryant, custom };

inline std::string to_string(SolitonKind k) {
  switch (k) {
    case SolitonKind::gaussian_cone:
      return "gaussian-cone";
    case SolitonKind::round_cylinder:
      return "round-cylinder";
    case SolitonKind::bryant:
      return "bryant";
    case SolitonKind::custom:
      return "custom";
  }
  return "unknown";
}

struct SolitonModel {
  SolitonKind kind = SolitonKind::custom;
  int n = 3;
  double mu = 0.0;
  double lambda = 0.0;

  void validate() const {
    if (n < 3) throw ParameterError("SolitonModel: n must be >= 3");
    switch (kind) {
      case SolitonKind::round_cylinder:
        if (!(lambda > 0.0) || !(mu > 0.0))
          throw ParameterError("round cylinder needs lambda > 0 and mu > 0");
        break;
      case SolitonKind::bryant:
        if (lambda != 0.0 || !(mu > 0.0))
          throw ParameterError("Bryant soliton needs lambda = 0 and mu > 0");
        break;
      case SolitonKind::gaussian_cone:
        if (mu != static_cast<double>(n - 2))
          throw ParameterError("Gaussian cone needs mu = n - 2 (unit round fiber)");
        break;
      case SolitonKind::custom:
        break;
    }
  }
};

template <class T>
std::array<T, 3> warped_rhs(const T& F, const T& w, const T& u0, int n, double mu,
                            double lambda) {
  const double m = static_cast<double>(n - 1);
  const T intrinsic = mu / (F * F);
  std::array<T, 3> d;
  d[0] = w * F;
  d[1] = intrinsic - m * (w * w) + u0 * w - lambda;
  d[2] = m * intrinsic - m * static_cast<double>(n - 2) * (w * w) + m * (u0 * w) -
         static_cast<double>(n - 2) * lambda;
  return d;
}

inline WarpedDerivative rhs_warped(const WarpedSolitonState& s, int n, double mu, double lambda) {
  if (n < 3) throw ParameterError("rhs_warped: n must be >= 3");
  if (!(s.F > 0.0)) throw DomainError("rhs_warped: F must be positive, got " + std::to_string(s.F));
  const auto d = warped_rhs<double>(s.F, s.w, s.u0, n, mu, lambda);
  return {d[0], d[1], d[2]};
}

inline WarpedSolitonState gaussian_cone_state(double lambda, double t) {
  if (!(t > 0.0)) throw DomainError("Gaussian cone is parametrised by t > 0");
  return {t, t, 1.0 / t, lambda * t};
}

inline WarpedSolitonState round_cylinder_state(double mu, double lambda, double t) {
  if (!(mu > 0.0) || !(lambda > 0.0))
    throw ParameterError("round cylinder needs mu > 0 and lambda > 0");
  return {t, std::sqrt(mu / lambda), 0.0, lambda * t};
}

// Power series of a smooth steady soliton closing up at t = 0 over the round
// fiber (mu = n - 2):
//
//   F(t)  = t + p_1 t^3 + p_2 t^5 + ...
//   u0(t) = q_0 t + q_1 t^3 + ...          (q_0 = c1 = f''(0))
//
// The coefficients come from order matching in the polynomial forms
//
//   F F''   = mu - (n-2) F'^2 + u0 F F'
//   F^2 u0' = (n-1) mu - (n-1)(n-2) F'^2 + (n-1) u0 F F'
//
// At order t^(2k) the unknowns are (p_k, q_{k-1}); at k = 1 the system is
// rank one (the dilation freedom), which is why c1 is an input.
class BryantSeries {
 public:
  BryantSeries(int n, double c1, int terms = 6) : n_(n), c1_(c1) {
    if (n < 3) throw ParameterError("BryantSeries: n must be >= 3");
    if (terms < 2) throw ParameterError("BryantSeries: need at least 2 terms");
    p_.assign(static_cast<std::size_t>(terms), 0.0);
    q_.assign(static_cast<std::size_t>(terms), 0.0);
    p_[0] = 1.0;
    q_[0] = c1;
    solve(terms);
  }

  double c1() const { return c1_; }
  // Coefficient of t^(2k+1) in F and u0.
  double f_coefficient(std::size_t k) const { return p_.at(k); }
  double u0_coefficient(std::size_t k) const { return q_.at(k); }

  double F(double t) const { return odd_series(p_, t); }
  double FPrime(double t) const {
    double s = 0.0;
    for (std::size_t k = p_.size(); k-- > 0;) s = s * t * t + static_cast<double>(2 * k + 1) * p_[k];
    return s;
  }
  double u0(double t) const { return odd_series(q_, t); }
  // f(t) - f(0)
  double potential(double t) const {
    double s = 0.0;
    for (std::size_t k = q_.size(); k-- > 0;) s = s * t * t + q_[k] / static_cast<double>(2 * k + 2);
    return s * t * t;
  }

  // Residual polynomial coefficients (index = power of t) of the two
  // polynomial equations, truncated to `order`.
  std::array<std::vector<double>, 2> residual_coefficients(std::size_t order) const {
    return residuals(p_, q_, order);
  }

 private:
  static double odd_series(const std::vector<double>& c, double t) {
    double s = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) s = s * t * t + c[k];
    return s * t;
  }

  // Dense coefficient vectors in powers of t from the odd coefficient lists.
  static std::vector<double> expand_odd(const std::vector<double>& c, std::size_t order) {
    std::vector<double> out(order + 1, 0.0);
    for (std::size_t k = 0; k < c.size() && 2 * k + 1 <= order; ++k) out[2 * k + 1] = c[k];
    return out;
  }
  static std::vector<double> derivative(const std::vector<double>& a) {
    std::vector<double> out(a.size(), 0.0);
    for (std::size_t k = 1; k < a.size(); ++k) out[k - 1] = static_cast<double>(k) * a[k];
    return out;
  }
  static std::vector<double> product(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; i + j < out.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  }

  std::array<std::vector<double>, 2> residuals(const std::vector<double>& p,
                                               const std::vector<double>& q,
                                               std::size_t order) const {
    const double mu = static_cast<double>(n_ - 2);
    const double m = static_cast<double>(n_ - 1);
    const auto F = expand_odd(p, order + 2);
    const auto u = expand_odd(q, order + 2);
    const auto Fp = derivative(F);
    const auto Fpp = derivative(Fp);
    const auto up = derivative(u);
    const auto FFp = product(F, Fp);
    const auto Fp2 = product(Fp, Fp);
    const auto uFFp = product(u, FFp);
    const auto FFpp = product(F, Fpp);
    const auto F2up = product(product(F, F), up);
    std::array<std::vector<double>, 2> r{std::vector<double>(order + 1, 0.0),
                                         std::vector<double>(order + 1, 0.0)};
    for (std::size_t k = 0; k <= order; ++k) {
      const double constant = k == 0 ? 1.0 : 0.0;
      r[0][k] = FFpp[k] - (mu * constant - static_cast<double>(n_ - 2) * Fp2[k] + uFFp[k]);
      r[1][k] = F2up[k] - (m * mu * constant - m * static_cast<double>(n_ - 2) * Fp2[k] +
                           m * uFFp[k]);
    }
    return r;
  }

  void solve(int terms) {
    for (std::size_t k = 1; k < static_cast<std::size_t>(terms); ++k) {
      const std::size_t order = 2 * k;
      // Residuals at this order are affine in (p_k, q_{k-1}) once lower
      // coefficients are fixed; probe the affine map.
      auto probe = [&](double pk, double qk) {
        auto p = p_;
        auto q = q_;
        p[k] = pk;
        if (k >= 2) q[k - 1] = qk;
        const auto r = residuals(p, q, order);
        return std::array<double, 2>{r[0][order], r[1][order]};
      };
      const auto r00 = probe(0.0, 0.0);
      const auto r10 = probe(1.0, 0.0);
      if (k == 1) {
        // q_0 = c1 is fixed: both equations must agree on p_1.
        const double a0 = r10[0] - r00[0];
        const double a1 = r10[1] - r00[1];
        if (a0 == 0.0) throw InternalError("BryantSeries: degenerate first order");
        const double p1 = -r00[0] / a0;
        const double check = r00[1] + a1 * p1;
        const double scale = std::abs(r00[1]) + std::abs(a1 * p1) + 1.0;
        if (std::abs(check) > 1e-12 * scale) {
          throw InternalError("BryantSeries: inconsistent order matching at t^2");
        }
        p_[1] = p1;
        continue;
      }
      const auto r01 = probe(0.0, 1.0);
      const double m00 = r10[0] - r00[0], m01 = r01[0] - r00[0];
      const double m10 = r10[1] - r00[1], m11 = r01[1] - r00[1];
      const double det = m00 * m11 - m01 * m10;
      if (det == 0.0) throw InternalError("BryantSeries: singular order-matching system");
      p_[k] = (-r00[0] * m11 + r00[1] * m01) / det;
      q_[k - 1] = (-r00[1] * m00 + r00[0] * m10) / det;
    }
  }

  int n_;
  double c1_;
  std::vector<double> p_;
  std::vector<double> q_;
};

// Series launch for the Bryant soliton at t = epsilon (lambda = 0, mu = n - 2).
// c1 = f''(0) < 0 fixes the dilation; the default c1 = -1 gives S(0) = n.
inline WarpedSolitonState bryant_series_start(int n, double epsilon = 1e-3, double c1 = -1.0) {
  if (n < 3) throw ParameterError("bryant_series_start: n must be >= 3");
  if (!(epsilon > 0.0) || !(epsilon < 0.1))
    throw ParameterError("bryant_series_start: epsilon must lie in (0, 0.1)");
  if (!(c1 < 0.0)) throw ParameterError("bryant_series_start: c1 = f''(0) must be negative");
  const BryantSeries series(n, c1);
  const double F = series.F(epsilon);
  return {epsilon, F, series.FPrime(epsilon) / F, series.u0(epsilon)};
}

struct WarpedIntegrationOptions {
  Tolerances tol;
  double blowupThreshold = 1e8;
  double collapseThreshold = 1e-12;
  std::vector<double> outputTimes;
  bool recordOnlyOutputs = false;
};

// State vector [F, w, u0, f - f(t0)].
struct WarpedIntegrationResult {
  int n = 0;
  double mu = 0.0;
  double lambda = 0.0;
  Trajectory trajectory;

  std::size_t size() const { return trajectory.size(); }
  TerminationReason terminationReason() const { return trajectory.reason; }
  std::optional<double> blowupEstimate() const { return trajectory.blowupEstimate; }
  WarpedSolitonState state(std::size_t k) const {
    const auto& y = trajectory.y.at(k);
    return {trajectory.t[k], y[0], y[1], y[2]};
  }
  WarpedDerivative derivative(std::size_t k) const {
    const auto& d = trajectory.dy.at(k);
    return {d[0], d[1], d[2]};
  }
  double potential_increment(std::size_t k) const { return trajectory.y.at(k)[3]; }
  WarpedSolitonState state_at(double t) const {
    const auto y = trajectory.interpolate(t);
    return {t, y[0], y[1], y[2]};
  }
};

inline WarpedIntegrationResult integrate_warped(const WarpedSolitonState& initial, int n,
                                                double mu, double lambda, TimeSpan span,
                                                const WarpedIntegrationOptions& options = {}) {
  if (n < 3) throw ParameterError("integrate_warped: n must be >= 3");
  if (!(initial.F > 0.0)) throw DomainError("integrate_warped: initial F must be positive");
  if (!std::isfinite(mu) || !std::isfinite(lambda))
    throw ParameterError("integrate_warped: mu and lambda must be finite");
  IntegratorOptions opt;
  opt.tol = options.tol;
  opt.blowupThreshold = options.blowupThreshold;
  opt.monitored = {1, 2};
  opt.outputTimes = options.outputTimes;
  opt.recordOnlyOutputs = options.recordOnlyOutputs;
  const double floorF = options.collapseThreshold;
  opt.collapsed = [floorF](std::span<const double> y) { return !(y[0] > floorF); };

  auto f = [&](double, std::span<const double> y, std::span<double> dy) {
    const auto d = warped_rhs<double>(y[0], y[1], y[2], n, mu, lambda);
    dy[0] = d[0];
    dy[1] = d[1];
    dy[2] = d[2];
    dy[3] = y[2];
  };
  WarpedIntegrationResult res;
  res.n = n;
  res.mu = mu;
  res.lambda = lambda;
  res.trajectory =
      integrate_adaptive(f, span, {initial.F, initial.w, initial.u0, 0.0}, opt);
  return res;
}

// F is a state variable; F' = w F, F'' = (w' + w^2) F, f = f0 + int u0, f'' = u0'.
inline WarpedProfile warped_to_profile(const WarpedIntegrationResult& result, double f0) {
  if (result.size() == 0) throw ParameterError("warped_to_profile: empty integration result");
  WarpedProfile p;
  p.n = result.n;
  p.mu = result.mu;
  p.lambda = result.lambda;
  p.provenance = "integrate-warped";
  const std::size_t count = result.size();
  const bool reversed = result.trajectory.direction() < 0;
  p.grid.resize(count);
  p.F.resize(count);
  p.FPrime.resize(count);
  p.FDoublePrime.resize(count);
  p.f.resize(count);
  p.fPrime.resize(count);
  p.fDoublePrime.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t src = reversed ? count - 1 - k : k;
    const auto s = result.state(src);
    const auto d = result.derivative(src);
    p.grid[k] = s.t;
    p.F[k] = s.F;
    p.FPrime[k] = s.w * s.F;
    p.FDoublePrime[k] = (d.w + s.w * s.w) * s.F;
    p.f[k] = f0 + result.potential_increment(src);
    p.fPrime[k] = s.u0;
    p.fDoublePrime[k] = d.u0;
  }
  return p;
}

// Scalar curvature of the warped metric as a function of the state, with
// F''/F = w' + w^2 taken from the right-hand side.
template <class T>
T warped_scalar(const T& F, const T& w, const T& u0, int n, double mu, double lambda) {
  const auto d = warped_rhs<T>(F, w, u0, n, mu, lambda);
  const double m = static_cast<double>(n - 1);
  const T q = d[1] + w * w;
  const T ricNN = -m * q;
  return 2.0 * ricNN + m * (mu / (F * F)) - m * static_cast<double>(n - 2) * (w * w);
}

template <class T>
T warped_ricci_norm_sq(const T& F, const T& w, const T& u0, int n, double mu, double lambda) {
  const auto d = warped_rhs<T>(F, w, u0, n, mu, lambda);
  const double m = static_cast<double>(n - 1);
  const T q = d[1] + w * w;
  const T ricNN = -m * q;
  const T ricFiber = mu / (F * F) - static_cast<double>(n - 2) * (w * w) - q;
  return ricNN * ricNN + m * (ricFiber * ricFiber);
}

}  // namespace soliton_lab
