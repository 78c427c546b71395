#pragma once

// Steady (lambda = 0) flat-fiber solitons in closed form.
//
// With lambda = 0 every u_j is a fixed multiple of one function h:
// u_j = a_j h, and l = u0 - a h satisfies
//
//   h' = l h,   l' = b h^2,   b h^2 = l^2 + C,   l' = l^2 + C,
//
// with a = sum a_j, b = sum a_j^2. Normalising h(t0) = 1 makes a_j = u_j(t0).
//
// Branches of l' = l^2 + C through (t0, l0):
//   C = 0:            l = -1/(t + C1)                     (rational)
//   C = D^2 > 0:      l = D tan(D t + D1)                 (tangent)
//   C = -D^2 < 0:     |l0| > D  l = -D coth(D (t - tp))   (one pole)
//                     |l0| < D  l = -D tanh(D (t - tp))   (global, no real h)
//                     |l0| = D  l = l0                     (constant)
// and b = 0 always lands on the constant branch l = l0.
//
// In the exponential parametrisation E = exp(2 D t), D1 = exp(2 D tp), the
// cotangent branch reads l = -D (E + D1) / (E - D1) and
// h = +-2 D sqrt(D1) exp(D t) / (sqrt(b) (E - D1)). The form with the opposite
// sign on l (and h = +-4 D1 D^2 E / (sqrt(b) (E - D1))) is kept as
// SteadyForm::printed_verbatim; it solves l' = D^2 - l^2 and fails the residual
// oracle below.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soliton_lab/curvature.hpp"
#include "soliton_lab/errors.hpp"
#include "soliton_lab/flat_ode.hpp"

namespace soliton_lab {

struct RiccatiReduction {
  std::vector<double> a;
  double aSum = 0.0;
  double b = 0.0;
  double h0 = 1.0;
  double l0 = 0.0;
  double C = 0.0;
};

// Build a reduction from the proportionality constants and l0; C is fixed by
// the algebraic constraint at t0.
inline RiccatiReduction make_reduction(std::vector<double> a, double l0, double h0 = 1.0) {
  if (!(h0 != 0.0) || !std::isfinite(h0)) throw ParameterError("reduction: h0 must be nonzero");
  RiccatiReduction red;
  red.a = std::move(a);
  for (double x : red.a) {
    red.aSum += x;
    red.b += x * x;
  }
  red.h0 = h0;
  red.l0 = l0;
  red.C = red.b * h0 * h0 - l0 * l0;
  return red;
}

// Reduction of steady initial data with the normalisation h(t0) = 1.
inline RiccatiReduction reduce(const FlatSolitonState& initial) {
  double aSum = 0.0;
  for (double x : initial.u) aSum += x;
  return make_reduction(initial.u, initial.u0 - aSum, 1.0);
}

enum class RiccatiCase { c_zero, c_positive, c_negative };
enum class RiccatiBranch {
  constant,
  rational,
  tangent,
  hyperbolic_cotangent,
  hyperbolic_tangent,
  printed_verbatim
};
enum class SteadyForm { oracle_fitted, printed_verbatim };

inline std::string to_string(RiccatiCase c) {
  switch (c) {
    case RiccatiCase::c_zero:
      return "C-zero";
    case RiccatiCase::c_positive:
      return "C-positive";
    case RiccatiCase::c_negative:
      return "C-negative";
  }
  return "unknown";
}

inline std::string to_string(RiccatiBranch b) {
  switch (b) {
    case RiccatiBranch::constant:
      return "constant";
    case RiccatiBranch::rational:
      return "rational";
    case RiccatiBranch::tangent:
      return "tan";
    case RiccatiBranch::hyperbolic_cotangent:
      return "coth";
    case RiccatiBranch::hyperbolic_tangent:
      return "tanh";
    case RiccatiBranch::printed_verbatim:
      return "printed-verbatim";
  }
  return "unknown";
}

struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool contains(double t) const { return t > lower && t < upper; }
};

// Scalar solution of l' = l^2 + C through (t0, l0).
struct RiccatiCurve {
  RiccatiBranch branch = RiccatiBranch::constant;
  double C = 0.0;
  double t0 = 0.0;
  double l0 = 0.0;
  double C1 = 0.0;    // rational
  double D = 0.0;     // sqrt|C|
  double D1 = 0.0;    // tangent phase, or exp(2 D tp) for the exponential forms
  double tPole = 0.0; // centre of coth/tanh (tp)
  Interval domain;
  std::optional<double> poleBackward;
  std::optional<double> poleForward;

  double l(double t) const {
    switch (branch) {
      case RiccatiBranch::constant:
        return l0;
      case RiccatiBranch::rational:
        return -1.0 / (t + C1);
      case RiccatiBranch::tangent:
        return D * std::tan(D * t + D1);
      case RiccatiBranch::hyperbolic_cotangent:
        return -D / std::tanh(D * (t - tPole));
      case RiccatiBranch::hyperbolic_tangent:
        return -D * std::tanh(D * (t - tPole));
      case RiccatiBranch::printed_verbatim: {
        // D (E + D1) / (E - D1) with E = exp(2 D t), written overflow-free.
        const double r = D1 * std::exp(-2.0 * D * t);
        return D * (1.0 + r) / (1.0 - r);
      }
    }
    return 0.0;
  }

  double lPrime(double t) const {
    switch (branch) {
      case RiccatiBranch::constant:
        return 0.0;
      case RiccatiBranch::rational: {
        const double s = t + C1;
        return 1.0 / (s * s);
      }
      case RiccatiBranch::tangent: {
        const double c = std::cos(D * t + D1);
        return D * D / (c * c);
      }
      case RiccatiBranch::hyperbolic_cotangent: {
        const double s = std::sinh(D * (t - tPole));
        return D * D / (s * s);
      }
      case RiccatiBranch::hyperbolic_tangent: {
        const double c = std::cosh(D * (t - tPole));
        return -D * D / (c * c);
      }
      case RiccatiBranch::printed_verbatim: {
        // -4 D^2 D1 E / (E - D1)^2
        const double r = D1 * std::exp(-2.0 * D * t);
        return -4.0 * D * D * r / ((1.0 - r) * (1.0 - r));
      }
    }
    return 0.0;
  }

  // Integral of l from t0 to t.
  double integral(double t) const {
    switch (branch) {
      case RiccatiBranch::constant:
        return l0 * (t - t0);
      case RiccatiBranch::rational:
        return -std::log(std::abs((t + C1) / (t0 + C1)));
      case RiccatiBranch::tangent:
        return -std::log(std::cos(D * t + D1) / std::cos(D * t0 + D1));
      case RiccatiBranch::hyperbolic_cotangent:
        return -std::log(std::abs(std::sinh(D * (t - tPole)) / std::sinh(D * (t0 - tPole))));
      case RiccatiBranch::hyperbolic_tangent:
        return -std::log(std::cosh(D * (t - tPole)) / std::cosh(D * (t0 - tPole)));
      case RiccatiBranch::printed_verbatim:
        break;
    }
    throw ParameterError("integral of l is not provided for the printed-verbatim form");
  }
};

inline RiccatiCurve fit_riccati(double l0, double C, double t0) {
  if (!std::isfinite(l0) || !std::isfinite(C) || !std::isfinite(t0))
    throw ParameterError("fit_riccati: non-finite input");
  constexpr double halfPi = std::numbers::pi / 2.0;
  RiccatiCurve c;
  c.C = C;
  c.t0 = t0;
  c.l0 = l0;
  if (C == 0.0) {
    if (l0 == 0.0) {
      c.branch = RiccatiBranch::constant;
      return c;
    }
    c.branch = RiccatiBranch::rational;
    c.C1 = -1.0 / l0 - t0;
    const double pole = -c.C1;
    if (t0 > pole) {
      c.domain = {pole, std::numeric_limits<double>::infinity()};
      c.poleBackward = pole;
    } else {
      c.domain = {-std::numeric_limits<double>::infinity(), pole};
      c.poleForward = pole;
    }
    return c;
  }
  if (C > 0.0) {
    c.branch = RiccatiBranch::tangent;
    c.D = std::sqrt(C);
    c.D1 = std::atan(l0 / c.D) - c.D * t0;
    c.domain = {(-halfPi - c.D1) / c.D, (halfPi - c.D1) / c.D};
    c.poleBackward = c.domain.lower;
    c.poleForward = c.domain.upper;
    return c;
  }
  c.D = std::sqrt(-C);
  const double al = std::abs(l0);
  if (al == c.D) {
    c.branch = RiccatiBranch::constant;
    return c;
  }
  if (al > c.D) {
    c.branch = RiccatiBranch::hyperbolic_cotangent;
    c.tPole = t0 - std::atanh(-c.D / l0) / c.D;
    c.D1 = std::exp(2.0 * c.D * c.tPole);
    if (t0 > c.tPole) {
      c.domain = {c.tPole, std::numeric_limits<double>::infinity()};
      c.poleBackward = c.tPole;
    } else {
      c.domain = {-std::numeric_limits<double>::infinity(), c.tPole};
      c.poleForward = c.tPole;
    }
    return c;
  }
  c.branch = RiccatiBranch::hyperbolic_tangent;
  c.tPole = t0 - std::atanh(-l0 / c.D) / c.D;
  c.D1 = -std::exp(2.0 * c.D * c.tPole);
  return c;
}

// The printed exponential form fitted through (t0, l0); only meaningful for C < 0.
inline RiccatiCurve fit_printed_verbatim(double l0, double C, double t0) {
  if (!(C < 0.0)) throw ParameterError("printed-verbatim form exists only for C < 0");
  RiccatiCurve c;
  c.branch = RiccatiBranch::printed_verbatim;
  c.C = C;
  c.t0 = t0;
  c.l0 = l0;
  c.D = std::sqrt(-C);
  if (l0 == -c.D) throw ParameterError("printed-verbatim form cannot pass through l0 = -D");
  c.D1 = std::exp(2.0 * c.D * t0) * (l0 - c.D) / (l0 + c.D);
  if (c.D1 > 0.0) {
    c.tPole = std::log(c.D1) / (2.0 * c.D);
    if (t0 > c.tPole) {
      c.domain = {c.tPole, std::numeric_limits<double>::infinity()};
      c.poleBackward = c.tPole;
    } else {
      c.domain = {-std::numeric_limits<double>::infinity(), c.tPole};
      c.poleForward = c.tPole;
    }
  }
  return c;
}

struct ClosedFormSteady {
  RiccatiCase caseTag = RiccatiCase::c_zero;
  RiccatiCurve curve;
  SteadyForm form = SteadyForm::oracle_fitted;
  int signChoice = 1;
  double b = 0.0;
  double aSum = 0.0;
  double h0 = 1.0;
  double amplitude = 0.0;  // numerator of h in the pole branches

  double t0() const { return curve.t0; }
  const Interval& domain() const { return curve.domain; }
  double l(double t) const { return curve.l(t); }
  double lPrime(double t) const { return curve.lPrime(t); }

  double h(double t) const {
    switch (curve.branch) {
      case RiccatiBranch::constant:
        return h0 * std::exp(curve.l0 * (t - curve.t0));
      case RiccatiBranch::rational:
        return amplitude / (t + curve.C1);
      case RiccatiBranch::tangent:
        return amplitude / std::cos(curve.D * t + curve.D1);
      case RiccatiBranch::hyperbolic_cotangent:
        return amplitude / std::sinh(curve.D * (t - curve.tPole));
      case RiccatiBranch::printed_verbatim: {
        // amplitude * E / (E - D1)
        const double r = curve.D1 * std::exp(-2.0 * curve.D * t);
        return amplitude / (1.0 - r);
      }
      case RiccatiBranch::hyperbolic_tangent:
        break;
    }
    throw InternalError("h requested on a branch without a real amplitude");
  }

  double hPrime(double t) const {
    switch (curve.branch) {
      case RiccatiBranch::constant:
        return curve.l0 * h(t);
      case RiccatiBranch::rational: {
        const double s = t + curve.C1;
        return -amplitude / (s * s);
      }
      case RiccatiBranch::tangent: {
        const double th = curve.D * t + curve.D1;
        const double c = std::cos(th);
        return amplitude * curve.D * std::sin(th) / (c * c);
      }
      case RiccatiBranch::hyperbolic_cotangent: {
        const double x = curve.D * (t - curve.tPole);
        const double s = std::sinh(x);
        return -amplitude * curve.D * std::cosh(x) / (s * s);
      }
      case RiccatiBranch::printed_verbatim: {
        // -2 K D D1 E / (E - D1)^2
        const double r = curve.D1 * std::exp(-2.0 * curve.D * t);
        return -2.0 * amplitude * curve.D * r / ((1.0 - r) * (1.0 - r));
      }
      case RiccatiBranch::hyperbolic_tangent:
        break;
    }
    throw InternalError("h' requested on a branch without a real amplitude");
  }

  // Integral of h from t0 to t.
  double integralH(double t) const {
    const double tau = t - curve.t0;
    switch (curve.branch) {
      case RiccatiBranch::constant:
        return curve.l0 == 0.0 ? h0 * tau : h0 * std::expm1(curve.l0 * tau) / curve.l0;
      case RiccatiBranch::rational:
        return amplitude * std::log(std::abs((t + curve.C1) / (curve.t0 + curve.C1)));
      case RiccatiBranch::tangent: {
        const auto g = [&](double s) {
          const double th = curve.D * s + curve.D1;
          return std::log((1.0 + std::sin(th)) / std::cos(th));
        };
        return amplitude / curve.D * (g(t) - g(curve.t0));
      }
      case RiccatiBranch::hyperbolic_cotangent: {
        const auto g = [&](double s) {
          return std::log(std::abs(std::tanh(0.5 * curve.D * (s - curve.tPole))));
        };
        return amplitude / curve.D * (g(t) - g(curve.t0));
      }
      case RiccatiBranch::printed_verbatim:
      case RiccatiBranch::hyperbolic_tangent:
        break;
    }
    throw ParameterError("integral of h is not provided for this branch");
  }

  double u0(double t) const { return l(t) + aSum * h(t); }
};

// Closed-form steady solution through the reduction's initial data at t0.
inline ClosedFormSteady solve_riccati(const RiccatiReduction& red, double t0,
                                      SteadyForm form = SteadyForm::oracle_fitted) {
  if (!(red.b >= 0.0)) throw ParameterError("solve_riccati: b must be nonnegative");
  if (!(red.h0 != 0.0)) throw ParameterError("solve_riccati: h0 must be nonzero");
  const double scale = std::max({1.0, red.b * red.h0 * red.h0, red.l0 * red.l0});
  if (std::abs(red.b * red.h0 * red.h0 - red.l0 * red.l0 - red.C) > 1e-12 * scale) {
    throw ParameterError("solve_riccati: C is inconsistent with b h0^2 - l0^2");
  }
  ClosedFormSteady sol;
  sol.form = form;
  sol.b = red.b;
  sol.aSum = red.aSum;
  sol.h0 = red.h0;
  sol.caseTag = red.C == 0.0  ? RiccatiCase::c_zero
                : red.C > 0.0 ? RiccatiCase::c_positive
                              : RiccatiCase::c_negative;
  const double hSign = red.h0 > 0.0 ? 1.0 : -1.0;

  if (form == SteadyForm::printed_verbatim) {
    if (red.b == 0.0) throw ParameterError("printed-verbatim form needs b > 0");
    sol.curve = fit_printed_verbatim(red.l0, red.C, t0);
    const double D = sol.curve.D;
    const double D1 = sol.curve.D1;
    const double r0 = D1 * std::exp(-2.0 * D * t0);
    // h = +-4 D1 D^2 E / (sqrt(b) (E - D1)), sign matched to h0 at t0.
    const double base = 4.0 * D1 * D * D / std::sqrt(red.b);
    sol.signChoice = (base / (1.0 - r0)) * hSign >= 0.0 ? 1 : -1;
    sol.amplitude = sol.signChoice * base;
    return sol;
  }

  if (red.b == 0.0) {
    // Every u_j vanishes: l' = 0, u0 constant, h only has to satisfy h' = l h.
    sol.curve = RiccatiCurve{};
    sol.curve.branch = RiccatiBranch::constant;
    sol.curve.C = red.C;
    sol.curve.t0 = t0;
    sol.curve.l0 = red.l0;
    sol.curve.D = std::abs(red.l0);
    sol.signChoice = static_cast<int>(hSign);
    return sol;
  }

  sol.curve = fit_riccati(red.l0, red.C, t0);
  const double rootB = std::sqrt(red.b);
  switch (sol.curve.branch) {
    case RiccatiBranch::rational: {
      // h = +-1 / (sqrt(b) (t + C1))
      const double s = hSign * ((t0 + sol.curve.C1) > 0.0 ? 1.0 : -1.0);
      sol.signChoice = static_cast<int>(s);
      sol.amplitude = s / rootB;
      break;
    }
    case RiccatiBranch::tangent: {
      // h = +-D / (sqrt(b) cos(D t + D1)), cos > 0 on the domain
      sol.signChoice = static_cast<int>(hSign);
      sol.amplitude = hSign * sol.curve.D / rootB;
      break;
    }
    case RiccatiBranch::hyperbolic_cotangent: {
      // h = +-D / (sqrt(b) sinh(D (t - tp)))
      const double s = hSign * ((t0 - sol.curve.tPole) > 0.0 ? 1.0 : -1.0);
      sol.signChoice = static_cast<int>(s);
      sol.amplitude = s * sol.curve.D / rootB;
      break;
    }
    case RiccatiBranch::constant:
      throw ParameterError("solve_riccati: |l0| = sqrt(-C) with b > 0 forces h0 = 0");
    case RiccatiBranch::hyperbolic_tangent:
      throw ParameterError("solve_riccati: |l0| < sqrt(-C) admits no real h (b h^2 < 0)");
    case RiccatiBranch::printed_verbatim:
      throw InternalError("solve_riccati: unexpected branch");
  }
  return sol;
}

struct ClosedFormResidual {
  double maxRiccati = 0.0;
  double maxAlgebraic = 0.0;
  double maxLogDeriv = 0.0;
  double maxAbs() const { return std::max({maxRiccati, maxAlgebraic, maxLogDeriv}); }
};

// Residuals of l' = l^2 + C, b h^2 = l^2 + C and h' = l h on a grid inside
// the solution's domain, using the reduction's b and C.
inline ClosedFormResidual residual_closed_form(const ClosedFormSteady& sol,
                                               const RiccatiReduction& red,
                                               std::span<const double> grid) {
  ClosedFormResidual r;
  for (double t : grid) {
    if (!sol.domain().contains(t)) {
      throw DomainError("residual_closed_form: t = " + std::to_string(t) +
                        " lies outside the solution domain");
    }
    const double l = sol.l(t);
    const double h = sol.h(t);
    r.maxRiccati = std::max(r.maxRiccati, std::abs(sol.lPrime(t) - l * l - red.C));
    r.maxAlgebraic = std::max(r.maxAlgebraic, std::abs(red.b * h * h - l * l - red.C));
    r.maxLogDeriv = std::max(r.maxLogDeriv, std::abs(sol.hPrime(t) - l * h));
  }
  return r;
}

// Nearest pole of l from t0 in the given direction (+1 forward, -1 backward).
inline std::optional<double> blowup_time(const ClosedFormSteady& sol, int direction) {
  if (direction != 1 && direction != -1) throw ParameterError("blowup_time: direction must be +-1");
  return direction > 0 ? sol.curve.poleForward : sol.curve.poleBackward;
}

// Evenly spaced points covering the central `fraction` of the domain. Infinite
// ends are replaced by t0 +- `reach`.
inline std::vector<double> interior_grid(const ClosedFormSteady& sol, std::size_t count,
                                         double fraction = 0.9, double reach = 10.0) {
  if (count < 2) throw ParameterError("interior_grid: need at least 2 points");
  double lo = std::isfinite(sol.domain().lower) ? sol.domain().lower : sol.t0() - reach;
  double hi = std::isfinite(sol.domain().upper) ? sol.domain().upper : sol.t0() + reach;
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo) * fraction;
  lo = mid - half;
  hi = mid + half;
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k) {
    g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  return g;
}

// Diagonal profile generated by a closed-form steady solution:
//   u_i = a_i h,  h_i = h0_i exp(a_i int h),  f = f0 + int l + a int h.
inline DiagonalProfile steady_profile(const ClosedFormSteady& sol, const RiccatiReduction& red,
                                      std::span<const double> grid,
                                      std::span<const double> hInitial, double f0) {
  if (sol.form != SteadyForm::oracle_fitted)
    throw ParameterError("steady_profile: only oracle-fitted solutions generate profiles");
  const std::size_t m = red.a.size();
  if (hInitial.size() != m) throw ParameterError("steady_profile: need one h0 per fiber direction");
  DiagonalProfile p;
  p.n = static_cast<int>(m) + 1;
  p.lambda = 0.0;
  p.provenance = "closed-form " + to_string(sol.caseTag) + " (" + to_string(sol.curve.branch) + ")";
  p.grid.assign(grid.begin(), grid.end());
  p.h.assign(grid.size(), std::vector<double>(m));
  p.hPrime = p.h;
  p.hDoublePrime = p.h;
  p.f.resize(grid.size());
  p.fPrime.resize(grid.size());
  p.fDoublePrime.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    if (!sol.domain().contains(t)) {
      throw DomainError("steady_profile: t = " + std::to_string(t) + " outside the domain");
    }
    const double h = sol.h(t);
    const double hp = sol.hPrime(t);
    const double H = sol.integralH(t);
    for (std::size_t i = 0; i < m; ++i) {
      const double hi = hInitial[i] * std::exp(red.a[i] * H);
      const double ui = red.a[i] * h;
      p.h[k][i] = hi;
      p.hPrime[k][i] = ui * hi;
      p.hDoublePrime[k][i] = (red.a[i] * hp + ui * ui) * hi;
    }
    p.f[k] = f0 + sol.curve.integral(t) + red.aSum * H;
    p.fPrime[k] = sol.l(t) + red.aSum * h;
    p.fDoublePrime[k] = sol.lPrime(t) + red.aSum * hp;
  }
  p.validate();
  return p;
}

}  // namespace soliton_lab
