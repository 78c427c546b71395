#pragma once

// First-order soliton system for flat level sets g = dt^2 + sum h_i^2 dx_i^2.
//
//   u0 = f',  u_i = h_i'/h_i,  A = sum u_i,  B = sum u_i^2
//   u_j' = (u0 - A) u_j - lambda
//   u0'  = B + (u0 - A) A - k lambda,   k = n - 2 (corrected) or n - 1 (as printed)

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "soliton_lab/convention.hpp"
#include "soliton_lab/curvature.hpp"
#include "soliton_lab/errors.hpp"
#include "soliton_lab/integrator.hpp"

namespace soliton_lab {

struct FlatSolitonState {
  double t = 0.0;
  double u0 = 0.0;
  std::vector<double> u;

  double A() const {
    double a = 0.0;
    for (double x : u) a += x;
    return a;
  }
  double B() const {
    double b = 0.0;
    for (double x : u) b += x * x;
    return b;
  }
};

struct FlatStateDerivative {
  double u0 = 0.0;
  std::vector<double> u;
};

// Right-hand side on raw arrays; T is double or Jet2.
template <class T>
void flat_rhs(const T& u0, std::span<const T> u, double lambda, int n,
              CoefficientConvention convention, T& du0, std::span<T> du) {
  T A = 0.0;
  T B = 0.0;
  for (const T& x : u) {
    A += x;
    B += x * x;
  }
  const T drift = u0 - A;
  for (std::size_t j = 0; j < u.size(); ++j) {
    // Identically-zero components stay exactly zero in the steady case.
    if constexpr (std::is_same_v<T, double>) {
      if (lambda == 0.0 && u[j] == 0.0) {
        du[j] = 0.0;
        continue;
      }
    }
    du[j] = drift * u[j] - lambda;
  }
  du0 = B + drift * A - static_cast<double>(lambda_coefficient(convention, n)) * lambda;
}

inline void check_flat_dims(int n, std::size_t components) {
  if (n < 3) throw ParameterError("flat system needs n >= 3, got " + std::to_string(n));
  if (components != static_cast<std::size_t>(n - 1)) {
    throw ParameterError("flat state must have n - 1 = " + std::to_string(n - 1) +
                         " fiber components, got " + std::to_string(components));
  }
}

inline FlatStateDerivative rhs(const FlatSolitonState& state, double lambda, int n,
                               CoefficientConvention convention) {
  check_flat_dims(n, state.u.size());
  FlatStateDerivative d;
  d.u.resize(state.u.size());
  flat_rhs<double>(state.u0, state.u, lambda, n, convention, d.u0, d.u);
  return d;
}

struct FlatIntegrationOptions {
  Tolerances tol;
  double blowupThreshold = 1e8;
  std::vector<double> outputTimes;
  bool recordOnlyOutputs = false;
};

// Integrated trajectory. The underlying state vector is
//   [u0, u_1 .. u_{n-1}, f - f(t0), log(h_1/h_1(t0)) .. log(h_{n-1}/h_{n-1}(t0))]
// where the trailing entries are quadratures integrated alongside the system.
struct FlatIntegrationResult {
  int n = 0;
  double lambda = 0.0;
  CoefficientConvention convention = CoefficientConvention::corrected;
  Trajectory trajectory;

  std::size_t size() const { return trajectory.size(); }
  TerminationReason terminationReason() const { return trajectory.reason; }
  std::optional<double> blowupEstimate() const { return trajectory.blowupEstimate; }
  std::size_t fiber_dim() const { return static_cast<std::size_t>(n - 1); }

  FlatSolitonState state(std::size_t k) const {
    const auto& y = trajectory.y.at(k);
    FlatSolitonState s;
    s.t = trajectory.t[k];
    s.u0 = y[0];
    s.u.assign(y.begin() + 1, y.begin() + 1 + static_cast<std::ptrdiff_t>(fiber_dim()));
    return s;
  }
  FlatStateDerivative derivative(std::size_t k) const {
    const auto& d = trajectory.dy.at(k);
    FlatStateDerivative out;
    out.u0 = d[0];
    out.u.assign(d.begin() + 1, d.begin() + 1 + static_cast<std::ptrdiff_t>(fiber_dim()));
    return out;
  }
  double potential_increment(std::size_t k) const { return trajectory.y.at(k)[fiber_dim() + 1]; }
  double log_warping_increment(std::size_t k, std::size_t i) const {
    return trajectory.y.at(k)[fiber_dim() + 2 + i];
  }
  // Dense output at an arbitrary t inside the integrated span.
  FlatSolitonState state_at(double t) const {
    const auto y = trajectory.interpolate(t);
    FlatSolitonState s;
    s.t = t;
    s.u0 = y[0];
    s.u.assign(y.begin() + 1, y.begin() + 1 + static_cast<std::ptrdiff_t>(fiber_dim()));
    return s;
  }
};

// Adaptive integration from span.start (initial.t is ignored) to span.end,
// which may lie before span.start for backward integration.
inline FlatIntegrationResult integrate(const FlatSolitonState& initial, double lambda, int n,
                                       CoefficientConvention convention, TimeSpan span,
                                       const FlatIntegrationOptions& options = {}) {
  check_flat_dims(n, initial.u.size());
  if (!std::isfinite(lambda)) throw ParameterError("lambda must be finite");
  const std::size_t m = static_cast<std::size_t>(n - 1);
  std::vector<double> y0(2 * m + 2, 0.0);
  y0[0] = initial.u0;
  for (std::size_t i = 0; i < m; ++i) y0[1 + i] = initial.u[i];

  IntegratorOptions opt;
  opt.tol = options.tol;
  opt.blowupThreshold = options.blowupThreshold;
  opt.outputTimes = options.outputTimes;
  opt.recordOnlyOutputs = options.recordOnlyOutputs;
  for (std::size_t i = 0; i <= m; ++i) opt.monitored.push_back(i);

  auto f = [&](double, std::span<const double> y, std::span<double> dy) {
    double du0 = 0.0;
    flat_rhs<double>(y[0], y.subspan(1, m), lambda, n, convention, du0, dy.subspan(1, m));
    dy[0] = du0;
    dy[m + 1] = y[0];
    for (std::size_t i = 0; i < m; ++i) dy[m + 2 + i] = y[1 + i];
  };

  FlatIntegrationResult res;
  res.n = n;
  res.lambda = lambda;
  res.convention = convention;
  res.trajectory = integrate_adaptive(f, span, std::move(y0), opt);
  return res;
}

// Invert the state variables: h_i = h0_i exp(int u_i), f = f0 + int u0,
// h_i''/h_i = u_i' + u_i^2 and f'' = u0' from the right-hand side.
// Backward trajectories are reversed so the profile grid increases.
inline DiagonalProfile reconstruct(const FlatIntegrationResult& result,
                                   std::span<const double> h0, double f0) {
  if (result.size() == 0) throw ParameterError("reconstruct: empty integration result");
  const std::size_t m = result.fiber_dim();
  if (h0.size() != m) throw ParameterError("reconstruct: h0 must have n - 1 entries");
  for (std::size_t i = 0; i < m; ++i) {
    if (!(h0[i] > 0.0)) {
      throw DomainError("reconstruct: h0_" + std::to_string(i + 1) + " must be positive");
    }
  }
  DiagonalProfile p;
  p.n = result.n;
  p.lambda = result.lambda;
  p.convention = result.convention;
  p.provenance = "integrate-flat (" + to_string(result.convention) + ")";
  const std::size_t count = result.size();
  p.grid.resize(count);
  p.h.assign(count, std::vector<double>(m));
  p.hPrime.assign(count, std::vector<double>(m));
  p.hDoublePrime.assign(count, std::vector<double>(m));
  p.f.resize(count);
  p.fPrime.resize(count);
  p.fDoublePrime.resize(count);
  const bool reversed = result.trajectory.direction() < 0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t src = reversed ? count - 1 - k : k;
    const auto s = result.state(src);
    const auto d = result.derivative(src);
    p.grid[k] = s.t;
    for (std::size_t i = 0; i < m; ++i) {
      const double hi = h0[i] * std::exp(result.log_warping_increment(src, i));
      p.h[k][i] = hi;
      p.hPrime[k][i] = s.u[i] * hi;
      p.hDoublePrime[k][i] = (d.u[i] + s.u[i] * s.u[i]) * hi;
    }
    p.f[k] = f0 + result.potential_increment(src);
    p.fPrime[k] = s.u0;
    p.fDoublePrime[k] = d.u0;
  }
  return p;
}

struct SolitonResidual {
  double normalEq = 0.0;
  std::vector<double> fiberEq;
  double maxAbs = 0.0;
};

// Pointwise residuals of Ric + Hess f - lambda g in the adapted frame,
// maximised over the grid:
//   normal:  Ric(N,N) + f'' - lambda = -tr L' - tr L^2 + f'' - lambda
//   fiber j: Ric(e_j,e_j) + f' u_j - lambda = (f' - A) u_j - (h_j''/h_j - u_j^2) - lambda
inline SolitonResidual soliton_residual(const DiagonalProfile& profile) {
  profile.validate();
  const std::size_t m = static_cast<std::size_t>(profile.n - 1);
  SolitonResidual res;
  res.fiberEq.assign(m, 0.0);
  for (std::size_t k = 0; k < profile.size(); ++k) {
    const TraceData td = shape_traces(profile, k);
    const double normal =
        std::abs(-td.trLprime - td.B + profile.fDoublePrime[k] - profile.lambda);
    res.normalEq = std::max(res.normalEq, normal);
    const CurvatureReport rep = curvature(profile, k);
    for (std::size_t j = 0; j < m; ++j) {
      const double uj = profile.hPrime[k][j] / profile.h[k][j];
      const double fiber = std::abs(rep.ricDiag[j] + profile.fPrime[k] * uj - profile.lambda);
      res.fiberEq[j] = std::max(res.fiberEq[j], fiber);
    }
  }
  res.maxAbs = res.normalEq;
  for (double v : res.fiberEq) res.maxAbs = std::max(res.maxAbs, v);
  return res;
}

// Warped analogue: Ric(N,N) + f'' - lambda and Ric(e,e) + f' w - lambda.
inline SolitonResidual soliton_residual(const WarpedProfile& profile) {
  profile.validate();
  SolitonResidual res;
  res.fiberEq.assign(1, 0.0);
  for (std::size_t k = 0; k < profile.size(); ++k) {
    const CurvatureReport rep = curvature_warped(profile, k);
    const double w = profile.FPrime[k] / profile.F[k];
    res.normalEq =
        std::max(res.normalEq, std::abs(rep.ricNN + profile.fDoublePrime[k] - profile.lambda));
    res.fiberEq[0] = std::max(res.fiberEq[0],
                              std::abs(rep.ricDiag[0] + profile.fPrime[k] * w - profile.lambda));
  }
  res.maxAbs = std::max(res.normalEq, res.fiberEq[0]);
  return res;
}

}  // namespace soliton_lab
