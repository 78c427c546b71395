#pragma once

// Adaptive Dormand-Prince 5(4) integration with blow-up and collapse events.
//
// The stepper records every accepted step together with its derivative, so a
// trajectory supports cubic Hermite dense output. Optional output times are
// hit exactly (steps are shortened to land on them) so that downstream finite
// differences see integrator values rather than interpolants.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soliton_lab/errors.hpp"

namespace soliton_lab {

enum class TerminationReason { reached_end, blowup_detected, step_underflow, warping_collapse };

inline std::string to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::reached_end:
      return "reached-end";
    case TerminationReason::blowup_detected:
      return "blow-up-detected";
    case TerminationReason::step_underflow:
      return "step-underflow";
    case TerminationReason::warping_collapse:
      return "warping-collapse";
  }
  return "unknown";
}

struct Tolerances {
  double rel = 1e-12;
  double abs = 1e-12;
};

struct TimeSpan {
  double start = 0.0;
  double end = 0.0;
};

struct IntegratorOptions {
  Tolerances tol;
  // Blow-up is declared once max |y_k| over the monitored components reaches
  // this value. Empty `monitored` means every component.
  double blowupThreshold = 1e8;
  std::vector<std::size_t> monitored;
  // Optional collapse event; checked on every accepted state.
  std::function<bool(std::span<const double>)> collapsed;
  // Exact landing times (need not be sorted; values outside the span are ignored).
  std::vector<double> outputTimes;
  // When set together with outputTimes, only the start, the output times and
  // the terminal state are stored.
  bool recordOnlyOutputs = false;
  double initialStep = 0.0;
  std::size_t maxSteps = 20'000'000;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> y;
  std::vector<std::vector<double>> dy;
  TerminationReason reason = TerminationReason::reached_end;
  std::optional<double> blowupEstimate;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double lastStep = 0.0;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  int direction() const { return (t.size() > 1 && t.back() < t.front()) ? -1 : 1; }

  // Cubic Hermite interpolation between stored samples.
  std::vector<double> interpolate(double at) const {
    if (t.empty()) throw ParameterError("interpolate: empty trajectory");
    const int dir = direction();
    const double lo = dir > 0 ? t.front() : t.back();
    const double hi = dir > 0 ? t.back() : t.front();
    if (at < lo || at > hi) {
      throw DomainError("interpolate: t = " + std::to_string(at) + " outside trajectory span");
    }
    // index k with t in [t_k, t_{k+1}] along the integration direction
    std::size_t k = 0;
    if (dir > 0) {
      auto it = std::upper_bound(t.begin(), t.end(), at);
      k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    } else {
      auto it = std::upper_bound(t.begin(), t.end(), at, std::greater<double>());
      k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    }
    if (k + 1 >= t.size()) return y.back();
    return hermite(t[k], y[k], dy[k], t[k + 1], y[k + 1], dy[k + 1], at);
  }

  static std::vector<double> hermite(double t0, const std::vector<double>& y0,
                                     const std::vector<double>& d0, double t1,
                                     const std::vector<double>& y1,
                                     const std::vector<double>& d1, double at) {
    const double h = t1 - t0;
    const double s = (at - t0) / h;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    std::vector<double> out(y0.size());
    for (std::size_t i = 0; i < y0.size(); ++i) {
      out[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
    }
    return out;
  }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

template <class Rhs>
class DopriStepper {
 public:
  DopriStepper(Rhs& rhs, std::size_t dim)
      : rhs_(rhs), k2_(dim), k3_(dim), k4_(dim), k5_(dim), k6_(dim), tmp_(dim) {}

  // One trial step from (t, y) with derivative k1. Writes y_new and its
  // derivative k7 and returns the scaled error norm (inf when the stages
  // produced non-finite values).
  double step(double t, std::span<const double> y, std::span<const double> k1, double h,
              const Tolerances& tol, std::vector<double>& yNew, std::vector<double>& k7) {
    using T = Dopri5;
    const std::size_t d = y.size();
    yNew.resize(d);
    k7.resize(d);
    for (std::size_t i = 0; i < d; ++i) tmp_[i] = y[i] + h * T::a21 * k1[i];
    rhs_(t + T::c2 * h, tmp_, k2_);
    for (std::size_t i = 0; i < d; ++i) tmp_[i] = y[i] + h * (T::a31 * k1[i] + T::a32 * k2_[i]);
    rhs_(t + T::c3 * h, tmp_, k3_);
    for (std::size_t i = 0; i < d; ++i)
      tmp_[i] = y[i] + h * (T::a41 * k1[i] + T::a42 * k2_[i] + T::a43 * k3_[i]);
    rhs_(t + T::c4 * h, tmp_, k4_);
    for (std::size_t i = 0; i < d; ++i)
      tmp_[i] = y[i] + h * (T::a51 * k1[i] + T::a52 * k2_[i] + T::a53 * k3_[i] + T::a54 * k4_[i]);
    rhs_(t + T::c5 * h, tmp_, k5_);
    for (std::size_t i = 0; i < d; ++i)
      tmp_[i] = y[i] + h * (T::a61 * k1[i] + T::a62 * k2_[i] + T::a63 * k3_[i] +
                            T::a64 * k4_[i] + T::a65 * k5_[i]);
    rhs_(t + h, tmp_, k6_);
    for (std::size_t i = 0; i < d; ++i)
      yNew[i] = y[i] + h * (T::b1 * k1[i] + T::b3 * k3_[i] + T::b4 * k4_[i] + T::b5 * k5_[i] +
                            T::b6 * k6_[i]);
    rhs_(t + h, yNew, k7);
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double e = h * (T::e1 * k1[i] + T::e3 * k3_[i] + T::e4 * k4_[i] + T::e5 * k5_[i] +
                            T::e6 * k6_[i] + T::e7 * k7[i]);
      const double sc = tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(yNew[i]));
      const double r = e / sc;
      acc += r * r;
      if (!std::isfinite(yNew[i]) || !std::isfinite(k7[i])) {
        return std::numeric_limits<double>::infinity();
      }
    }
    const double norm = std::sqrt(acc / static_cast<double>(d));
    return std::isfinite(norm) ? norm : std::numeric_limits<double>::infinity();
  }

 private:
  Rhs& rhs_;
  std::vector<double> k2_, k3_, k4_, k5_, k6_, tmp_;
};

inline double monitored_norm(std::span<const double> y, const std::vector<std::size_t>& idx,
                             std::size_t* argmax = nullptr) {
  double best = 0.0;
  std::size_t at = 0;
  const auto visit = [&](std::size_t i) {
    const double a = std::abs(y[i]);
    if (a > best || !std::isfinite(a)) {
      best = a;
      at = i;
    }
  };
  if (idx.empty()) {
    for (std::size_t i = 0; i < y.size(); ++i) visit(i);
  } else {
    for (std::size_t i : idx) visit(i);
  }
  if (argmax) *argmax = at;
  return best;
}

}  // namespace detail

// Integrate y' = rhs(t, y) over span. rhs has signature
//   void(double t, std::span<const double> y, std::span<double> dy).
//
// Termination:
//   reached-end        the span end was reached;
//   blow-up-detected   the monitored norm reached blowupThreshold, or the
//                      step size underflowed while that norm was growing;
//   warping-collapse   options.collapsed returned true on an accepted state;
//   step-underflow     the step size underflowed without norm growth (or the
//                      step budget ran out).
//
// On blow-up the threshold crossing inside the last step is bracketed and
// bisected on the Hermite interpolant, the crossing state is recomputed with
// an exact Runge-Kutta step, and the pole is extrapolated from it assuming a
// simple pole y_k ~ c / (t* - t), for which t* - t = y_k / y_k'.
template <class Rhs>
Trajectory integrate_adaptive(Rhs&& rhs, TimeSpan span, std::vector<double> y0,
                              const IntegratorOptions& opt) {
  if (!(span.end != span.start) || !std::isfinite(span.start) || !std::isfinite(span.end))
    throw ParameterError("integrate: span must be finite and nondegenerate");
  if (!(opt.tol.rel > 0.0) || !(opt.tol.abs > 0.0))
    throw ParameterError("integrate: tolerances must be positive");
  if (!(opt.blowupThreshold > 0.0)) throw ParameterError("integrate: blow-up threshold must be > 0");
  for (std::size_t i : opt.monitored)
    if (i >= y0.size()) throw ParameterError("integrate: monitored index out of range");

  const std::size_t dim = y0.size();
  const double dir = span.end > span.start ? 1.0 : -1.0;
  const double length = std::abs(span.end - span.start);

  auto call = [&rhs](double t, std::span<const double> y, std::span<double> dy) { rhs(t, y, dy); };
  detail::DopriStepper<decltype(call)> stepper(call, dim);

  // Output times strictly inside the span, ordered along the direction.
  std::vector<double> outs;
  for (double to : opt.outputTimes) {
    if (dir * (to - span.start) > 0.0 && dir * (span.end - to) > 0.0) outs.push_back(to);
  }
  std::sort(outs.begin(), outs.end(), [dir](double a, double b) { return dir * a < dir * b; });
  outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
  std::size_t nextOut = 0;
  const bool sparse = opt.recordOnlyOutputs && !opt.outputTimes.empty();

  Trajectory traj;
  double t = span.start;
  std::vector<double> y = std::move(y0);
  std::vector<double> dy(dim);
  call(t, y, dy);
  traj.t.push_back(t);
  traj.y.push_back(y);
  traj.dy.push_back(dy);

  if (detail::monitored_norm(y, opt.monitored) >= opt.blowupThreshold) {
    throw ParameterError("integrate: initial state already exceeds the blow-up threshold");
  }

  // Initial step (Hairer, Norsett & Wanner, II.4).
  double h = opt.initialStep;
  if (!(h > 0.0)) {
    double d0 = 0.0;
    double d1 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double sc = opt.tol.abs + opt.tol.rel * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (dy[i] / sc) * (dy[i] / sc);
    }
    d0 = std::sqrt(d0 / static_cast<double>(dim));
    d1 = std::sqrt(d1 / static_cast<double>(dim));
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, length);
  }
  h = std::min(h, length);

  std::vector<double> yNew;
  std::vector<double> dyNew;
  std::vector<double> normHistory;
  normHistory.push_back(detail::monitored_norm(y, opt.monitored));

  auto record = [&](double tt, const std::vector<double>& yy, const std::vector<double>& dd,
                    bool isOutput) {
    if (!sparse || isOutput) {
      traj.t.push_back(tt);
      traj.y.push_back(yy);
      traj.dy.push_back(dd);
    }
  };
  auto finish_sparse = [&]() {
    if (sparse && traj.t.back() != t) {
      traj.t.push_back(t);
      traj.y.push_back(y);
      traj.dy.push_back(dy);
    }
  };

  const double eps = std::numeric_limits<double>::epsilon();
  bool lastRejected = false;

  while (true) {
    if (traj.accepted + traj.rejected >= opt.maxSteps) {
      traj.reason = TerminationReason::step_underflow;
      finish_sparse();
      return traj;
    }
    const double remaining = dir * (span.end - t);
    if (remaining <= 0.0) {
      traj.reason = TerminationReason::reached_end;
      finish_sparse();
      return traj;
    }
    double target = span.end;
    bool hitsOutput = false;
    while (nextOut < outs.size() && dir * (outs[nextOut] - t) <= 0.0) ++nextOut;
    if (nextOut < outs.size()) {
      target = outs[nextOut];
      hitsOutput = true;
    }
    double hTry = std::min(h, dir * (target - t));
    bool landsExactly = false;
    if (dir * (target - t) <= hTry * (1.0 + 1e-12)) {
      hTry = dir * (target - t);
      landsExactly = true;
    }
    const double hMin = 16.0 * eps * std::max(1.0, std::abs(t));
    if (hTry < hMin && !landsExactly) {
      // Underflow: blow-up if the monitored norm has been growing.
      std::size_t arg = 0;
      const double now = detail::monitored_norm(y, opt.monitored, &arg);
      const std::size_t back = std::min<std::size_t>(normHistory.size() - 1, 8);
      const double before = normHistory[normHistory.size() - 1 - back];
      if (now > before) {
        traj.reason = TerminationReason::blowup_detected;
        double est = t;
        if (dy[arg] != 0.0 && dir * (y[arg] / dy[arg]) > 0.0) est = t + y[arg] / dy[arg];
        traj.blowupEstimate = est;
      } else {
        traj.reason = TerminationReason::step_underflow;
      }
      finish_sparse();
      return traj;
    }

    const double err = stepper.step(t, y, dy, dir * hTry, opt.tol, yNew, dyNew);
    if (!(err <= 1.0)) {
      ++traj.rejected;
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h = hTry * fac;
      lastRejected = true;
      continue;
    }
    ++traj.accepted;
    const double tNew = landsExactly ? target : t + dir * hTry;
    traj.lastStep = dir * hTry;

    std::size_t arg = 0;
    const double newNorm = detail::monitored_norm(yNew, opt.monitored, &arg);
    if (newNorm >= opt.blowupThreshold) {
      // Bisect the threshold crossing on the Hermite interpolant of this step.
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto ym = Trajectory::hermite(t, y, dy, tNew, yNew, dyNew, t + mid * (tNew - t));
        if (detail::monitored_norm(ym, opt.monitored) >= opt.blowupThreshold) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      const double hCross = hi * (tNew - t);
      std::vector<double> yc;
      std::vector<double> dyc;
      stepper.step(t, y, dy, hCross, opt.tol, yc, dyc);
      double tc = t + hCross;
      bool usable = true;
      for (std::size_t i = 0; i < dim; ++i) usable = usable && std::isfinite(yc[i]);
      if (!usable) {
        yc = yNew;
        dyc = dyNew;
        tc = tNew;
      }
      std::size_t k = 0;
      detail::monitored_norm(yc, opt.monitored, &k);
      double est = tc;
      if (dyc[k] != 0.0 && dir * (yc[k] / dyc[k]) > 0.0) est = tc + yc[k] / dyc[k];
      traj.t.push_back(tc);
      traj.y.push_back(yc);
      traj.dy.push_back(dyc);
      traj.lastStep = tc - t;
      traj.reason = TerminationReason::blowup_detected;
      traj.blowupEstimate = est;
      return traj;
    }

    t = tNew;
    y.swap(yNew);
    dy.swap(dyNew);
    normHistory.push_back(newNorm);
    const bool isOutput = landsExactly && hitsOutput;
    record(t, y, dy, isOutput);

    if (opt.collapsed && opt.collapsed(y)) {
      traj.reason = TerminationReason::warping_collapse;
      finish_sparse();
      return traj;
    }

    double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    fac = std::clamp(fac, 0.2, 5.0);
    if (lastRejected) fac = std::min(fac, 1.0);
    lastRejected = false;
    // Keep the proposal tied to the controller, not to a shortened landing step.
    h = landsExactly ? std::max(h, hTry * fac) : hTry * fac;
  }
}

}  // namespace soliton_lab
