#pragma once

// Curvature of the two cohomogeneity-one ansaetze used throughout the lab:
//
//   diagonal:  g = dt^2 + sum_i h_i(t)^2 dx_i^2        (flat level sets)
//   warped:    g = dt^2 + F(t)^2 g_fiber,  Ric_fiber = mu g_fiber
//
// Everything is reported in the orthonormal frame N = d/dt, e_i = d_i / h_i
// (resp. e_i = X_i / F), where the Ricci tensor is diagonal.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soliton_lab/convention.hpp"
#include "soliton_lab/errors.hpp"
#include "soliton_lab/jet.hpp"

namespace soliton_lab {

struct DiagonalProfile {
  int n = 0;
  std::vector<double> grid;
  // Indexed [grid point][fiber direction], each row has n - 1 entries.
  std::vector<std::vector<double>> h;
  std::vector<std::vector<double>> hPrime;
  std::vector<std::vector<double>> hDoublePrime;
  std::vector<double> f;
  std::vector<double> fPrime;
  std::vector<double> fDoublePrime;
  double lambda = 0.0;
  std::string provenance;
  std::optional<CoefficientConvention> convention;

  std::size_t size() const { return grid.size(); }
  int fiber_dim() const { return n - 1; }

  // Structural checks: n >= 3, >= 2 strictly increasing grid points, every
  // array sized consistently. Positivity of h is checked pointwise on use.
  void validate() const {
    if (n < 3) throw ParameterError("DiagonalProfile: n must be >= 3, got " + std::to_string(n));
    if (grid.size() < 2) throw ParameterError("DiagonalProfile: grid needs at least 2 points");
    for (std::size_t k = 1; k < grid.size(); ++k) {
      if (!(grid[k] > grid[k - 1])) {
        throw ParameterError("DiagonalProfile: grid not strictly increasing at index " +
                             std::to_string(k));
      }
    }
    const std::size_t m = grid.size();
    const auto rows_ok = [&](const std::vector<std::vector<double>>& a) {
      if (a.size() != m) return false;
      for (const auto& row : a)
        if (row.size() != static_cast<std::size_t>(n - 1)) return false;
      return true;
    };
    if (!rows_ok(h) || !rows_ok(hPrime) || !rows_ok(hDoublePrime))
      throw ParameterError("DiagonalProfile: warping arrays must be grid.size() x (n - 1)");
    if (f.size() != m || fPrime.size() != m || fDoublePrime.size() != m)
      throw ParameterError("DiagonalProfile: potential arrays must match the grid");
  }
};

struct WarpedProfile {
  int n = 0;
  double mu = 0.0;
  std::vector<double> grid;
  std::vector<double> F;
  std::vector<double> FPrime;
  std::vector<double> FDoublePrime;
  std::vector<double> f;
  std::vector<double> fPrime;
  std::vector<double> fDoublePrime;
  double lambda = 0.0;
  std::string provenance;

  std::size_t size() const { return grid.size(); }

  void validate() const {
    if (n < 3) throw ParameterError("WarpedProfile: n must be >= 3, got " + std::to_string(n));
    if (grid.size() < 2) throw ParameterError("WarpedProfile: grid needs at least 2 points");
    for (std::size_t k = 1; k < grid.size(); ++k) {
      if (!(grid[k] > grid[k - 1])) {
        throw ParameterError("WarpedProfile: grid not strictly increasing at index " +
                             std::to_string(k));
      }
    }
    const std::size_t m = grid.size();
    for (const auto* a : {&F, &FPrime, &FDoublePrime, &f, &fPrime, &fDoublePrime}) {
      if (a->size() != m) throw ParameterError("WarpedProfile: arrays must match the grid");
    }
  }
};

// Traces of the shape operator L = diag(h_i'/h_i) and of its t-derivative.
struct TraceData {
  double A = 0.0;         // tr L
  double B = 0.0;         // tr L^2
  double trLprime = 0.0;  // tr L'
  double trL2 = 0.0;      // == B
};

struct CurvatureReport {
  std::vector<double> secNormal;               // K(e_i, N)
  std::vector<std::vector<double>> secTangent;  // K(e_i, e_j), diagonal left at 0
  double ricNN = 0.0;
  std::vector<double> ricDiag;  // Ric(e_j, e_j)
  double scalar = 0.0;
  double ricNormSq = 0.0;
};

// Traces from log-derivatives r_i = h_i'/h_i and second ratios q_i = h_i''/h_i.
inline TraceData traces_from_ratios(std::span<const double> r, std::span<const double> q) {
  TraceData td;
  for (std::size_t i = 0; i < r.size(); ++i) {
    td.A += r[i];
    td.B += r[i] * r[i];
    td.trLprime += q[i] - r[i] * r[i];
  }
  td.trL2 = td.B;
  return td;
}

inline CurvatureReport curvature_from_ratios(std::span<const double> r, std::span<const double> q) {
  const std::size_t m = r.size();
  CurvatureReport rep;
  rep.secNormal.resize(m);
  rep.secTangent.assign(m, std::vector<double>(m, 0.0));
  rep.ricDiag.resize(m);
  double A = 0.0;
  double B = 0.0;
  double sumQ = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    A += r[i];
    B += r[i] * r[i];
    sumQ += q[i];
  }
  for (std::size_t i = 0; i < m; ++i) {
    rep.secNormal[i] = -q[i];
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j) rep.secTangent[i][j] = -r[i] * r[j];
    }
  }
  rep.ricNN = -sumQ;
  double ricSq = rep.ricNN * rep.ricNN;
  for (std::size_t j = 0; j < m; ++j) {
    rep.ricDiag[j] = -A * r[j] - (q[j] - r[j] * r[j]);
    ricSq += rep.ricDiag[j] * rep.ricDiag[j];
  }
  rep.scalar = -2.0 * sumQ - A * A + B;
  rep.ricNormSq = ricSq;
  return rep;
}

namespace detail {

inline void check_index(std::size_t size, std::size_t index) {
  if (index >= size) {
    throw ParameterError("grid index " + std::to_string(index) + " out of range (size " +
                         std::to_string(size) + ")");
  }
}

inline void diagonal_ratios(const DiagonalProfile& p, std::size_t index, std::vector<double>& r,
                            std::vector<double>& q) {
  check_index(p.size(), index);
  const std::size_t m = static_cast<std::size_t>(p.n - 1);
  if (p.h[index].size() != m || p.hPrime[index].size() != m || p.hDoublePrime[index].size() != m)
    throw ParameterError("DiagonalProfile: row " + std::to_string(index) + " has wrong width");
  r.resize(m);
  q.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double hi = p.h[index][i];
    if (!(hi > 0.0)) {
      throw DomainError("non-positive warping h_" + std::to_string(i + 1) + " = " +
                        std::to_string(hi) + " at grid index " + std::to_string(index));
    }
    r[i] = p.hPrime[index][i] / hi;
    q[i] = p.hDoublePrime[index][i] / hi;
  }
}

}  // namespace detail

inline TraceData shape_traces(const DiagonalProfile& profile, std::size_t index) {
  std::vector<double> r;
  std::vector<double> q;
  detail::diagonal_ratios(profile, index, r, q);
  return traces_from_ratios(r, q);
}

inline CurvatureReport curvature(const DiagonalProfile& profile, std::size_t index) {
  std::vector<double> r;
  std::vector<double> q;
  detail::diagonal_ratios(profile, index, r, q);
  return curvature_from_ratios(r, q);
}

// Warped curvature from F, F', F'' at one point.
//
// Ric(e_j, e_j) carries the intrinsic fiber term mu / F^2. Mixed fiber
// sectional curvatures are only determined for space-form fibers; they are
// reported for the round model, K(e_i, e_j) = mu / ((n - 2) F^2) - w^2, which
// is the value whose (n - 2)-fold sum reproduces the fiber Ricci term.
inline CurvatureReport curvature_warped_values(int n, double mu, double F, double Fp, double Fpp) {
  if (!(F > 0.0)) throw DomainError("warping F must be positive, got " + std::to_string(F));
  if (n < 3) throw ParameterError("warped curvature needs n >= 3");
  const std::size_t m = static_cast<std::size_t>(n - 1);
  const double w = Fp / F;
  const double q = Fpp / F;
  const double intrinsic = mu / (F * F);
  CurvatureReport rep;
  rep.secNormal.assign(m, -q);
  rep.secTangent.assign(m, std::vector<double>(m, 0.0));
  const double mixed = intrinsic / static_cast<double>(n - 2) - w * w;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) rep.secTangent[i][j] = mixed;
  rep.ricNN = -static_cast<double>(n - 1) * q;
  const double ricFiber = intrinsic - static_cast<double>(n - 2) * w * w - q;
  rep.ricDiag.assign(m, ricFiber);
  const double A = static_cast<double>(n - 1) * w;
  const double B = static_cast<double>(n - 1) * w * w;
  rep.scalar = 2.0 * rep.ricNN + static_cast<double>(n - 1) * intrinsic - A * A + B;
  rep.ricNormSq = rep.ricNN * rep.ricNN + static_cast<double>(n - 1) * ricFiber * ricFiber;
  return rep;
}

inline CurvatureReport curvature_warped(const WarpedProfile& profile, std::size_t index) {
  detail::check_index(profile.size(), index);
  if (!(profile.F[index] > 0.0)) {
    throw DomainError("non-positive warping F = " + std::to_string(profile.F[index]) +
                      " at grid index " + std::to_string(index));
  }
  return curvature_warped_values(profile.n, profile.mu, profile.F[index], profile.FPrime[index],
                                 profile.FDoublePrime[index]);
}

// Scalar curvature as a function of first-order data, templated so the
// identity monitors can push Taylor jets through it.
//
// Flat fibers: r_i = u_i, q_i = u_i' + u_i^2.
template <class T>
T scalar_from_ratios(std::span<const T> r, std::span<const T> q) {
  T A = 0.0;
  T B = 0.0;
  T sumQ = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    A += r[i];
    B += r[i] * r[i];
    sumQ += q[i];
  }
  return -2.0 * sumQ - A * A + B;
}

template <class T>
T ricci_norm_sq_from_ratios(std::span<const T> r, std::span<const T> q) {
  T A = 0.0;
  T sumQ = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    A += r[i];
    sumQ += q[i];
  }
  T out = sumQ * sumQ;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const T rj = -A * r[j] - (q[j] - r[j] * r[j]);
    out += rj * rj;
  }
  return out;
}

}  // namespace soliton_lab
