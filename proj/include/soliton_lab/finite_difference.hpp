#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "soliton_lab/errors.hpp"

namespace soliton_lab {

// Fornberg's recursion: weights w[d][j] such that
//   f^(d)(x0) ~= sum_j w[d][j] f(x[j])
// for d = 0..maxOrder on arbitrary distinct nodes x.
inline std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x,
                                                         std::size_t maxOrder) {
  const std::size_t np = x.size();
  std::vector<std::vector<double>> c(maxOrder + 1, std::vector<double>(np, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < np; ++i) {
    const std::size_t mn = std::min(i, maxOrder);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

struct Derivatives {
  std::vector<double> first;
  std::vector<double> second;
};

// First and second derivatives of samples v on grid t, fourth order on
// uniform grids. Interior points use centred 5-point stencils; the two points
// at each end use one-sided stencils, with 6 nodes for the second derivative
// so that it keeps fourth order there (5 nodes when only 5 points exist).
inline Derivatives fourth_order_derivatives(std::span<const double> t, std::span<const double> v) {
  if (t.size() != v.size()) throw ParameterError("finite differences: size mismatch");
  if (t.size() < 5) throw ParameterError("finite differences need at least 5 grid points");
  const std::size_t n = t.size();
  Derivatives d;
  d.first.resize(n);
  d.second.resize(n);
  auto apply = [&](std::size_t k, std::size_t start, std::size_t width, std::size_t order) {
    const auto w = fornberg_weights(t[k], t.subspan(start, width), order);
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) acc += w[order][j] * v[start + j];
    return acc;
  };
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t start5 = std::min(k >= 2 ? k - 2 : 0, n - 5);
    d.first[k] = apply(k, start5, 5, 1);
    const bool edge = k < 2 || k + 2 >= n;
    if (edge && n >= 6) {
      const std::size_t start6 = k < 2 ? 0 : n - 6;
      d.second[k] = apply(k, start6, 6, 2);
    } else {
      d.second[k] = apply(k, start5, 5, 2);
    }
  }
  return d;
}

}  // namespace soliton_lab
