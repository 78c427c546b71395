#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "soliton_lab/curvature.hpp"

namespace soliton_lab::testing {

struct Sample {
  std::vector<double> h, hp, hpp;
  double f = 0.0, fp = 0.0, fpp = 0.0;
};

inline std::vector<double> linspace(double a, double b, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k)
    g[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1);
  return g;
}

inline DiagonalProfile diagonal_from(int n, const std::vector<double>& grid, double lambda,
                                     const std::function<Sample(double)>& fn) {
  DiagonalProfile p;
  p.n = n;
  p.grid = grid;
  p.lambda = lambda;
  p.provenance = "test";
  for (double t : grid) {
    const Sample s = fn(t);
    p.h.push_back(s.h);
    p.hPrime.push_back(s.hp);
    p.hDoublePrime.push_back(s.hpp);
    p.f.push_back(s.f);
    p.fPrime.push_back(s.fp);
    p.fDoublePrime.push_back(s.fpp);
  }
  return p;
}

struct WarpedSample {
  double F = 1.0, Fp = 0.0, Fpp = 0.0;
  double f = 0.0, fp = 0.0, fpp = 0.0;
};

inline WarpedProfile warped_from(int n, double mu, const std::vector<double>& grid, double lambda,
                                 const std::function<WarpedSample(double)>& fn) {
  WarpedProfile p;
  p.n = n;
  p.mu = mu;
  p.grid = grid;
  p.lambda = lambda;
  p.provenance = "test";
  for (double t : grid) {
    const WarpedSample s = fn(t);
    p.F.push_back(s.F);
    p.FPrime.push_back(s.Fp);
    p.FDoublePrime.push_back(s.Fpp);
    p.f.push_back(s.f);
    p.fPrime.push_back(s.fp);
    p.fDoublePrime.push_back(s.fpp);
  }
  return p;
}

// Exponential warpings h_i = exp(c_i t) with potential f = alpha t.
inline DiagonalProfile exponential_profile(const std::vector<double>& rates,
                                           const std::vector<double>& grid, double alpha = 0.0) {
  const int n = static_cast<int>(rates.size()) + 1;
  return diagonal_from(n, grid, 0.0, [&](double t) {
    Sample s;
    for (double c : rates) {
      const double e = std::exp(c * t);
      s.h.push_back(e);
      s.hp.push_back(c * e);
      s.hpp.push_back(c * c * e);
    }
    s.f = alpha * t;
    s.fp = alpha;
    return s;
  });
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

}  // namespace soliton_lab::testing
