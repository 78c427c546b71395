#pragma once

#include <array>
#include <cstddef>

namespace soliton_lab {

// Truncated Taylor polynomial c[0] + c[1] s + c[2] s^2 in a local parameter s.
// Arithmetic propagates the first three Taylor coefficients exactly, which is
// all the chain rule needs to deliver S, S' and S'' along a trajectory.
struct Jet2 {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  constexpr Jet2() = default;
  constexpr Jet2(double value) : c{value, 0.0, 0.0} {}  // NOLINT: implicit lift of constants
  constexpr Jet2(double c0, double c1, double c2) : c{c0, c1, c2} {}

  constexpr double value() const { return c[0]; }
  constexpr double first() const { return c[1]; }
  // d^2/ds^2 of the represented function.
  constexpr double second() const { return 2.0 * c[2]; }

  constexpr Jet2& operator+=(const Jet2& o) {
    for (std::size_t k = 0; k < 3; ++k) c[k] += o.c[k];
    return *this;
  }
  constexpr Jet2& operator-=(const Jet2& o) {
    for (std::size_t k = 0; k < 3; ++k) c[k] -= o.c[k];
    return *this;
  }
  constexpr Jet2& operator*=(const Jet2& o) {
    *this = Jet2{c[0] * o.c[0], c[0] * o.c[1] + c[1] * o.c[0],
                 c[0] * o.c[2] + c[1] * o.c[1] + c[2] * o.c[0]};
    return *this;
  }
  constexpr Jet2& operator/=(const Jet2& o) {
    const double q0 = c[0] / o.c[0];
    const double q1 = (c[1] - q0 * o.c[1]) / o.c[0];
    const double q2 = (c[2] - q0 * o.c[2] - q1 * o.c[1]) / o.c[0];
    *this = Jet2{q0, q1, q2};
    return *this;
  }
};

constexpr Jet2 operator-(const Jet2& a) { return Jet2{-a.c[0], -a.c[1], -a.c[2]}; }
constexpr Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
constexpr Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
constexpr Jet2 operator*(Jet2 a, const Jet2& b) { return a *= b; }
constexpr Jet2 operator/(Jet2 a, const Jet2& b) { return a /= b; }

// Scalar access shared by double and Jet2 in templated formulas.
inline constexpr double value_of(double x) { return x; }
inline constexpr double value_of(const Jet2& x) { return x.value(); }

}  // namespace soliton_lab
