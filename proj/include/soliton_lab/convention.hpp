#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace soliton_lab {

// Coefficient of lambda in the f'' equation of the flat-fiber system.
//
//   corrected:  u0' = B + (u0 - A) A - (n - 2) lambda
//   as_printed: u0' = B + (u0 - A) A - (n - 1) lambda
//
// The corrected form follows from the normal component of the soliton
// equation and is the one that conserves S + |grad f|^2 - 2 lambda f.
// Both agree when lambda = 0.
enum class CoefficientConvention { corrected, as_printed };

inline int lambda_coefficient(CoefficientConvention c, int n) {
  return c == CoefficientConvention::corrected ? n - 2 : n - 1;
}

inline std::string to_string(CoefficientConvention c) {
  return c == CoefficientConvention::corrected ? "corrected" : "as-printed";
}

inline std::optional<CoefficientConvention> parse_convention(std::string_view s) {
  if (s == "corrected") return CoefficientConvention::corrected;
  if (s == "as-printed" || s == "as_printed") return CoefficientConvention::as_printed;
  return std::nullopt;
}

}  // namespace soliton_lab
