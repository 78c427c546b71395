#pragma once

// Isometry-algebra dimension bounds for n-dimensional gradient Ricci solitons.
//
//   kobayashi  = n(n+1)/2          any Riemannian n-manifold
//   solitonMax = n(n-1)/2          non-trivial irreducible GRS
//   gapCeiling = (n-1)(n-2)/2 + 1  below solitonMax (gap rule, n != 5)
//
// The soliton-specific verdicts are conditional on the soliton being
// non-trivial and irreducible, which (n, d) alone cannot certify.

#include <cstdint>
#include <string>
#include <vector>

#include "soliton_lab/errors.hpp"

namespace soliton_lab {

enum class Verdict {
  exceeds_kobayashi,
  constant_curvature_max,
  exceeds_soliton_max,
  soliton_max,
  forbidden_gap,
  gap_rule_inapplicable,
  allowed,
};

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::exceeds_kobayashi: return "exceeds-kobayashi";
    case Verdict::constant_curvature_max: return "constant-curvature-max";
    case Verdict::exceeds_soliton_max: return "exceeds-soliton-max";
    case Verdict::soliton_max: return "soliton-max";
    case Verdict::forbidden_gap: return "forbidden-gap";
    case Verdict::gap_rule_inapplicable: return "gap-rule-inapplicable";
    case Verdict::allowed: return "allowed";
  }
  return "unknown";
}

struct DimBounds {
  std::int64_t n = 0;
  std::int64_t kobayashi = 0;
  std::int64_t solitonMax = 0;
  std::int64_t gapCeiling = 0;
};

struct DimVerdict {
  std::int64_t n = 0;
  std::int64_t d = 0;
  Verdict verdict = Verdict::allowed;
  DimBounds bounds;
};

// Keeps n(n+1) well inside int64.
inline constexpr std::int64_t kMaxDimension = 1'000'000'000;

inline DimBounds bounds_for(std::int64_t n) {
  if (n < 3) throw ParameterError("dimension bounds need n >= 3, got " + std::to_string(n));
  if (n > kMaxDimension) throw ParameterError("dimension bounds: n too large");
  return {n, n * (n + 1) / 2, n * (n - 1) / 2, (n - 1) * (n - 2) / 2 + 1};
}

inline DimVerdict classify(std::int64_t n, std::int64_t d) {
  const DimBounds b = bounds_for(n);
  if (d < 0) throw ParameterError("classify: d must be >= 0, got " + std::to_string(d));
  DimVerdict out{n, d, Verdict::allowed, b};
  if (d > b.kobayashi) {
    out.verdict = Verdict::exceeds_kobayashi;
  } else if (d == b.kobayashi) {
    out.verdict = Verdict::constant_curvature_max;
  } else if (d > b.solitonMax) {
    // Realisable by some metric, but not by a non-trivial irreducible GRS.
    out.verdict = Verdict::exceeds_soliton_max;
  } else if (d == b.solitonMax) {
    out.verdict = Verdict::soliton_max;
  } else if (d > b.gapCeiling) {
    out.verdict = n == 5 ? Verdict::gap_rule_inapplicable : Verdict::forbidden_gap;
  }
  return out;
}

inline std::vector<DimBounds> bound_table(std::int64_t nMax) {
  if (nMax < 3) throw ParameterError("bound_table: nMax must be >= 3");
  std::vector<DimBounds> rows;
  rows.reserve(static_cast<std::size_t>(nMax - 2));
  for (std::int64_t n = 3; n <= nMax; ++n) rows.push_back(bounds_for(n));
  return rows;
}

}  // namespace soliton_lab
