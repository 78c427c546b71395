#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "soliton_lab/cli/config.hpp"
#include "soliton_lab/dimension_bounds.hpp"
#include "soliton_lab/flat_ode.hpp"
#include "soliton_lab/identities.hpp"
#include "soliton_lab/profile_io.hpp"
#include "soliton_lab/steady_riccati.hpp"
#include "soliton_lab/warped_ode.hpp"

namespace soliton_lab::cli {

using Json = nlohmann::json;

namespace detail {

inline Json number_or_null(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

// JSON has no infinities; unbounded interval ends are spelled out.
inline Json bound(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return v;
}

inline Json header(const std::string& command) {
  Json j;
  j["schemaVersion"] = kSchemaVersion;
  j["command"] = command;
  return j;
}

inline std::string render(const Json& j) { return j.dump(2) + "\n"; }

// Stdout always gets the summary; files are staged and committed together.
inline void emit(std::ostream& out, const Json& summary, StagedWriter& files) {
  files.commit();
  out << render(summary);
}

inline std::filesystem::path summary_path(const std::string& csv) { return sidecar_path(csv); }

// Uniform double in [0, 1) from the top 53 bits, independent of the
// standard library's distribution implementation.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline unsigned worker_count(std::size_t jobs) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SOLITON_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(jobs, 1)));
}

template <class Fn>
void parallel_for(std::size_t jobs, Fn&& fn) {
  const unsigned workers = worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < jobs; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Uniform output grid from a to b (inclusive) for --step.
inline std::vector<double> uniform_times(double a, double b, double step) {
  if (step <= 0.0) return {};
  const double len = std::abs(b - a);
  const auto count = static_cast<std::size_t>(std::floor(len / step + 1e-9));
  if (count > 10'000'000) throw ParameterError("--step too small for the span");
  std::vector<double> out;
  const double dir = b > a ? 1.0 : -1.0;
  for (std::size_t k = 0; k <= count; ++k) out.push_back(a + dir * step * static_cast<double>(k));
  if (std::abs(out.back() - b) > 1e-12 * std::max(1.0, len)) out.push_back(b);
  else out.back() = b;
  return out;
}

inline bool underflowed(TerminationReason r) { return r == TerminationReason::step_underflow; }

inline int run_integrate_flat(const RunConfig& c, std::ostream& out) {
  const int n = *c.n;
  FlatSolitonState init{c.span.start, *c.u0, c.u};
  FlatIntegrationOptions opt;
  opt.tol = c.tol;
  opt.blowupThreshold = c.blowupThreshold;
  opt.outputTimes = uniform_times(c.span.start, c.span.end, c.step);
  opt.recordOnlyOutputs = c.step > 0.0;
  const auto res = integrate(init, c.lambda, n, c.convention, c.span, opt);

  const std::vector<double> ones(static_cast<std::size_t>(n - 1), 1.0);
  const auto profile = reconstruct(res, ones, 0.0);
  const auto ham = hamilton_monitor(profile);

  Json j = header("integrate-flat");
  j["n"] = n;
  j["lambda"] = c.lambda;
  j["convention"] = to_string(c.convention);
  j["span"] = {c.span.start, c.span.end};
  j["initial"] = {{"u0", *c.u0}, {"u", c.u}};
  j["terminationReason"] = to_string(res.terminationReason());
  j["blowupEstimate"] = number_or_null(res.blowupEstimate());
  j["conservedDrift"] = ham.hamiltonDrift;
  j["conservedRelativeDrift"] = ham.hamiltonRelativeDrift;
  j["hamiltonConstant"] = ham.hamilton_value();
  j["acceptedSteps"] = res.trajectory.accepted;
  j["rejectedSteps"] = res.trajectory.rejected;
  j["samples"] = res.size();
  const auto last = res.state(res.size() - 1);
  j["final"] = {{"t", last.t}, {"u0", last.u0}, {"u", last.u}};

  if (underflowed(res.terminationReason())) {
    out << render(j);
    return numeric_failure;
  }
  StagedWriter files;
  if (!c.out.empty()) {
    std::string csv = "t,u0";
    for (int i = 1; i < n; ++i) csv += ",u" + std::to_string(i);
    csv += '\n';
    for (std::size_t k = 0; k < res.size(); ++k) {
      const auto s = res.state(k);
      std::vector<double> row{s.t, s.u0};
      row.insert(row.end(), s.u.begin(), s.u.end());
      csv += soliton_lab::detail::csv_line(row);
    }
    files.add(c.out, csv);
    files.add(summary_path(c.out), render(j));
  }
  if (!c.profileOut.empty()) {
    files.add(c.profileOut, profile_csv(profile));
    files.add(sidecar_path(c.profileOut), render(profile_header(profile)));
  }
  emit(out, j, files);
  return ok;
}

inline Json warped_summary(const std::string& command, const WarpedIntegrationResult& res,
                           const WarpedProfile& profile) {
  const auto ham = hamilton_monitor(profile);
  Json j = header(command);
  j["n"] = res.n;
  j["mu"] = res.mu;
  j["lambda"] = res.lambda;
  j["terminationReason"] = to_string(res.terminationReason());
  j["blowupEstimate"] = number_or_null(res.blowupEstimate());
  j["conservedDrift"] = ham.hamiltonDrift;
  j["conservedRelativeDrift"] = ham.hamiltonRelativeDrift;
  j["hamiltonConstant"] = ham.hamilton_value();
  j["solitonResidual"] = soliton_residual(profile).maxAbs;
  j["acceptedSteps"] = res.trajectory.accepted;
  j["rejectedSteps"] = res.trajectory.rejected;
  j["samples"] = res.size();
  const auto last = res.state(res.size() - 1);
  j["final"] = {{"t", last.t}, {"F", last.F}, {"w", last.w}, {"u0", last.u0}};
  return j;
}

inline void stage_warped(const RunConfig& c, const WarpedIntegrationResult& res,
                         const WarpedProfile& profile, const Json& j, StagedWriter& files) {
  if (!c.out.empty()) {
    std::string csv = "t,F,w,u0\n";
    for (std::size_t k = 0; k < res.size(); ++k) {
      const auto s = res.state(k);
      csv += soliton_lab::detail::csv_line({s.t, s.F, s.w, s.u0});
    }
    files.add(c.out, csv);
    files.add(summary_path(c.out), render(j));
  }
  if (!c.profileOut.empty()) {
    files.add(c.profileOut, profile_csv(profile));
    files.add(sidecar_path(c.profileOut), render(profile_header(profile)));
  }
}

inline int run_integrate_warped(const RunConfig& c, std::ostream& out) {
  WarpedSolitonState init{c.span.start, *c.F, *c.w, *c.u0};
  WarpedIntegrationOptions opt;
  opt.tol = c.tol;
  opt.blowupThreshold = c.blowupThreshold;
  opt.outputTimes = uniform_times(c.span.start, c.span.end, c.step);
  opt.recordOnlyOutputs = c.step > 0.0;
  const auto res = integrate_warped(init, *c.n, *c.mu, c.lambda, c.span, opt);
  const auto profile = warped_to_profile(res, 0.0);
  Json j = warped_summary("integrate-warped", res, profile);
  j["span"] = {c.span.start, c.span.end};
  j["initial"] = {{"F", *c.F}, {"w", *c.w}, {"u0", *c.u0}};
  if (underflowed(res.terminationReason())) {
    out << render(j);
    return numeric_failure;
  }
  StagedWriter files;
  stage_warped(c, res, profile, j, files);
  emit(out, j, files);
  return ok;
}

inline int run_bryant(const RunConfig& c, std::ostream& out) {
  const int n = *c.n;
  const auto start = bryant_series_start(n, c.epsilon, c.c1);
  WarpedIntegrationOptions opt;
  opt.tol = c.tol;
  opt.blowupThreshold = c.blowupThreshold;
  opt.outputTimes = uniform_times(c.epsilon, c.tEnd, c.step);
  opt.recordOnlyOutputs = c.step > 0.0;
  const auto res = integrate_warped(start, n, n - 2.0, 0.0, {c.epsilon, c.tEnd}, opt);
  const BryantSeries series(n, c.c1);
  const auto profile = warped_to_profile(res, series.potential(c.epsilon));
  Json j = warped_summary("bryant", res, profile);
  j["epsilon"] = c.epsilon;
  j["c1"] = c.c1;
  j["tEnd"] = c.tEnd;

  double sMin = std::numeric_limits<double>::infinity();
  bool nonincreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < profile.size(); ++k) {
    const double S = curvature_warped(profile, k).scalar;
    sMin = std::min(sMin, S);
    // S is a difference of O(1/F^2) terms near the tip; allow for rounding.
    const double w = profile.FPrime[k] / profile.F[k];
    const double m = static_cast<double>(profile.n - 1);
    const double slack = 1e-12 * (1.0 + profile.mu / (profile.F[k] * profile.F[k]) + m * m * w * w);
    if (S > prev + slack) nonincreasing = false;
    prev = S;
  }
  j["scalarStart"] = curvature_warped(profile, 0).scalar;
  j["scalarEnd"] = curvature_warped(profile, profile.size() - 1).scalar;
  j["scalarMin"] = sMin;
  j["scalarNonincreasing"] = nonincreasing;
  j["ellipticResidual"] = *elliptic_monitor(res).ellipticResidual;

  if (underflowed(res.terminationReason())) {
    out << render(j);
    return numeric_failure;
  }
  StagedWriter files;
  stage_warped(c, res, profile, j, files);
  emit(out, j, files);
  return ok;
}

inline int run_closed_form(const RunConfig& c, std::ostream& out) {
  const FlatSolitonState init{c.t0, *c.u0, c.u};
  const auto red = reduce(init);
  const SteadyForm form = c.form == "printed" ? SteadyForm::printed_verbatim : SteadyForm::oracle_fitted;
  const auto sol = solve_riccati(red, c.t0, form);
  const auto grid = interior_grid(sol, static_cast<std::size_t>(c.points));
  const auto r = residual_closed_form(sol, red, grid);

  Json j = header("closed-form");
  j["n"] = *c.n;
  j["initial"] = {{"t0", c.t0}, {"u0", *c.u0}, {"u", c.u}};
  j["caseTag"] = to_string(sol.caseTag);
  j["branch"] = to_string(sol.curve.branch);
  j["form"] = c.form;
  j["constants"] = {{"b", red.b},         {"C", red.C},           {"l0", red.l0},
                    {"aSum", red.aSum},   {"D", sol.curve.D},     {"C1", sol.curve.C1},
                    {"D1", sol.curve.D1}, {"tPole", sol.curve.tPole},
                    {"amplitude", sol.amplitude}};
  j["domain"] = {bound(sol.domain().lower), bound(sol.domain().upper)};
  j["blowup"] = {{"forward", number_or_null(blowup_time(sol, 1))},
                 {"backward", number_or_null(blowup_time(sol, -1))}};
  j["residuals"] = {{"riccati", r.maxRiccati},
                    {"algebraic", r.maxAlgebraic},
                    {"logDerivative", r.maxLogDeriv},
                    {"max", r.maxAbs()},
                    {"points", grid.size()},
                    {"grid", {grid.front(), grid.back()}}};
  StagedWriter files;
  if (!c.out.empty()) files.add(c.out, render(j));
  if (!c.profileOut.empty()) {
    // Central part of the domain: near a pole the curvature grows like the
    // inverse square distance and finite differences of S lose accuracy.
    const auto span = interior_grid(sol, 2, c.profileFraction);
    const auto count = static_cast<std::size_t>(std::ceil((span[1] - span[0]) / c.profileStep)) + 1;
    if (count > 10'000'000) throw ParameterError("--profile-step too small for the domain");
    const auto profileGrid = interior_grid(sol, std::max<std::size_t>(count, 5), c.profileFraction);
    const std::vector<double> ones(c.u.size(), 1.0);
    const auto profile = steady_profile(sol, red, profileGrid, ones, 0.0);
    files.add(c.profileOut, profile_csv(profile));
    files.add(sidecar_path(c.profileOut), render(profile_header(profile)));
  }
  emit(out, j, files);
  return ok;
}

struct ScanSample {
  double u0 = 0.0;
  std::vector<double> u;
  Json result;
};

inline Json scan_direction(const FlatIntegrationResult& res, std::optional<double> oracle) {
  Json j;
  j["terminationReason"] = to_string(res.terminationReason());
  j["blowupEstimate"] = number_or_null(res.blowupEstimate());
  j["oracle"] = number_or_null(oracle);
  if (res.blowupEstimate() && oracle) {
    j["error"] = std::abs(*res.blowupEstimate() - *oracle);
  } else {
    j["error"] = nullptr;
  }
  return j;
}

inline int run_scan_blowup(const RunConfig& c, std::ostream& out) {
  const int n = *c.n;
  const std::size_t m = static_cast<std::size_t>(n - 1);
  std::mt19937_64 rng(c.seed);
  std::vector<ScanSample> samples(static_cast<std::size_t>(c.samples));
  for (auto& s : samples) {
    s.u0 = c.range * (2.0 * unit_uniform(rng) - 1.0);
    s.u.resize(m);
    for (auto& x : s.u) x = c.range * (2.0 * unit_uniform(rng) - 1.0);
  }

  FlatIntegrationOptions opt;
  opt.tol = c.tol;
  opt.blowupThreshold = c.blowupThreshold;
  opt.recordOnlyOutputs = true;
  parallel_for(samples.size(), [&](std::size_t i) {
    auto& s = samples[i];
    const FlatSolitonState init{0.0, s.u0, s.u};
    const auto red = reduce(init);
    std::optional<double> fwdOracle, bwdOracle;
    Json j;
    j["index"] = i;
    j["u0"] = s.u0;
    j["u"] = s.u;
    j["b"] = red.b;
    j["C"] = red.C;
    if (red.b > 0.0) {
      const auto sol = solve_riccati(red, 0.0);
      fwdOracle = blowup_time(sol, 1);
      bwdOracle = blowup_time(sol, -1);
      j["caseTag"] = to_string(sol.caseTag);
    } else {
      j["caseTag"] = nullptr;
    }
    const auto fwd = integrate(init, 0.0, n, CoefficientConvention::corrected, {0.0, c.tMax}, opt);
    const auto bwd = integrate(init, 0.0, n, CoefficientConvention::corrected, {0.0, -c.tMax}, opt);
    // Poles beyond the scanned window are not expected to be found.
    if (fwdOracle && *fwdOracle > c.tMax) fwdOracle.reset();
    if (bwdOracle && *bwdOracle < -c.tMax) bwdOracle.reset();
    j["forward"] = scan_direction(fwd, fwdOracle);
    j["backward"] = scan_direction(bwd, bwdOracle);
    j["incomplete"] = fwd.terminationReason() == TerminationReason::blowup_detected ||
                      bwd.terminationReason() == TerminationReason::blowup_detected;
    s.result = std::move(j);
  });

  Json j = header("scan-blowup");
  j["n"] = n;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["range"] = c.range;
  j["tMax"] = c.tMax;
  double worst = 0.0;
  bool allIncomplete = true;
  bool anyFailure = false;
  int mismatches = 0;
  Json results = Json::array();
  for (auto& s : samples) {
    for (const char* dir : {"forward", "backward"}) {
      const auto& e = s.result[dir]["error"];
      if (e.is_number()) worst = std::max(worst, e.get<double>());
      if (s.result[dir]["terminationReason"] == to_string(TerminationReason::step_underflow))
        anyFailure = true;
      if (s.result[dir]["oracle"].is_null() != s.result[dir]["blowupEstimate"].is_null())
        ++mismatches;
    }
    if (s.result["b"].get<double>() > 0.0 && !s.result["incomplete"].get<bool>())
      allIncomplete = false;
    results.push_back(std::move(s.result));
  }
  j["maxBlowupError"] = worst;
  j["allIncomplete"] = allIncomplete;
  j["oracleMismatches"] = mismatches;
  j["results"] = std::move(results);
  StagedWriter files;
  if (!c.out.empty()) files.add(c.out, render(j));
  emit(out, j, files);
  return anyFailure ? numeric_failure : ok;
}

template <class Profile>
Json verify_profile(const Profile& p, const EllipticWindow& window, double gate, bool& pass) {
  const auto ham = hamilton_monitor(p);
  Json j;
  j["n"] = p.n;
  j["lambda"] = p.lambda;
  j["provenance"] = p.provenance;
  j["gridSpan"] = {ham.spanStart, ham.spanEnd};
  j["points"] = p.size();
  j["convention"] = ham.convention;
  j["hamiltonConstant"] = ham.hamilton_value();
  j["hamiltonDrift"] = ham.hamiltonDrift;
  j["hamiltonRelativeDrift"] = ham.hamiltonRelativeDrift;
  const double sol = soliton_residual(p).maxAbs;
  j["solitonResidual"] = sol;
  pass = ham.hamiltonRelativeDrift <= gate && sol <= gate;
  if (p.size() >= 5) {
    const double ell = *elliptic_monitor(p, window).ellipticResidual;
    j["ellipticResidual"] = ell;
    pass = pass && ell <= gate;
  } else {
    j["ellipticResidual"] = nullptr;
  }
  return j;
}

inline int run_verify(const RunConfig& c, std::ostream& out) {
  EllipticWindow window;
  if (c.windowFrom) window.from = *c.windowFrom;
  if (c.windowTo) window.to = *c.windowTo;
  const std::string kind = profile_kind(c.profileIn);
  bool pass = false;
  Json body;
  if (kind == "diagonal") {
    const auto p = read_diagonal_profile(c.profileIn);
    body = verify_profile(p, window, c.gate, pass);
    body["structuralResidual"] = structural_eq_check(p);
  } else if (kind == "warped") {
    const auto p = read_warped_profile(c.profileIn);
    body = verify_profile(p, window, c.gate, pass);
    body["mu"] = p.mu;
  } else {
    throw IoError(c.profileIn + ": unknown profile kind '" + kind + "'");
  }
  Json j = header("verify");
  j.update(body);
  j["kind"] = kind;
  j["gate"] = c.gate;
  j["pass"] = pass;
  StagedWriter files;
  if (!c.out.empty()) files.add(c.out, render(j));
  emit(out, j, files);
  return pass ? ok : gate_failure;
}

inline int run_dims(const RunConfig& c, std::ostream& out) {
  if (c.table) {
    const auto rows = bound_table(*c.table);
    if (c.format == "text") {
      out << std::setw(8) << "n" << std::setw(14) << "kobayashi" << std::setw(14) << "solitonMax"
          << std::setw(14) << "gapCeiling" << "\n";
      for (const auto& r : rows) {
        out << std::setw(8) << r.n << std::setw(14) << r.kobayashi << std::setw(14)
            << r.solitonMax << std::setw(14) << r.gapCeiling << "\n";
      }
      return ok;
    }
    Json j = header("dims");
    Json arr = Json::array();
    for (const auto& r : rows)
      arr.push_back({{"n", r.n},
                     {"kobayashi", r.kobayashi},
                     {"solitonMax", r.solitonMax},
                     {"gapCeiling", r.gapCeiling}});
    j["table"] = std::move(arr);
    out << render(j);
    return ok;
  }
  const auto v = classify(*c.n, *c.d);
  if (c.format == "text") {
    out << "n = " << v.n << ", d = " << v.d << ": " << to_string(v.verdict) << "\n"
        << "  kobayashi  " << v.bounds.kobayashi << "\n"
        << "  solitonMax " << v.bounds.solitonMax << "\n"
        << "  gapCeiling " << v.bounds.gapCeiling << "\n";
    return ok;
  }
  Json j = header("dims");
  j["n"] = v.n;
  j["d"] = v.d;
  j["verdict"] = to_string(v.verdict);
  j["bounds"] = {{"kobayashi", v.bounds.kobayashi},
                 {"solitonMax", v.bounds.solitonMax},
                 {"gapCeiling", v.bounds.gapCeiling}};
  j["conditional"] = "non-trivial irreducible gradient Ricci soliton";
  out << render(j);
  return ok;
}

}  // namespace detail

inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    if (c.command == "integrate-flat") return detail::run_integrate_flat(c, out);
    if (c.command == "integrate-warped") return detail::run_integrate_warped(c, out);
    if (c.command == "bryant") return detail::run_bryant(c, out);
    if (c.command == "closed-form") return detail::run_closed_form(c, out);
    if (c.command == "scan-blowup") return detail::run_scan_blowup(c, out);
    if (c.command == "verify") return detail::run_verify(c, out);
    if (c.command == "dims") return detail::run_dims(c, out);
    err << "error: unknown command '" << c.command << "'\n";
    return usage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return io_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return numeric_failure;
  }
}

// Full entry point: parse, run, map errors to exit codes.
inline int main_entry(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(std::move(args));
  } catch (const HelpRequested& h) {
    out << h.what();
    return ok;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  }
  return run(cfg, out, err);
}

}  // namespace soliton_lab::cli
