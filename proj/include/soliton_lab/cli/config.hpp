#pragma once

// Command-line configuration for the soliton_lab tool.
//
// Every subcommand reads long flags (--n 3, --u 1,1, --span 0:0.4). A flat
// key = value file given with --config supplies defaults: each key is a
// flag name of the chosen subcommand (or "command" to pick one), and flags
// on the command line win over file keys. Unknown keys are usage errors.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "soliton_lab/convention.hpp"
#include "soliton_lab/integrator.hpp"
#include "soliton_lab/profile_io.hpp"

namespace soliton_lab::cli {

enum ExitCode : int { ok = 0, gate_failure = 1, usage = 2, numeric_failure = 3, io_failure = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown for --help; carries the rendered help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"integrate-flat", "integrate-warped", "closed-form",
                                              "scan-blowup",    "bryant",           "verify",
                                              "dims"};
  return names;
}

struct RunConfig {
  std::string command;

  std::optional<int> n;
  double lambda = 0.0;
  std::optional<double> mu;
  std::optional<double> u0;
  std::vector<double> u;
  std::optional<double> F;
  std::optional<double> w;
  std::string spanText;
  TimeSpan span;
  Tolerances tol;
  double blowupThreshold = 1e8;
  double step = 0.0;  // > 0: record on a uniform grid instead of at every step
  CoefficientConvention convention = CoefficientConvention::corrected;

  // bryant
  double epsilon = 1e-3;
  double c1 = -1.0;
  double tEnd = 50.0;

  // closed-form
  double t0 = 0.0;
  std::string form = "oracle";
  int points = 1000;
  double profileFraction = 0.5;
  double profileStep = 1e-3;

  // scan-blowup
  std::uint64_t seed = 0;
  int samples = 100;
  double range = 2.0;
  double tMax = 50.0;

  // verify
  std::string profileIn;
  double gate = 1e-6;
  std::optional<double> windowFrom;
  std::optional<double> windowTo;

  // dims
  std::optional<std::int64_t> d;
  std::optional<std::int64_t> table;
  std::string format = "json";

  // artifacts
  std::string out;          // primary CSV (or JSON for scan-blowup)
  std::string profileOut;   // reconstructed profile CSV + sidecar
};

namespace detail {

inline TimeSpan parse_span(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError("--span expects start:end, got '" + s + "'");
  try {
    TimeSpan sp{parse_double(s.substr(0, colon)), parse_double(s.substr(colon + 1))};
    if (!std::isfinite(sp.start) || !std::isfinite(sp.end) || sp.start == sp.end)
      throw UsageError("--span needs finite, distinct end points");
    return sp;
  } catch (const IoError&) {
    throw UsageError("--span expects start:end, got '" + s + "'");
  }
}

inline std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

// key = value lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw UsageError(path.string() + ":" + std::to_string(lineNo) + ": expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw UsageError(path.string() + ":" + std::to_string(lineNo) + ": empty key");
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

inline bool flag_present(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

struct Cli {
  CLI::App app{"Numerical laboratory for cohomogeneity-one gradient Ricci solitons",
               "soliton_lab"};
  RunConfig cfg;
  std::string configPath;
  std::string conventionText = "corrected";

  Cli() {
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", configPath, "flat key = value file with default flags");
    auto tolerances = [&](CLI::App* s) {
      s->add_option("--rtol", cfg.tol.rel, "relative tolerance")->capture_default_str();
      s->add_option("--atol", cfg.tol.abs, "absolute tolerance")->capture_default_str();
      s->add_option("--threshold", cfg.blowupThreshold, "blow-up threshold on |state|")
          ->capture_default_str();
    };
    auto outputs = [&](CLI::App* s) {
      s->add_option("--out", cfg.out, "trajectory CSV (summary JSON goes next to it)");
      s->add_option("--profile", cfg.profileOut, "write the reconstructed profile CSV + JSON");
      s->add_option("--step", cfg.step, "record on a uniform grid with this spacing");
    };

    auto* flat = app.add_subcommand("integrate-flat", "integrate the flat-fiber system");
    flat->add_option("--n", cfg.n, "dimension (>= 3)")->required();
    flat->add_option("--lambda", cfg.lambda, "soliton constant")->capture_default_str();
    flat->add_option("--u0", cfg.u0, "f' at the start")->required();
    flat->add_option("--u", cfg.u, "h_i'/h_i at the start, comma separated")
        ->required()
        ->delimiter(',');
    flat->add_option("--span", cfg.spanText, "start:end")->required();
    flat->add_option("--convention", conventionText, "corrected | as-printed")
        ->capture_default_str();
    tolerances(flat);
    outputs(flat);

    auto* warped = app.add_subcommand("integrate-warped", "integrate the Einstein-fiber system");
    warped->add_option("--n", cfg.n, "dimension (>= 3)")->required();
    warped->add_option("--mu", cfg.mu, "fiber Einstein constant (default n - 2)");
    warped->add_option("--lambda", cfg.lambda, "soliton constant")->capture_default_str();
    warped->add_option("--F", cfg.F, "warping F at the start (> 0)")->required();
    warped->add_option("--w", cfg.w, "F'/F at the start")->required();
    warped->add_option("--u0", cfg.u0, "f' at the start")->required();
    warped->add_option("--span", cfg.spanText, "start:end")->required();
    tolerances(warped);
    outputs(warped);

    auto* bryant = app.add_subcommand("bryant", "series-started steady soliton on R^n");
    bryant->add_option("--n", cfg.n, "dimension (>= 3), default 3");
    bryant->add_option("--epsilon", cfg.epsilon, "series start")->capture_default_str();
    bryant->add_option("--c1", cfg.c1, "f''(0) < 0")->capture_default_str();
    bryant->add_option("--t-end", cfg.tEnd, "end of integration")->capture_default_str();
    tolerances(bryant);
    outputs(bryant);

    auto* closed = app.add_subcommand("closed-form", "steady closed-form solution");
    closed->add_option("--n", cfg.n, "dimension, must equal (number of --u entries) + 1");
    closed->add_option("--u0", cfg.u0, "f' at t0")->required();
    closed->add_option("--u", cfg.u, "h_i'/h_i at t0 with h(t0) = 1")->required()->delimiter(',');
    closed->add_option("--t0", cfg.t0, "initial time")->capture_default_str();
    closed->add_option("--form", cfg.form, "oracle | printed")->capture_default_str();
    closed->add_option("--points", cfg.points, "residual grid size")->capture_default_str();
    closed->add_option("--out", cfg.out, "summary JSON");
    closed->add_option("--profile", cfg.profileOut, "profile CSV + JSON");
    closed->add_option("--profile-fraction", cfg.profileFraction,
                       "profile covers this central fraction of the domain")
        ->capture_default_str();
    closed->add_option("--profile-step", cfg.profileStep, "profile grid spacing")
        ->capture_default_str();

    auto* scan = app.add_subcommand("scan-blowup", "random steady states against closed form");
    scan->add_option("--n", cfg.n, "dimension (>= 3)")->required();
    scan->add_option("--samples", cfg.samples, "number of samples")->capture_default_str();
    scan->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    scan->add_option("--range", cfg.range, "components uniform in [-range, range]")
        ->capture_default_str();
    scan->add_option("--t-max", cfg.tMax, "integrate to +-t-max")->capture_default_str();
    tolerances(scan);
    scan->add_option("--out", cfg.out, "result JSON");

    auto* verify = app.add_subcommand("verify", "identity monitors on a stored profile");
    verify->add_option("--profile", cfg.profileIn, "profile CSV (with JSON sidecar)")->required();
    verify->add_option("--gate", cfg.gate, "pass threshold")->capture_default_str();
    verify->add_option("--from", cfg.windowFrom, "ignore elliptic residual before this t");
    verify->add_option("--to", cfg.windowTo, "ignore elliptic residual after this t");
    verify->add_option("--out", cfg.out, "report JSON");

    auto* dims = app.add_subcommand("dims", "isometry dimension classifier");
    dims->add_option("n,--n", cfg.n, "dimension");
    dims->add_option("d,--d", cfg.d, "isometry algebra dimension");
    dims->add_option("--table", cfg.table, "bounds for n = 3..N");
    dims->add_option("--format", cfg.format, "json | text")->capture_default_str();
  }

  CLI::App* subcommand(const std::string& name) {
    for (auto* s : app.get_subcommands({})) {
      if (s->get_name() == name) return s;
    }
    return nullptr;
  }
};

inline void validate(RunConfig& c, const std::string& conventionText) {
  const auto& cmd = c.command;
  if (cmd == "bryant" && !c.n) c.n = 3;
  if (cmd == "closed-form") {
    const int implied = static_cast<int>(c.u.size()) + 1;
    if (c.n && *c.n != implied)
      throw UsageError("--n " + std::to_string(*c.n) + " does not match " +
                       std::to_string(c.u.size()) + " --u entries");
    c.n = implied;
  }
  if (cmd != "verify" && cmd != "dims") {
    if (!c.n || *c.n < 3) throw UsageError("--n must be an integer >= 3");
    if (!(c.tol.rel > 0.0) || !(c.tol.abs > 0.0)) throw UsageError("tolerances must be positive");
    if (!(c.blowupThreshold > 0.0)) throw UsageError("--threshold must be positive");
    if (!std::isfinite(c.lambda)) throw UsageError("--lambda must be finite");
    if (c.step < 0.0 || !std::isfinite(c.step)) throw UsageError("--step must be >= 0");
  }
  const auto conv = parse_convention(conventionText);
  if (!conv) throw UsageError("--convention must be corrected or as-printed");
  c.convention = *conv;

  if (cmd == "integrate-flat") {
    if (c.u.size() != static_cast<std::size_t>(*c.n - 1))
      throw UsageError("--u needs n - 1 = " + std::to_string(*c.n - 1) + " entries");
    c.span = parse_span(c.spanText);
  } else if (cmd == "integrate-warped") {
    if (!c.mu) c.mu = *c.n - 2;
    if (!(*c.F > 0.0)) throw UsageError("--F must be positive");
    c.span = parse_span(c.spanText);
  } else if (cmd == "bryant") {
    if (!(c.epsilon > 0.0) || !(c.epsilon < c.tEnd))
      throw UsageError("bryant needs 0 < epsilon < t-end");
    if (!(c.c1 < 0.0)) throw UsageError("--c1 must be negative");
  } else if (cmd == "closed-form") {
    if (c.form != "oracle" && c.form != "printed") throw UsageError("--form must be oracle or printed");
    if (c.points < 2) throw UsageError("--points must be >= 2");
    if (!(c.profileFraction > 0.0 && c.profileFraction < 1.0) || !(c.profileStep > 0.0))
      throw UsageError("--profile-fraction must lie in (0, 1) and --profile-step be positive");
    if (c.form == "printed" && !c.profileOut.empty())
      throw UsageError("--profile is only available for --form oracle");
  } else if (cmd == "scan-blowup") {
    if (c.samples < 0) throw UsageError("--samples must be >= 0");
    if (!(c.range > 0.0) || !(c.tMax > 0.0)) throw UsageError("--range and --t-max must be positive");
  } else if (cmd == "verify") {
    if (!(c.gate > 0.0)) throw UsageError("--gate must be positive");
  } else if (cmd == "dims") {
    if (c.table) {
      if (c.d) throw UsageError("dims takes either n d or --table N, not both");
      if (*c.table < 3) throw UsageError("--table needs N >= 3");
    } else {
      if (!c.n || !c.d) throw UsageError("dims needs n and d (or --table N)");
      if (*c.n < 3) throw UsageError("dims needs n >= 3");
      if (*c.d < 0) throw UsageError("dims needs d >= 0");
    }
    if (c.format != "json" && c.format != "text") throw UsageError("--format must be json or text");
  }
}

}  // namespace detail

// args excludes the program name.
inline RunConfig parse_config(std::vector<std::string> args) {
  detail::Cli cli;

  // Locate --config and the subcommand before CLI11 sees anything, so file
  // keys can be checked against the right option set.
  std::optional<std::string> configFile;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) configFile = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) configFile = args[i].substr(9);
  }
  auto commandIt = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    const auto& names = command_names();
    return std::find(names.begin(), names.end(), a) != names.end();
  });

  if (configFile) {
    const auto kv = detail::read_config_file(*configFile);
    std::string command = commandIt != args.end() ? *commandIt : "";
    for (const auto& [key, value] : kv) {
      if (key != "command") continue;
      if (command.empty()) {
        command = value;
        args.push_back(value);
        commandIt = args.end() - 1;
      }
    }
    if (command.empty()) throw UsageError("no subcommand given on the command line or in the config");
    auto* sub = cli.subcommand(command);
    if (!sub) throw UsageError("unknown command '" + command + "'");
    const std::vector<std::string> before(args.begin(), args.end());
    for (const auto& [key, value] : kv) {
      if (key == "command" || key == "config") continue;
      if (!sub->get_option_no_throw("--" + key))
        throw UsageError("unknown config key '" + key + "' for " + command);
      if (detail::flag_present(before, key)) continue;
      args.push_back("--" + key);
      args.push_back(value);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    cli.app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(cli.app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(cli.app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  for (auto* s : cli.app.get_subcommands()) cli.cfg.command = s->get_name();
  detail::validate(cli.cfg, cli.conventionText);
  return cli.cfg;
}

}  // namespace soliton_lab::cli
