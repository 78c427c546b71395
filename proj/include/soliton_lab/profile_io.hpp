#pragma once

// Profile persistence: a columnar CSV plus a JSON sidecar with the metadata.
//
//   diagonal:  t,h1..hm,hp1..hpm,hpp1..hppm,f,fp,fpp     (m = n - 1)
//   warped:    t,F,Fp,Fpp,f,fp,fpp
//
// Numbers are written as shortest round-trip decimals. Writes are atomic:
// every file goes to a sibling temporary first and is renamed into place
// only once all files of a batch have been written.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "soliton_lab/convention.hpp"
#include "soliton_lab/curvature.hpp"
#include "soliton_lab/errors.hpp"

namespace soliton_lab {

inline constexpr int kSchemaVersion = 1;

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw IoError("not a number: '" + std::string(s) + "'");
  return v;
}

// A batch of files that appear together or not at all.
class StagedWriter {
 public:
  void add(std::filesystem::path path, std::string contents) {
    files_.emplace_back(std::move(path), std::move(contents));
  }

  void commit() {
    std::vector<std::filesystem::path> temps;
    auto cleanup = [&] {
      std::error_code ec;
      for (const auto& t : temps) std::filesystem::remove(t, ec);
    };
    for (const auto& [path, contents] : files_) {
      auto tmp = path;
      tmp += ".tmp";
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) {
        cleanup();
        throw IoError("cannot write " + path.string());
      }
      temps.push_back(tmp);
      out << contents;
      out.close();
      if (!out) {
        cleanup();
        throw IoError("write failed for " + path.string());
      }
    }
    // Existing targets are parked until every rename has gone through, so a
    // failure part way restores the previous state.
    std::vector<std::filesystem::path> parked(files_.size());
    std::size_t placed = 0;
    auto rollback = [&] {
      std::error_code ec;
      for (std::size_t i = 0; i < placed; ++i) std::filesystem::remove(files_[i].first, ec);
      for (std::size_t i = 0; i < files_.size(); ++i)
        if (!parked[i].empty()) std::filesystem::rename(parked[i], files_[i].first, ec);
      cleanup();
    };
    for (std::size_t i = 0; i < files_.size(); ++i) {
      std::error_code ec;
      const auto& target = files_[i].first;
      if (std::filesystem::is_regular_file(target, ec)) {
        auto bak = target;
        bak += ".bak";
        std::filesystem::rename(target, bak, ec);
        if (ec) {
          rollback();
          throw IoError("cannot replace " + target.string() + ": " + ec.message());
        }
        parked[i] = bak;
      }
      std::filesystem::rename(temps[i], target, ec);
      if (ec) {
        rollback();
        throw IoError("cannot rename into " + target.string() + ": " + ec.message());
      }
      ++placed;
    }
    for (const auto& b : parked) {
      std::error_code ec;
      if (!b.empty()) std::filesystem::remove(b, ec);
    }
    files_.clear();
  }

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

namespace detail {

inline std::string csv_line(const std::vector<double>& row) {
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) line += ',';
    line += format_double(row[i]);
  }
  line += '\n';
  return line;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline Table read_csv(const std::filesystem::path& p) {
  std::istringstream in(read_file(p));
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(p.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    if (cells.size() != t.header.size())
      throw IoError(p.string() + ": row " + std::to_string(t.rows.size() + 1) + " has " +
                    std::to_string(cells.size()) + " columns, expected " +
                    std::to_string(t.header.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::vector<std::string> diagonal_header(int n) {
  std::vector<std::string> h{"t"};
  for (const char* prefix : {"h", "hp", "hpp"})
    for (int i = 1; i < n; ++i) h.push_back(prefix + std::to_string(i));
  for (const char* c : {"f", "fp", "fpp"}) h.emplace_back(c);
  return h;
}

inline const std::vector<std::string>& warped_header() {
  static const std::vector<std::string> h{"t", "F", "Fp", "Fpp", "f", "fp", "fpp"};
  return h;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += v[i];
  }
  return s + '\n';
}

}  // namespace detail

inline nlohmann::json profile_header(const DiagonalProfile& p) {
  nlohmann::json j;
  j["schemaVersion"] = kSchemaVersion;
  j["kind"] = "diagonal";
  j["n"] = p.n;
  j["lambda"] = p.lambda;
  j["provenance"] = p.provenance;
  j["convention"] = p.convention ? nlohmann::json(to_string(*p.convention)) : nlohmann::json();
  return j;
}

inline nlohmann::json profile_header(const WarpedProfile& p) {
  nlohmann::json j;
  j["schemaVersion"] = kSchemaVersion;
  j["kind"] = "warped";
  j["n"] = p.n;
  j["lambda"] = p.lambda;
  j["mu"] = p.mu;
  j["provenance"] = p.provenance;
  return j;
}

inline std::string profile_csv(const DiagonalProfile& p) {
  p.validate();
  const std::size_t m = static_cast<std::size_t>(p.n - 1);
  std::string out = detail::join(detail::diagonal_header(p.n));
  std::vector<double> row;
  for (std::size_t k = 0; k < p.size(); ++k) {
    row.assign(1, p.grid[k]);
    for (const auto* a : {&p.h, &p.hPrime, &p.hDoublePrime})
      for (std::size_t i = 0; i < m; ++i) row.push_back((*a)[k][i]);
    row.push_back(p.f[k]);
    row.push_back(p.fPrime[k]);
    row.push_back(p.fDoublePrime[k]);
    out += detail::csv_line(row);
  }
  return out;
}

inline std::string profile_csv(const WarpedProfile& p) {
  p.validate();
  std::string out = detail::join(detail::warped_header());
  for (std::size_t k = 0; k < p.size(); ++k) {
    out += detail::csv_line({p.grid[k], p.F[k], p.FPrime[k], p.FDoublePrime[k], p.f[k],
                             p.fPrime[k], p.fDoublePrime[k]});
  }
  return out;
}

// Writes path (CSV) and its .json sidecar atomically.
template <class Profile>
void write_profile(const Profile& p, const std::filesystem::path& csv) {
  StagedWriter w;
  w.add(csv, profile_csv(p));
  w.add(sidecar_path(csv), profile_header(p).dump(2) + "\n");
  w.commit();
}

inline nlohmann::json read_sidecar(const std::filesystem::path& csv) {
  try {
    return nlohmann::json::parse(detail::read_file(sidecar_path(csv)));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(sidecar_path(csv).string() + ": " + e.what());
  }
}

// "diagonal" or "warped", from the sidecar.
inline std::string profile_kind(const std::filesystem::path& csv) {
  const auto j = read_sidecar(csv);
  if (!j.contains("kind") || !j["kind"].is_string())
    throw IoError(sidecar_path(csv).string() + ": missing kind");
  return j["kind"].get<std::string>();
}

inline DiagonalProfile read_diagonal_profile(const std::filesystem::path& csv) {
  const auto j = read_sidecar(csv);
  DiagonalProfile p;
  try {
    if (j.at("kind") != "diagonal") throw IoError(csv.string() + ": not a diagonal profile");
    p.n = j.at("n").get<int>();
    p.lambda = j.at("lambda").get<double>();
    p.provenance = j.value("provenance", "");
    if (j.contains("convention") && j["convention"].is_string()) {
      p.convention = parse_convention(j["convention"].get<std::string>());
      if (!p.convention) throw IoError(csv.string() + ": unknown convention");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(sidecar_path(csv).string() + ": " + e.what());
  }
  if (p.n < 3) throw IoError(sidecar_path(csv).string() + ": n must be >= 3");
  const auto table = detail::read_csv(csv);
  if (table.header != detail::diagonal_header(p.n))
    throw IoError(csv.string() + ": unexpected columns for n = " + std::to_string(p.n));
  const std::size_t m = static_cast<std::size_t>(p.n - 1);
  for (const auto& row : table.rows) {
    p.grid.push_back(row[0]);
    p.h.emplace_back(row.begin() + 1, row.begin() + 1 + m);
    p.hPrime.emplace_back(row.begin() + 1 + m, row.begin() + 1 + 2 * m);
    p.hDoublePrime.emplace_back(row.begin() + 1 + 2 * m, row.begin() + 1 + 3 * m);
    p.f.push_back(row[1 + 3 * m]);
    p.fPrime.push_back(row[2 + 3 * m]);
    p.fDoublePrime.push_back(row[3 + 3 * m]);
  }
  p.validate();
  return p;
}

inline WarpedProfile read_warped_profile(const std::filesystem::path& csv) {
  const auto j = read_sidecar(csv);
  WarpedProfile p;
  try {
    if (j.at("kind") != "warped") throw IoError(csv.string() + ": not a warped profile");
    p.n = j.at("n").get<int>();
    p.lambda = j.at("lambda").get<double>();
    p.mu = j.at("mu").get<double>();
    p.provenance = j.value("provenance", "");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(sidecar_path(csv).string() + ": " + e.what());
  }
  const auto table = detail::read_csv(csv);
  if (table.header != detail::warped_header()) throw IoError(csv.string() + ": unexpected columns");
  for (const auto& row : table.rows) {
    p.grid.push_back(row[0]);
    p.F.push_back(row[1]);
    p.FPrime.push_back(row[2]);
    p.FDoublePrime.push_back(row[3]);
    p.f.push_back(row[4]);
    p.fPrime.push_back(row[5]);
    p.fDoublePrime.push_back(row[6]);
  }
  p.validate();
  return p;
}

}  // namespace soliton_lab
