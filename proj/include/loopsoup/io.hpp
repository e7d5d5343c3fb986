#pragma once

// Serialization for the command-line surface: loop soups as JSONL, fields as
// CSV, run manifests as JSON, plus domain-spec parsing and an optional
// on-disk cache for expensive determinant values (LOOPSOUP_CACHE_DIR).

#include <json.hpp>

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsoup/lattice.hpp"

namespace loopsoup {

// Shortest round-trippable decimal form; stable across runs.
inline std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Loop soups: one loop per line, {"root":[i,j],"steps":"NESW..."}.
// ---------------------------------------------------------------------------

inline void write_loops_jsonl(std::ostream& os,
                              const std::vector<LatticeLoop>& soup) {
  for (const LatticeLoop& loop : soup) {
    nlohmann::json j;
    j["root"] = {loop.root.first, loop.root.second};
    j["steps"] = loop.steps;
    os << j.dump() << '\n';
  }
}

inline std::vector<LatticeLoop> read_loops_jsonl(std::istream& is) {
  std::vector<LatticeLoop> soup;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    LatticeLoop loop{{j.at("root").at(0).get<int>(), j.at("root").at(1).get<int>()},
                     j.at("steps").get<std::string>()};
    soup.push_back(std::move(loop));
  }
  return soup;
}

// ---------------------------------------------------------------------------
// Fields: CSV with lattice coordinates plus one or two value columns.
// ---------------------------------------------------------------------------

inline void write_vertex_field_csv(std::ostream& os, const Domain& d,
                                   const Eigen::VectorXd& values,
                                   const std::string& name = "value") {
  os << "i,j," << name << '\n';
  for (std::size_t v = 0; v < d.vertices().size(); ++v) {
    auto [i, j] = d.vertices()[v];
    os << csv_join({std::to_string(i), std::to_string(j),
                    g17(values[static_cast<int>(v)])});
  }
}

inline void write_face_field_csv(std::ostream& os, const Domain& d,
                                 const std::vector<double>& values,
                                 const std::string& name = "value") {
  os << "i,j," << name << '\n';
  for (std::size_t f = 0; f < d.faces().size(); ++f) {
    auto [i, j] = d.faces()[f];
    os << csv_join({std::to_string(i), std::to_string(j), g17(values[f])});
  }
}

inline void write_face_field_csv(std::ostream& os, const Domain& d,
                                 const std::vector<int>& values,
                                 const std::string& name = "value") {
  os << "i,j," << name << '\n';
  for (std::size_t f = 0; f < d.faces().size(); ++f) {
    auto [i, j] = d.faces()[f];
    os << csv_join({std::to_string(i), std::to_string(j),
                    std::to_string(values[f])});
  }
}

// Complex-valued face field (winding fields at general angles).
inline void write_face_field_csv(std::ostream& os, const Domain& d,
                                 const std::vector<double>& re,
                                 const std::vector<double>& im) {
  os << "i,j,re,im\n";
  for (std::size_t f = 0; f < d.faces().size(); ++f) {
    auto [i, j] = d.faces()[f];
    os << csv_join({std::to_string(i), std::to_string(j), g17(re[f]), g17(im[f])});
  }
}

// ---------------------------------------------------------------------------
// Domain specs: square:N, rect:WxH (or bare WxH), disk:R, faces:i,j;i,j;...
// The mesh is supplied separately; face coordinates are lattice integers.
// ---------------------------------------------------------------------------

inline Domain parse_domain(const std::string& spec, double mesh) {
  auto fail = [&] {
    throw std::invalid_argument("bad domain spec: " + spec);
  };
  std::string kind = "rect", body = spec;
  if (auto c = spec.find(':'); c != std::string::npos) {
    kind = spec.substr(0, c);
    body = spec.substr(c + 1);
  }
  if (kind == "square") {
    int n = 0;
    if (std::sscanf(body.c_str(), "%d", &n) != 1 || n < 1) fail();
    return Domain::square(n, mesh);
  }
  if (kind == "rect") {
    int w = 0, h = 0;
    if (std::sscanf(body.c_str(), "%dx%d", &w, &h) != 2 || w < 1 || h < 1) fail();
    return Domain::rectangle(w, h, mesh);
  }
  if (kind == "disk") {
    double r = 0;
    if (std::sscanf(body.c_str(), "%lf", &r) != 1 || !(r > 0)) fail();
    return Domain::disk(r, mesh);
  }
  if (kind == "faces") {
    std::vector<Cell> faces;
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
      int i = 0, j = 0;
      if (std::sscanf(tok.c_str(), "%d,%d", &i, &j) != 2) fail();
      faces.push_back({i, j});
    }
    if (faces.empty()) fail();
    return Domain(faces, mesh);
  }
  fail();
  return Domain({}, mesh);  // unreachable
}

// ---------------------------------------------------------------------------
// Run manifests.
// ---------------------------------------------------------------------------

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json run_manifest(const std::string& command,
                                   const nlohmann::json& params,
                                   const std::vector<std::string>& outputs) {
  nlohmann::json m;
  m["command"] = command;
  m["params"] = params;
  m["outputs"] = outputs;
  m["written_at"] = utc_timestamp();
  return m;
}

inline void write_manifest(const std::string& path, const nlohmann::json& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest: " + path);
  os << m.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Keyed value cache, enabled by LOOPSOUP_CACHE_DIR.  Keys are canonical
// strings; the stored key is compared on lookup so hash collisions cannot
// return a wrong value.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::optional<std::string> cache_dir() {
  const char* dir = std::getenv("LOOPSOUP_CACHE_DIR");
  if (!dir || !*dir) return std::nullopt;
  return std::string(dir);
}

inline std::optional<double> cache_lookup(const std::string& key) {
  auto dir = cache_dir();
  if (!dir) return std::nullopt;
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.json",
                static_cast<unsigned long long>(fnv1a(key)));
  std::ifstream is(*dir + "/" + name);
  if (!is) return std::nullopt;
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (!j.contains("key") || j["key"] != key) return std::nullopt;
  return j["value"].get<double>();
}

inline void cache_store(const std::string& key, double value) {
  auto dir = cache_dir();
  if (!dir) return;
  std::error_code ec;
  std::filesystem::create_directories(*dir, ec);
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.json",
                static_cast<unsigned long long>(fnv1a(key)));
  std::ofstream os(*dir + "/" + name);
  if (!os) return;  // cache is best-effort
  nlohmann::json j;
  j["key"] = key;
  j["value"] = value;
  os << j.dump() << '\n';
}

}  // namespace loopsoup
