// Copyright 2026 The hyfermi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Artifact serialization. Every artifact carries the schema version, the
// tool version and the resolved configuration, and nothing that depends on
// timing or worker count.

#pragma once

#include <cctype>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hyfermi/energy.hpp"
#include "hyfermi/errors.hpp"
#include "hyfermi/lattice.hpp"
#include "hyfermi/scattering.hpp"
#include "hyfermi/thermo.hpp"

#ifndef HYFERMI_VERSION
#define HYFERMI_VERSION "0.1.0"
#endif

namespace hyfermi::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchema = 1;
inline constexpr const char* kTool = "hyfermi";

inline Json artifact(const std::string& command, const Json& config, Json result) {
  Json j;
  j["schema"] = kSchema;
  j["tool"] = kTool;
  j["version"] = HYFERMI_VERSION;
  j["command"] = command;
  j["config"] = config;
  j["result"] = std::move(result);
  return j;
}

/// Shortest round-trip text of a double, the same digits JSON uses.
inline std::string num(double x) { return Json(x).dump(); }
inline std::string num(i64 x) { return std::to_string(x); }

inline std::string config_scalar(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// CSV artifact: provenance and config as leading `# key=value` lines,
/// then a header row and the data rows.
class CsvWriter {
 public:
  CsvWriter(const std::string& command, const Json& config, std::vector<std::string> header)
      : cols_(header.size()) {
    out_ << "# schema=" << kSchema << "\n# tool=" << kTool << "\n# version=" << HYFERMI_VERSION
         << "\n# command=" << command << "\n";
    for (const auto& [k, v] : config.items()) {
      out_ << "# " << k << "=";
      if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << config_scalar(v[i]);
      } else {
        out_ << config_scalar(v);
      }
      out_ << "\n";
    }
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_) throw ConfigError("CsvWriter: row width differs from the header");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

  std::string str() const { return out_.str(); }

 private:
  std::size_t cols_;
  std::ostringstream out_;
};

// ---------------------------------------------------------------------------
// Result records.

inline Json magic_json(const std::vector<MagicEntry>& rows) {
  Json a = Json::array();
  for (const auto& e : rows) a.push_back({{"R", e.R}, {"N", e.N}, {"kinetic_integer_sum", e.kinetic_integer_sum}});
  return {{"rows", a}};
}

inline Json ball_json(const FermiBall& b) {
  Json pts = Json::array();
  for (const auto& m : b.points) pts.push_back({m.x, m.y, m.z});
  return {{"R", b.R}, {"count", b.count}, {"kinetic_integer_sum", b.kinetic_integer_sum()}, {"points", pts}};
}

inline Json scattering_json(const ScatteringSolution& s, int grid) {
  Json g = Json::array();
  for (int i = 0; i <= grid; ++i) {
    const double y = s.L * double(i) / double(grid);
    g.push_back({{"y", y}, {"f", s.f(y)}});
  }
  return {{"a", s.a},     {"ell", s.ell}, {"lambda", s.lambda}, {"a0", s.a0},
          {"L", s.L},     {"steps", s.steps}, {"potential", s.potential.describe()}, {"grid", g}};
}

inline Json energy_json(const EnergyBreakdown& e) {
  Json d;
  d["tail_bound"] = e.diagnostics.tail_bound;
  d["n_terms"] = e.diagnostics.n_terms;
  if (e.diagnostics.probe_ratios) {
    const auto& p = *e.diagnostics.probe_ratios;
    d["probe_ratios"] = {{"L1_W", p.L1_W}, {"L1_eta", p.L1_eta}, {"xi_l2", p.xi_l2},
                         {"C_eta", p.C_eta}, {"C_W", p.C_W},     {"C_v", p.C_v}};
  } else {
    d["probe_ratios"] = nullptr;
  }
  d["first_order_remainder"] = e.diagnostics.first_order_remainder;
  d["frak_e_S_inf"] = e.diagnostics.frak_S_inf;
  d["frak_e_warning"] = e.diagnostics.frak_warning;
  d["scattering_note"] = e.diagnostics.scattering_note;

  Json j;
  j["kinetic"] = e.kinetic;
  j["first_simple"] = e.first_simple;
  j["first_full"] = e.first_full ? Json(*e.first_full) : Json(nullptr);
  j["second"] = e.second;
  j["frak_e"] = e.frak_e;
  j["surface"] = e.surface;
  j["diagnostics"] = d;
  return j;
}

inline const char* method_name(ContinuumMethod m) { return m == ContinuumMethod::adaptive ? "adaptive" : "mc"; }

inline Json continuum_json(const ContinuumParams& p, const ContinuumResult& r) {
  Json j{{"rho", p.rho}, {"a0", p.a0}, {"r0", p.r0}, {"method", method_name(r.method)},
         {"value", r.value}, {"error", r.error}};
  if (r.method == ContinuumMethod::monte_carlo) {
    j["samples"] = r.samples;
    j["seed"] = r.seed;
  }
  return j;
}

inline std::vector<std::string> study_header() {
  return {"N", "N_total", "E2_lattice", "E2_continuum_prediction", "ratio", "degenerate"};
}

inline std::vector<std::string> study_cells(const StudyRow& r) {
  return {num(r.N_sigma), num(r.N_total), num(r.E2_lattice), num(r.E2_continuum_prediction), num(r.ratio),
          r.degenerate ? "1" : "0"};
}

inline Json study_json(const std::vector<StudyRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows)
    a.push_back({{"N", r.N_sigma},
                 {"N_total", r.N_total},
                 {"E2_lattice", r.E2_lattice},
                 {"E2_continuum_prediction", r.E2_continuum_prediction},
                 {"ratio", r.ratio},
                 {"degenerate", r.degenerate}});
  return {{"rows", a}};
}

// ---------------------------------------------------------------------------
// Config files.

struct ConfigEntry {
  std::string key;
  std::vector<std::string> values;
};

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline bool is_provenance_key(const std::string& k) {
  return k == "schema" || k == "tool" || k == "version" || k == "command";
}

/// Reads `key=value` lines, keeping each value whole. A leading `#` is
/// accepted, so the config header of a CSV artifact can be fed back; lines
/// without `=` and the provenance keys are skipped. A file whose first
/// non-blank character is `{` is read as a JSON artifact and its `config`
/// object is used.
inline std::vector<ConfigEntry> parse_config_text(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<ConfigEntry> out;
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    Json j;
    try {
      j = Json::parse(t);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    const Json& cfg = j.contains("config") ? j["config"] : j;
    if (!cfg.is_object()) throw ConfigError("config: `config` must be an object");
    for (const auto& [k, v] : cfg.items()) {
      ConfigEntry e{k, {}};
      if (v.is_array())
        for (const auto& x : v) e.values.push_back(config_scalar(x));
      else
        e.values.push_back(config_scalar(v));
      out.push_back(std::move(e));
    }
    return out;
  }
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::string s = trim(line);
    if (!s.empty() && s.front() == '#') s = trim(s.substr(1));
    const auto eq = s.find('=');
    if (s.empty() || eq == std::string::npos) continue;
    std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    while (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty() || is_provenance_key(key)) continue;
    // List options split on their own delimiter downstream.
    ConfigEntry e{key, {val}};
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace hyfermi::io
