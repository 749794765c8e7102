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

// hyfermi command-line front end.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyfermi/energy.hpp"
#include "hyfermi/errors.hpp"
#include "hyfermi/io.hpp"
#include "hyfermi/lattice.hpp"
#include "hyfermi/scattering.hpp"
#include "hyfermi/thermo.hpp"

namespace {

using hyfermi::i64;
using hyfermi::io::Json;

// key=value config files. Keys naming a top-level option go to the root
// app; everything else goes to the subcommand selected on the command line.
class KeyValueConfig : public CLI::Config {
 public:
  explicit KeyValueConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    std::vector<std::string> path;
    for (const CLI::App* app = root_;;) {
      auto subs = app->get_subcommands();
      if (subs.empty()) break;
      path.push_back(subs.front()->get_name());
      app = subs.front();
    }
    std::vector<CLI::ConfigItem> out;
    for (auto& e : hyfermi::io::parse_config_text(in)) {
      CLI::ConfigItem item;
      item.name = e.key;
      item.inputs = e.values;
      if (root_->get_option_no_throw("--" + e.key) == nullptr) item.parents = path;
      out.push_back(std::move(item));
    }
    return out;
  }

 private:
  const CLI::App* root_;
};

struct Globals {
  unsigned threads = 0;
  std::uint64_t seed = 42;
  std::string out;
  std::string format = "auto";
};

i64 as_count(double x, const std::string& name, i64 lo) {
  if (!std::isfinite(x) || x != std::floor(x) || x < double(lo) || x > 9.0e15)
    throw hyfermi::ConfigError("--" + name + " must be an integer >= " + std::to_string(lo));
  return i64(x);
}

std::vector<i64> as_counts(const std::vector<double>& xs, const std::string& name, i64 lo) {
  std::vector<i64> out;
  for (double x : xs) out.push_back(as_count(x, name, lo));
  return out;
}

Json counts_json(const std::vector<i64>& v) {
  Json a = Json::array();
  for (auto x : v) a.push_back(x);
  return a;
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw hyfermi::ConfigError("cannot open output file '" + g.out + "'");
  f << text;
  if (!f) throw hyfermi::ConfigError("failed writing '" + g.out + "'");
}

std::string resolve_format(const Globals& g, const std::string& natural) {
  const std::string f = g.format == "auto" ? natural : g.format;
  return f;
}

void emit_json(const Globals& g, const std::string& command, const Json& config, Json result) {
  emit(g, hyfermi::io::artifact(command, config, std::move(result)).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyfermi: energy terms of a dilute Fermi gas in the Gross-Pitaevskii regime"};
  app.set_version_flag("--version", std::string(HYFERMI_VERSION));
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<KeyValueConfig>(&app));
  app.set_config("--config", "", "key=value file (or a previous JSON/CSV artifact); explicit flags win");

  Globals g;
  app.add_option("--threads", g.threads, "worker cap (0 = all cores); never changes results");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output path (default stdout)");
  app.add_option("--format", g.format, "json, csv or auto")->check(CLI::IsMember({"auto", "json", "csv"}));

  // lattice
  auto* lattice = app.add_subcommand("lattice", "Fermi-ball geometry")->require_subcommand(1);
  double max_n = 0, ball_r = 0;
  auto* magic = lattice->add_subcommand("magic", "magic numbers up to a count");
  magic->add_option("--max-n", max_n, "largest ball cardinality")->required();
  auto* ball = lattice->add_subcommand("ball", "points of one ball");
  ball->add_option("--r", ball_r, "squared radius in lattice units")->required();

  // scatter
  auto* scatter = app.add_subcommand("scatter", "Neumann scattering solution");
  std::string potential;
  double sc_a = 0, sc_ell = 0, sc_steps = 256, sc_grid = 64, sc_ratio = 0.25;
  scatter->add_option("--potential", potential, "well:height=<h>,radius=<r> or table:<path>")->required();
  scatter->add_option("--a", sc_a, "length scale a")->required();
  scatter->add_option("--ell", sc_ell, "Neumann ball radius")->required();
  scatter->add_option("--steps", sc_steps, "integration cells across the support")->capture_default_str();
  scatter->add_option("--grid", sc_grid, "samples of f in the output")->capture_default_str();
  scatter->add_option("--max-ratio", sc_ratio, "largest accepted a/ell")->capture_default_str();

  // energy
  auto* energy = app.add_subcommand("energy", "full energy breakdown");
  double spins = 2, alpha = 0.01, kmax_factor = 4, frak_m = 256, en_steps = 256;
  std::vector<double> n_list;
  bool allow_surface = false, no_probes = false;
  std::string en_potential;
  energy->add_option("--spins", spins, "number of spin states q")->capture_default_str();
  energy->add_option("--n", n_list, "particles per spin state, comma separated")->delimiter(',')->required();
  energy->add_option("--alpha", alpha, "ell = N^(-1/3 - alpha)")->capture_default_str();
  energy->add_option("--potential", en_potential, "interaction potential")->required();
  energy->add_flag("--allow-surface", allow_surface, "accept populations that do not fill a ball");
  energy->add_flag("--no-probes", no_probes, "skip the bound probes");
  energy->add_option("--kmax-factor", kmax_factor, "tail window in units of the cutoff")->capture_default_str();
  energy->add_option("--frak-m", frak_m, "largest cube for the lattice constant")->capture_default_str();
  energy->add_option("--steps", en_steps, "scattering integration cells")->capture_default_str();

  // thermo
  auto* thermo = app.add_subcommand("thermo", "thermodynamic-limit terms")->require_subcommand(1);
  auto* th_const = thermo->add_subcommand("constant", "the closed-form second-order constant");
  auto* th_int = thermo->add_subcommand("integral", "numerical second-order integral");
  std::string method = "adaptive";
  double samples = 1e7, rho = 1, th_a0 = 1, rel_tol = 1e-9, max_rel_error = 5e-3, k_split = 3;
  th_int->add_option("--method", method, "adaptive or mc")->check(CLI::IsMember({"adaptive", "mc"}))->capture_default_str();
  th_int->add_option("--samples", samples, "Monte Carlo samples")->capture_default_str();
  th_int->add_option("--rho", rho, "density")->capture_default_str();
  th_int->add_option("--a0", th_a0, "scattering length")->capture_default_str();
  th_int->add_option("--rel-tol", rel_tol, "adaptive relative tolerance")->capture_default_str();
  th_int->add_option("--max-rel-error", max_rel_error, "largest accepted error / value")->capture_default_str();
  th_int->add_option("--k-split", k_split, "Monte Carlo |k| split in units of r0")->capture_default_str();
  auto* th_study = thermo->add_subcommand("study", "lattice E2 against the continuum prediction");
  std::vector<double> st_n;
  double st_alpha = 0.01, st_kmax = 4;
  std::string st_potential;
  th_study->add_option("--n-list", st_n, "particles per spin state, comma separated")->delimiter(',')->required();
  th_study->add_option("--alpha", st_alpha, "ell = N^(-1/3 - alpha)")->capture_default_str();
  th_study->add_option("--potential", st_potential, "interaction potential")->required();
  th_study->add_option("--kmax-factor", st_kmax, "tail window in units of the cutoff")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const hyfermi::ConfigError& e) {
    std::cerr << "hyfermi: error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (magic->parsed()) {
      const i64 mx = as_count(max_n, "max-n", 1);
      const Json cfg{{"format", g.format}, {"max-n", mx}};
      const auto rows = hyfermi::magic_numbers(mx);
      if (resolve_format(g, "json") == "csv") {
        hyfermi::io::CsvWriter w("lattice magic", cfg, {"R", "N", "kinetic_integer_sum"});
        for (const auto& r : rows) w.row({std::to_string(r.R), std::to_string(r.N), std::to_string(r.kinetic_integer_sum)});
        emit(g, w.str());
      } else {
        emit_json(g, "lattice magic", cfg, hyfermi::io::magic_json(rows));
      }
    } else if (ball->parsed()) {
      const i64 R = as_count(ball_r, "r", 0);
      const Json cfg{{"format", g.format}, {"r", R}};
      const auto b = hyfermi::enumerate_ball(R);
      if (resolve_format(g, "json") == "csv") {
        hyfermi::io::CsvWriter w("lattice ball", cfg, {"x", "y", "z", "norm_sq"});
        for (const auto& m : b.points)
          w.row({std::to_string(m.x), std::to_string(m.y), std::to_string(m.z), std::to_string(hyfermi::norm_sq(m))});
        emit(g, w.str());
      } else {
        emit_json(g, "lattice ball", cfg, hyfermi::io::ball_json(b));
      }
    } else if (scatter->parsed()) {
      const auto v = hyfermi::parse_potential(potential);
      hyfermi::ScatteringOptions so;
      so.steps = int(as_count(sc_steps, "steps", 4));
      so.max_ratio = sc_ratio;
      const int grid = int(as_count(sc_grid, "grid", 1));
      const Json cfg{{"format", g.format}, {"potential", potential}, {"a", sc_a},        {"ell", sc_ell},
                     {"steps", so.steps},   {"grid", grid},           {"max-ratio", sc_ratio}};
      const auto sol = hyfermi::solve_neumann(v, sc_a, sc_ell, so);
      if (resolve_format(g, "json") == "csv") {
        hyfermi::io::CsvWriter w("scatter", cfg, {"y", "f", "w"});
        for (int i = 0; i <= grid; ++i) {
          const double y = sol.L * double(i) / double(grid);
          w.row({hyfermi::io::num(y), hyfermi::io::num(sol.f(y)), hyfermi::io::num(sol.w(y))});
        }
        emit(g, w.str());
      } else {
        emit_json(g, "scatter", cfg, hyfermi::io::scattering_json(sol, grid));
      }
    } else if (energy->parsed()) {
      const int q = int(as_count(spins, "spins", 1));
      const auto N = as_counts(n_list, "n", 1);
      const auto v = hyfermi::parse_potential(en_potential);
      hyfermi::SystemOptions so;
      so.allow_surface = allow_surface;
      so.scattering.steps = int(as_count(en_steps, "steps", 4));
      so.threads = g.threads;
      hyfermi::ReportOptions ro;
      ro.second.kmax_factor = kmax_factor;
      ro.frak_M_max = int(as_count(frak_m, "frak-m", 8));
      ro.probes = !no_probes;
      ro.threads = g.threads;
      const Json cfg{{"format", g.format},
                     {"spins", q},
                     {"n", counts_json(N)},
                     {"alpha", alpha},
                     {"potential", en_potential},
                     {"allow-surface", allow_surface},
                     {"no-probes", no_probes},
                     {"kmax-factor", kmax_factor},
                     {"frak-m", ro.frak_M_max},
                     {"steps", so.scattering.steps}};
      const auto sys = hyfermi::build_system(q, N, alpha, v, so);
      const auto rep = hyfermi::total_report(sys, ro);
      if (resolve_format(g, "json") == "csv") {
        using hyfermi::io::num;
        hyfermi::io::CsvWriter w("energy", cfg,
                                 {"N_total", "kinetic", "first_simple", "first_full", "second", "frak_e", "surface",
                                  "tail_bound", "n_terms"});
        w.row({num(sys.N_total), num(rep.kinetic), num(rep.first_simple),
               rep.first_full ? num(*rep.first_full) : std::string(""), num(rep.second), num(rep.frak_e),
               num(rep.surface), num(rep.diagnostics.tail_bound), num(rep.diagnostics.n_terms)});
        emit(g, w.str());
      } else {
        emit_json(g, "energy", cfg, hyfermi::io::energy_json(rep));
      }
    } else if (th_const->parsed()) {
      const Json cfg{{"format", g.format}};
      const double hy = hyfermi::hy_constant();
      const std::string form = "(12/35)(11-2ln2)3^(1/3)pi^(2/3)";
      if (resolve_format(g, "json") == "csv") {
        hyfermi::io::CsvWriter w("thermo constant", cfg, {"closed_form", "value"});
        w.row({form, hyfermi::io::num(hy)});
        emit(g, w.str());
      } else {
        emit_json(g, "thermo constant", cfg, Json{{"closed_form", form}, {"value", hy}});
      }
    } else if (th_int->parsed()) {
      hyfermi::QuadratureSpec qs;
      qs.method = method == "mc" ? hyfermi::ContinuumMethod::monte_carlo : hyfermi::ContinuumMethod::adaptive;
      qs.n_samples = as_count(samples, "samples", 1);
      qs.seed = g.seed;
      qs.rel_tol = rel_tol;
      qs.max_rel_error = max_rel_error;
      qs.k_split = k_split;
      qs.threads = g.threads;
      Json cfg{{"format", g.format}, {"method", method}, {"rho", rho}, {"a0", th_a0}};
      if (qs.method == hyfermi::ContinuumMethod::monte_carlo) {
        cfg["samples"] = qs.n_samples;
        cfg["seed"] = qs.seed;
        cfg["k-split"] = k_split;
      } else {
        cfg["rel-tol"] = rel_tol;
      }
      cfg["max-rel-error"] = max_rel_error;
      const auto prm = hyfermi::continuum_params(rho, th_a0);
      const auto r = hyfermi::continuum_second_numeric(prm, qs);
      const double expected = hyfermi::hy_constant() * th_a0 * th_a0 * std::pow(rho, 7.0 / 3.0);
      Json res = hyfermi::io::continuum_json(prm, r);
      res["closed_form_value"] = expected;
      res["deviation_in_errors"] = r.error > 0 ? (r.value - expected) / r.error : 0.0;
      if (resolve_format(g, "json") == "csv") {
        using hyfermi::io::num;
        hyfermi::io::CsvWriter w("thermo integral", cfg, {"method", "value", "error", "closed_form_value"});
        w.row({hyfermi::io::method_name(r.method), num(r.value), num(r.error), num(expected)});
        emit(g, w.str());
      } else {
        emit_json(g, "thermo integral", cfg, res);
      }
    } else if (th_study->parsed()) {
      const auto N = as_counts(st_n, "n-list", 1);
      const auto v = hyfermi::parse_potential(st_potential);
      hyfermi::SystemOptions so;
      so.threads = g.threads;
      hyfermi::SecondOrderOptions eo;
      eo.kmax_factor = st_kmax;
      eo.threads = g.threads;
      const Json cfg{{"format", g.format},
                     {"n-list", counts_json(N)},
                     {"alpha", st_alpha},
                     {"potential", st_potential},
                     {"kmax-factor", st_kmax}};
      const auto rows = hyfermi::gp_to_thermo_study(st_alpha, v, N, so, eo);
      if (resolve_format(g, "csv") == "csv") {
        hyfermi::io::CsvWriter w("thermo study", cfg, hyfermi::io::study_header());
        for (const auto& r : rows) w.row(hyfermi::io::study_cells(r));
        emit(g, w.str());
      } else {
        emit_json(g, "thermo study", cfg, hyfermi::io::study_json(rows));
      }
    }
  } catch (const hyfermi::ConfigError& e) {
    std::cerr << "hyfermi: error: " << e.what() << "\n";
    return 2;
  } catch (const hyfermi::NumericalError& e) {
    std::cerr << "hyfermi: numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "hyfermi: failure: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
