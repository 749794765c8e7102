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

// Thermodynamic-limit counterparts of the energy terms for two equally
// populated spin states at density rho.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hyfermi/energy.hpp"
#include "hyfermi/errors.hpp"
#include "hyfermi/summation.hpp"

namespace hyfermi {

struct ContinuumParams {
  double rho = 1.0;
  double a0 = 1.0;
  double r0 = 0.0;  // (3 pi^2 rho)^{1/3}
};

inline ContinuumParams continuum_params(double rho, double a0) {
  if (!(rho > 0) || !std::isfinite(rho)) throw DomainError("continuum_params: rho must be > 0");
  if (!(a0 >= 0) || !std::isfinite(a0)) throw DomainError("continuum_params: a0 must be >= 0");
  return {rho, a0, std::cbrt(3.0 * std::numbers::pi * std::numbers::pi * rho)};
}

inline double continuum_zeroth(double rho) {
  if (rho < 0) throw DomainError("continuum_zeroth: rho must be >= 0");
  const double c = 3.0 * std::numbers::pi * std::numbers::pi;
  return 0.6 * std::cbrt(c * c) * std::pow(rho, 5.0 / 3.0);
}

inline double continuum_first(double rho, double a0) {
  if (rho < 0) throw DomainError("continuum_first: rho must be >= 0");
  return 2.0 * std::numbers::pi * a0 * rho * rho;
}

/// (12/35)(11 - 2 ln 2) 3^{1/3} pi^{2/3}.
inline double hy_constant() {
  return 12.0 / 35.0 * (11.0 - 2.0 * std::numbers::ln2) * std::cbrt(3.0) * std::cbrt(std::numbers::pi * std::numbers::pi);
}

enum class ContinuumMethod { adaptive, monte_carlo };

struct QuadratureSpec {
  ContinuumMethod method = ContinuumMethod::adaptive;
  double rel_tol = 1e-9;         // adaptive: requested relative accuracy
  double max_rel_error = 5e-3;   // reported error above this fraction of |value| is an error
  std::uint64_t seed = 42;       // monte carlo
  std::int64_t n_samples = 10'000'000;
  double k_split = 3.0;          // monte carlo: |k| split radius in units of r0
  std::int64_t chunk = 1 << 16;  // samples per independent stream
  unsigned threads = 0;
};

struct ContinuumResult {
  double value = 0;
  double error = 0;  // quadrature estimate, or one standard error for MC
  ContinuumMethod method = ContinuumMethod::adaptive;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// Pair coordinates: P = p + q is the total momentum, rho = |p - q| / 2.
// With both momenta in the ball of radius r0, for fixed P the relative
// momentum ranges over rho < sqrt(r0^2 - P^2/4). The k integral becomes a
// principal value over final relative momenta rho', and its angular part
// is closed form. A is the solid angle of relative directions keeping both
// initial momenta inside the ball; the inner bracket is the principal value
// for final momenta outside, weighted by the complementary solid angle.
inline double pair_outer_weight(double P, double rho, double r0) {
  const double al = r0 * r0 - 0.25 * P * P;
  if (rho <= 0 || P <= 0) return 4.0 * std::numbers::pi;
  return 4.0 * std::numbers::pi * std::clamp((al - rho * rho) / (P * rho), 0.0, 1.0);
}

inline double pair_inner_pv(double P, double rho, double r0) {
  const double pi = std::numbers::pi;
  const double al = r0 * r0 - 0.25 * P * P;
  const double b1 = r0 - 0.5 * P, b2 = r0 + 0.5 * P;
  // Antiderivatives of x^2/(x^2 - rho^2), x/(x^2 - rho^2) and x^3/(x^2 - rho^2).
  auto F2 = [&](double x) { return rho == 0.0 ? x : x + 0.5 * rho * std::log(std::abs((x - rho) / (x + rho))); };
  auto F1 = [&](double x) { return 0.5 * std::log(std::abs(x * x - rho * rho)); };
  auto F3 = [&](double x) { return 0.5 * x * x + 0.5 * rho * rho * std::log(std::abs(x * x - rho * rho)); };
  double v = 4.0 * pi * (F2(b1) - F2(0.0));
  v += 2.0 * pi * ((F2(b2) - F2(b1)) + (al * (F1(b2) - F1(b1)) - (F3(b2) - F3(b1))) / P);
  return v;
}

inline ContinuumResult continuum_adaptive(const ContinuumParams& prm, const QuadratureSpec& spec) {
  using boost::math::quadrature::gauss_kronrod;
  const double r0 = prm.r0;
  double worst_inner = 0.0;
  auto inner = [&](double P) {
    const double al = r0 * r0 - 0.25 * P * P;
    const double b1 = r0 - 0.5 * P, top = std::sqrt(std::max(al, 0.0));
    auto f = [&](double rho) { return rho * rho * pair_outer_weight(P, rho, r0) * pair_inner_pv(P, rho, r0); };
    double e1 = 0, e2 = 0;
    const double lo = gauss_kronrod<double, 31>::integrate(f, 0.0, b1, 15, spec.rel_tol, &e1);
    const double hi = top > b1 ? gauss_kronrod<double, 31>::integrate(f, b1, top, 15, spec.rel_tol, &e2) : 0.0;
    worst_inner = std::max(worst_inner, 4.0 * std::numbers::pi * P * P * (e1 + e2));
    return 4.0 * std::numbers::pi * P * P * (lo + hi);
  };
  double eo = 0;
  const double K = gauss_kronrod<double, 31>::integrate(inner, 0.0, 2.0 * r0, 12, spec.rel_tol, &eo);
  const double pref = 4.0 * std::pow(4.0 * std::numbers::pi * prm.a0, 2) / std::pow(2.0 * std::numbers::pi, 9);
  ContinuumResult r;
  r.method = ContinuumMethod::adaptive;
  r.value = pref * K;
  r.error = pref * (eo + 2.0 * r0 * worst_inner);
  return r;
}

inline ContinuumResult continuum_monte_carlo(const ContinuumParams& prm, const QuadratureSpec& spec) {
  if (spec.n_samples < 10'000) throw ConfigError("continuum_second_numeric: n_samples must be >= 1e4");
  if (spec.chunk < 1) throw ConfigError("continuum_second_numeric: chunk must be >= 1");
  if (!(spec.k_split >= 2.0)) throw ConfigError("continuum_second_numeric: k_split must be >= 2");
  const double pi = std::numbers::pi;
  const double r0 = prm.r0, K0 = spec.k_split * r0;
  const std::int64_t chunks = (spec.n_samples + spec.chunk - 1) / spec.chunk;
  std::vector<StableSum<double>> s1(static_cast<std::size_t>(chunks)), s2(static_cast<std::size_t>(chunks));

  parallel_for(std::size_t(chunks), spec.threads, [&](std::size_t c) {
    // One independent stream per chunk index, so results do not depend on
    // which worker runs which chunk.
    std::seed_seq seq{std::uint32_t(spec.seed), std::uint32_t(spec.seed >> 32), std::uint32_t(c),
                      std::uint32_t(std::uint64_t(c) >> 32)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto direction = [&] {
      std::array<double, 3> u;
      double n = 0;
      do {
        u = {gauss(gen), gauss(gen), gauss(gen)};
        n = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
      } while (n == 0.0);
      for (double& x : u) x /= n;
      return u;
    };
    auto in_ball = [&] {
      auto u = direction();
      const double r = r0 * std::cbrt(unif(gen));
      for (double& x : u) x *= r;
      return u;
    };
    const std::int64_t b = std::int64_t(c) * spec.chunk;
    const std::int64_t e = std::min(spec.n_samples, b + spec.chunk);
    for (std::int64_t i = b; i < e; ++i) {
      const auto p = in_ball();
      const auto q = in_ball();
      const auto u = direction();
      const double kr = K0 * unif(gen);
      const std::array<double, 3> d{q[0] - p[0], q[1] - p[1], q[2] - p[2]};
      auto term = [&](double sgn) {
        std::array<double, 3> k{sgn * kr * u[0], sgn * kr * u[1], sgn * kr * u[2]};
        double pk = 0, qk = 0, kk = 0, kd = 0;
        for (int j = 0; j < 3; ++j) {
          pk += (p[j] - k[j]) * (p[j] - k[j]);
          qk += (q[j] + k[j]) * (q[j] + k[j]);
          kk += k[j] * k[j];
          kd += k[j] * d[j];
        }
        const bool chi = pk > r0 * r0 && qk > r0 * r0;
        // Radial density 1/K0 against the volume element 4 pi k^2.
        return 4.0 * pi * K0 * (0.5 - (chi ? kk / (2.0 * (kk + kd)) : 0.0));
      };
      const double dn = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
      // Beyond K0 both indicators are 1; the angular average is closed form.
      const double w = 0.5 * (term(1.0) + term(-1.0)) + tail_beyond(dn, K0);
      s1[c] += w;
      s2[c] += w * w;
    }
  });
  const double n = double(spec.n_samples);
  const double mean = tree_reduce(std::move(s1)).get() / n;
  const double var = std::max(0.0, tree_reduce(std::move(s2)).get() / n - mean * mean);
  const double V = 4.0 / 3.0 * pi * r0 * r0 * r0;
  const double pref = 4.0 * std::pow(4.0 * pi * prm.a0, 2) / std::pow(2.0 * pi, 9);
  ContinuumResult r;
  r.method = ContinuumMethod::monte_carlo;
  r.samples = spec.n_samples;
  r.seed = spec.seed;
  r.value = pref * V * V * mean;
  r.error = pref * V * V * std::sqrt(var / n);
  return r;
}

}  // namespace detail

/// 4 (4 pi a0)^2 / (2 pi)^9 times the regularized pair integral over
/// |p|, |q| < r0 and k in R^3. The unconstrained counterterm integrates to
/// zero, so only the indicator part carries the value.
inline ContinuumResult continuum_second_numeric(const ContinuumParams& prm, const QuadratureSpec& spec = {}) {
  if (!(prm.r0 > 0) || !(prm.a0 >= 0)) throw DomainError("continuum_second_numeric: invalid parameters");
  if (!(spec.rel_tol > 0) || !(spec.max_rel_error > 0)) throw ConfigError("continuum_second_numeric: tolerances must be > 0");
  if (prm.a0 == 0.0) {
    ContinuumResult r;
    r.method = spec.method;
    r.seed = spec.method == ContinuumMethod::monte_carlo ? spec.seed : 0;
    return r;
  }
  ContinuumResult r = spec.method == ContinuumMethod::adaptive ? detail::continuum_adaptive(prm, spec)
                                                                 : detail::continuum_monte_carlo(prm, spec);
  if (r.error > spec.max_rel_error * std::abs(r.value))
    throw AccuracyError("continuum_second_numeric: error estimate " + std::to_string(r.error) + " for value " +
                        std::to_string(r.value) + " exceeds the requested tolerance");
  return r;
}

struct I1Probe {
  std::vector<double> scales;    // |xi|
  std::vector<double> values;    // Re F(xi)
  std::vector<double> tail_max;  // max_{i >= j} |values[i]|
};

/// Re F(xi) = (pi/|xi|)(1 - cos(pi d.xi) cos(pi |d| |xi|)) along xi = 2^-j u.
inline I1Probe i1_vanishing_probe(const std::array<double, 3>& d, const std::array<double, 3>& direction,
                                  int j_min = 1, int j_max = 20) {
  if (j_max < j_min) throw DomainError("i1_vanishing_probe: empty scale range");
  const double un = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] + direction[2] * direction[2]);
  if (!(un > 0)) throw DomainError("i1_vanishing_probe: direction must be non-zero");
  const double dn = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  const double du = (d[0] * direction[0] + d[1] * direction[1] + d[2] * direction[2]) / un;
  const double pi = std::numbers::pi;
  I1Probe r;
  for (int j = j_min; j <= j_max; ++j) {
    const double t = std::ldexp(1.0, -j);
    // 1 - cos A cos B = sin^2((A+B)/2) + sin^2((A-B)/2), free of cancellation.
    const double A = pi * du * t, B = pi * dn * t;
    const double s1 = std::sin(0.5 * (A + B)), s2 = std::sin(0.5 * (A - B));
    r.scales.push_back(t);
    r.values.push_back(pi / t * (s1 * s1 + s2 * s2));
  }
  r.tail_max.assign(r.values.size(), 0.0);
  double m = 0.0;
  for (std::size_t i = r.values.size(); i-- > 0;) r.tail_max[i] = m = std::max(m, std::abs(r.values[i]));
  return r;
}

struct StudyRow {
  i64 N_sigma = 0, N_total = 0;
  double E2_lattice = 0;
  double E2_continuum_prediction = 0;
  double ratio = 0;
  bool degenerate = false;  // E2 vanishes identically (one point per ball)
};

/// E2 of the two-species torus system against HY (a a0)^2 N^{7/3}, the
/// continuum energy at the same density and physical scattering length.
inline std::vector<StudyRow> gp_to_thermo_study(double alpha, const RadialPotential& v, const std::vector<i64>& N_list,
                                                const SystemOptions& sopt = {}, const SecondOrderOptions& opt = {}) {
  std::vector<StudyRow> rows;
  for (i64 n : N_list) {
    const GPSystem sys = build_system(2, {n, n}, alpha, v, sopt);
    if (!sys.magic[0]) throw DomainError("gp_to_thermo_study: N=" + std::to_string(n) + " is not magic");
    StudyRow row;
    row.N_sigma = n;
    row.N_total = sys.N_total;
    row.E2_lattice = e_second(sys, opt).value;
    const double aa = sys.a * sys.a0;
    row.E2_continuum_prediction = hy_constant() * aa * aa * std::pow(double(sys.N_total), 7.0 / 3.0);
    row.degenerate = sys.balls[0].count == 1;
    row.ratio = row.E2_continuum_prediction != 0.0 ? row.E2_lattice / row.E2_continuum_prediction : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hyfermi
