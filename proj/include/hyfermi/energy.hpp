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

// Energy terms of a multi-species Fermi gas on the unit torus with a = 1/N.
//
// All momentum sums run over lattice vectors m with k = 2 pi m. With
// d = q - p, the collision denominator is
//
//   |q+k|^2 + |p-k|^2 - |q|^2 - |p|^2 = (2 pi)^2 * 2 (|m|^2 + m.d),
//
// an integer multiple of (2 pi)^2, so every indicator and sign decision is
// exact.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hyfermi/errors.hpp"
#include "hyfermi/lattice.hpp"
#include "hyfermi/scattering.hpp"
#include "hyfermi/stats.hpp"
#include "hyfermi/summation.hpp"

namespace hyfermi {

struct SystemOptions {
  bool allow_surface = false;
  ScatteringOptions scattering{};
  int a0_steps = 2048;
  unsigned threads = 0;
};

struct GPSystem {
  int q = 0;
  std::vector<i64> N;  // requested populations
  std::vector<FermiBall> balls;
  std::vector<bool> magic;
  i64 N_total = 0;
  double a = 0, alpha = 0, ell = 0;
  double a0 = 0;   // scattering length of v
  i64 R_max = 0;
  i64 cut_n = 0;   // |k| <= c_N  <=>  |m|^2 <= cut_n = 16 R_max
  double c_N = 0;  // 4 max k_F
  RadialPotential potential = RadialPotential::square_well(0.0, 1.0);
  std::optional<ScatteringSolution> scattering;
  std::optional<CoefficientBank> bank;  // |m|^2 <= 64 R_max
  std::string scattering_note;
  bool surface_mode = false;
  std::vector<std::size_t> order;  // spins sorted by (N, R, index)

  i64 pair_product_sum() const {
    i64 s = 0;
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        if (i != j) s += N[i] * N[j];
    return s;
  }
  i64 table_n() const { return 64 * R_max; }

  /// Ordered pairs (sigma, nu), sigma != nu, in canonical order.
  std::vector<std::pair<std::size_t, std::size_t>> spin_pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (auto i : order)
      for (auto j : order)
        if (i != j) out.emplace_back(i, j);
    return out;
  }
};

inline GPSystem build_system(int q, const std::vector<i64>& N_list, double alpha, const RadialPotential& v,
                             const SystemOptions& opt = {}) {
  if (q < 1) throw DomainError("build_system: q must be >= 1");
  if (int(N_list.size()) != q) throw DomainError("build_system: need one population per spin state");
  if (!(alpha > 0 && alpha < 1.0 / 6.0)) throw DomainError("build_system: alpha must lie in (0, 1/6)");
  GPSystem s;
  s.q = q;
  s.N = N_list;
  s.alpha = alpha;
  s.potential = v;
  s.surface_mode = opt.allow_surface;
  for (i64 n : N_list) {
    if (n < 1) throw DomainError("build_system: every N_sigma must be >= 1");
    auto bc = ball_for_count(n);
    if (!bc.is_magic && !opt.allow_surface)
      throw DomainError("build_system: N=" + std::to_string(n) + " does not fill a ball; enable surface mode");
    s.magic.push_back(bc.is_magic);
    s.R_max = std::max(s.R_max, bc.ball.R);
    s.balls.push_back(std::move(bc.ball));
    s.N_total += n;
  }
  s.order.resize(q);
  for (int i = 0; i < q; ++i) s.order[i] = std::size_t(i);
  std::stable_sort(s.order.begin(), s.order.end(), [&](std::size_t x, std::size_t y) {
    return std::pair(s.N[x], s.balls[x].R) < std::pair(s.N[y], s.balls[y].R);
  });
  s.a = 1.0 / double(s.N_total);
  s.ell = std::pow(double(s.N_total), -1.0 / 3.0 - alpha);
  s.cut_n = 16 * s.R_max;
  s.c_N = 4.0 * 2.0 * std::numbers::pi * std::sqrt(double(s.R_max));
  s.a0 = scattering_length(v, opt.a0_steps);

  if (!(s.ell < 0.5)) {
    s.scattering_note = "ell >= 1/2: Neumann problem not posed on the torus";
  } else if (!(s.a / s.ell < opt.scattering.max_ratio)) {
    s.scattering_note = "a/ell above the smallness threshold";
  } else {
    s.scattering = solve_neumann(v, s.a, s.ell, opt.scattering);
    s.bank = CoefficientBank::build(*s.scattering, s.table_n(), opt.threads);
  }
  return s;
}

namespace detail {

// 1 - atanh(b)/b for 0 <= b < 1.
inline double tail_kernel(double b) {
  if (b < 0.25) {
    const double b2 = b * b;
    double term = b2, sum = 0.0;
    for (int j = 1; j < 60; ++j) {
      const double add = term / (2 * j + 1);
      sum += add;
      if (add < 1e-18 * sum) break;
      term *= b2;
    }
    return -sum;
  }
  return 1.0 - std::atanh(b) / b;
}

// int_K^inf 2 pi (1 - atanh(d/r) r/d) dr, the angular-averaged tail bracket
// beyond radius K, for |d| < K.
inline double tail_beyond(double dn, double K) {
  if (dn == 0.0) return 0.0;
  const double b = dn / K, b2 = b * b;
  double term = b, sum = 0.0;
  for (int j = 0; j < 200; ++j) {
    const double add = term / double((2 * j + 1) * (2 * j + 3));
    sum += add;
    if (add < 1e-18 * sum) break;
    term *= b2;
  }
  return -2.0 * std::numbers::pi * dn * sum;
}

}  // namespace detail

struct SecondOrderOptions {
  double kmax_factor = 4.0;       // K_max = factor * c_N
  double window_sigma_min = 2.5;  // lattice units
  std::size_t chunk = 1024;       // (p, q) pairs per accumulation chunk
  unsigned threads = 0;
};

struct SecondOrderResult {
  double value = 0;      // E2
  double low_sum = 0;    // lattice units, all ordered spin pairs
  double tail_sum = 0;   // lattice units
  double tail_bound = 0; // size of the part beyond K_max, in energy units
  i64 n_terms = 0;
  i64 cut_n = 0;
  double kmax = 0, kmax_effective = 0, window_sigma = 0;  // lattice units
  std::size_t distinct_d = 0;
};

/// Tail of the cutoff split for one d:
/// (1/2) sum_{|m| > Mc} -(m.d)^2 / (|m|^2 (|m|^4 - (m.d)^2)).
/// The sum is tapered by psi(|m|) = erfc((|m| - rc)/sigma)/2 and the rest is
/// integrated: the tapered complement is smooth, so its lattice sum and
/// integral differ only by a Gaussian-small aliasing term.
struct TailEngine {
  double Mc = 0, K = 0, sigma = 0, rc = 0, Keff = 0;
  std::vector<i64> shell_n;                      // shells with Mc^2 < n <= Keff^2
  std::vector<double> shell_w;                   // psi / (2 n)
  std::vector<std::vector<LatticeVector>> pts;   // per shell

  TailEngine(i64 cut_n, double kmax_factor, double sigma_min) {
    if (kmax_factor < 2.0) throw ConfigError("e_second: K_max must be at least 2 c_N");
    Mc = std::sqrt(double(cut_n));
    K = kmax_factor * Mc;
    sigma = std::max(sigma_min, (K - Mc) / 14.0);
    rc = Mc + 7.0 * sigma;
    Keff = Mc + 14.0 * sigma;
    const i64 nmax = i64(std::floor(Keff * Keff));
    const FermiBall b = enumerate_ball(nmax);
    std::size_t i = 0;
    while (i < b.points.size() && norm_sq(b.points[i]) <= cut_n) ++i;
    while (i < b.points.size()) {
      const i64 n = norm_sq(b.points[i]);
      shell_n.push_back(n);
      shell_w.push_back(0.25 * std::erfc((std::sqrt(double(n)) - rc) / sigma) / double(n));
      pts.emplace_back();
      while (i < b.points.size() && norm_sq(b.points[i]) == n) pts.back().push_back(b.points[i++]);
    }
  }

  double direct(const LatticeVector& d) const {
    StableSum<double> acc;
    for (std::size_t s = 0; s < shell_n.size(); ++s) {
      const double n = double(shell_n[s]), n2 = n * n;
      double shell = 0.0;
      for (const auto& m : pts[s]) {
        const double md = double(dot(m, d)), md2 = md * md;
        shell -= md2 / (n2 - md2);
      }
      acc += shell_w[s] * shell;
    }
    return acc.get();
  }

  double continuum(double dn) const {
    if (dn == 0.0) return 0.0;
    auto f = [&](double r) {
      return 2.0 * std::numbers::pi * detail::tail_kernel(dn / r) * 0.5 * std::erfc((rc - r) / sigma);
    };
    double err = 0;
    const double mid = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, Mc, Keff, 25, 1e-15, &err);
    return mid + detail::tail_beyond(dn, Keff);
  }
};

inline SecondOrderResult e_second(const GPSystem& sys, const SecondOrderOptions& opt = {}) {
  SecondOrderResult res;
  res.cut_n = sys.cut_n;
  const auto pairs = sys.spin_pairs();
  if (pairs.empty()) return res;

  // Low part: 0 < |m|^2 <= cut_n, every (p, q).
  std::vector<LatticeVector> ks;
  std::vector<double> half_inv;
  {
    const FermiBall kb = enumerate_ball(sys.cut_n);
    for (const auto& m : kb.points) {
      const i64 n = norm_sq(m);
      if (n == 0) continue;
      ks.push_back(m);
      half_inv.push_back(0.5 / double(n));
    }
  }
  StableSum<double> low;
  std::map<std::array<int, 3>, i64> dcount;
  for (auto [sg, nu] : pairs) {
    const auto& Bs = sys.balls[sg];
    const auto& Bn = sys.balls[nu];
    // Tail indicators are identically 1 beyond c_N since |p|, |q| <= c_N / 4.
    if (16 * Bs.R > sys.cut_n || 16 * Bn.R > sys.cut_n)
      throw NumericalError("e_second: cutoff does not dominate the Fermi radii");
    const std::size_t Nq = Bn.points.size();
    const std::size_t items = Bs.points.size() * Nq;
    const double part = chunked_sum(items, opt.chunk, opt.threads, [&](std::size_t b, std::size_t e, StableSum<double>& acc) {
      for (std::size_t idx = b; idx < e; ++idx) {
        const LatticeVector& p = Bs.points[idx / Nq];
        const LatticeVector& qv = Bn.points[idx % Nq];
        const i64 p2 = norm_sq(p), q2 = norm_sq(qv);
        for (std::size_t j = 0; j < ks.size(); ++j) {
          const LatticeVector& m = ks[j];
          const i64 n = norm_sq(m), pm = dot(p, m), qm = dot(qv, m);
          const bool chi = (p2 - 2 * pm + n > Bs.R) && (q2 + 2 * qm + n > Bn.R);
          double term = half_inv[j];
          if (chi) {
            const i64 den = n + qm - pm;
            if (den <= 0) throw NumericalError("e_second: non-positive denominator with active indicators");
            term -= 0.5 / double(den);
          }
          acc.add(term);
        }
      }
    });
    low.add(part);
    res.n_terms += i64(items) * i64(ks.size());
    for (const auto& p : Bs.points)
      for (const auto& qv : Bn.points) {
        const auto d = qv - p;
        ++dcount[{d.x, d.y, d.z}];
      }
  }
  res.low_sum = low.get();

  const TailEngine tail(sys.cut_n, opt.kmax_factor, opt.window_sigma_min);
  res.kmax = tail.K;
  res.kmax_effective = tail.Keff;
  res.window_sigma = tail.sigma;
  std::vector<LatticeVector> ds;
  std::vector<i64> cnt;
  for (const auto& [d, c] : dcount) {
    ds.push_back({d[0], d[1], d[2]});
    cnt.push_back(c);
  }
  res.distinct_d = ds.size();
  std::vector<double> direct(ds.size(), 0.0);
  parallel_for(ds.size(), opt.threads, [&](std::size_t i) { direct[i] = tail.direct(ds[i]); });
  std::map<i64, double> cont;
  for (const auto& d : ds) cont.emplace(norm_sq(d), 0.0);
  for (auto& [n2, val] : cont) val = tail.continuum(std::sqrt(double(n2)));
  StableSum<double> tsum, tb;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const i64 n2 = norm_sq(ds[i]);
    tsum.add(double(cnt[i]) * (direct[i] + cont.at(n2)));
    tb.add(double(cnt[i]) * std::abs(detail::tail_beyond(std::sqrt(double(n2)), tail.K)));
  }
  res.tail_sum = tsum.get();

  // 2 (4 pi a a0)^2 / (2 pi)^2 = 8 a^2 a0^2.
  const double pref = 8.0 * sys.a * sys.a * sys.a0 * sys.a0;
  res.value = pref * (res.low_sum + res.tail_sum) + 0.0;
  res.tail_bound = pref * tb.get();
  return res;
}

struct ScalingRow {
  i64 N = 0;  // total particle number
  double E2 = 0, normalized = 0;
};

struct ScalingProbe {
  std::vector<ScalingRow> rows;
  double eps = 0.05;
  double slope = 0;          // log-log slope of |normalized| over the rows with E2 != 0
  double growth = 0;         // max / min of |normalized| over those rows
  bool flagged = false;      // growth above the configured factor
};

/// E2 across equal two-species populations N_sigma in N_list.
inline ScalingProbe e_second_scaling_probe(double alpha, const std::vector<i64>& N_list, const RadialPotential& v,
                                           double eps = 0.05, double growth_factor = 2.0,
                                           const SecondOrderOptions& opt = {}, const SystemOptions& sopt = {}) {
  ScalingProbe pr;
  pr.eps = eps;
  std::vector<double> xs, ys;
  for (i64 n : N_list) {
    SystemOptions so = sopt;
    GPSystem sys = build_system(2, {n, n}, alpha, v, so);
    ScalingRow row;
    row.N = sys.N_total;
    row.E2 = e_second(sys, opt).value;
    row.normalized = row.E2 / std::pow(double(row.N), 1.0 / 3.0 + eps);
    pr.rows.push_back(row);
    if (row.E2 != 0.0) {
      xs.push_back(double(row.N));
      ys.push_back(row.normalized);
    }
  }
  pr.slope = loglog_slope(xs, ys);
  if (!ys.empty()) {
    double lo = std::abs(ys[0]), hi = lo;
    for (double y : ys) {
      lo = std::min(lo, std::abs(y));
      hi = std::max(hi, std::abs(y));
    }
    pr.growth = lo > 0 ? hi / lo : 0.0;
    pr.flagged = pr.growth > growth_factor;
  }
  return pr;
}

// ---------------------------------------------------------------------------
// The finite-volume constant.

struct FrakERow {
  int M = 0;
  double partial = 0;    // S(M)
  double amplitude = 0;  // max |S(M') - S_inf| over M/2 < M' <= M
};

struct FrakEResult {
  double value = 0;
  double S_inf = 0;  // extrapolated lim_M sum cos|p| / |p|^2
  double fit_rms = 0;
  std::vector<FrakERow> table;
  bool warning = false;  // oscillation amplitude did not decrease
};

/// Cube-truncated partial sums S(M) = sum_{0 < |p|_inf <= M} cos|p| / |p|^2
/// for M = 0..M_max, computed one cube layer at a time.
inline std::vector<double> cube_partial_sums(int M_max, unsigned threads = 0) {
  std::vector<double> layer(std::size_t(M_max) + 1, 0.0);
  parallel_for(std::size_t(M_max), threads, [&](std::size_t idx) {
    const i64 M = i64(idx) + 1;
    StableSum<double> acc;
    // 0 <= x <= y <= z = M with sign and permutation multiplicities.
    for (i64 y = 0; y <= M; ++y)
      for (i64 x = 0; x <= y; ++x) {
        const i64 z = M;
        const double n = double(x * x + y * y + z * z);
        int nz = 1 + (y != 0) + (x != 0);
        int perms = (x == y && y == z) ? 1 : (x == y || y == z) ? 3 : 6;
        acc += double((1 << nz) * perms) * std::cos(std::sqrt(n)) / n;
      }
    layer[std::size_t(M)] = acc.get();
  });
  std::vector<double> S(layer.size(), 0.0);
  StableSum<double> run;
  for (std::size_t M = 1; M < layer.size(); ++M) {
    run += layer[M];
    S[M] = run.get();
  }
  return S;
}

/// Least-squares extrapolation of S(M) over M_max/4 <= M <= M_max with the
/// leading oscillatory corrections cos, sin(w M) / M^k of the cube corners,
/// edges and faces.
inline std::pair<double, double> extrapolate_cube_sum(const std::vector<double>& S, int M_max) {
  const int lo = std::max(2, M_max / 4);
  const int rows = M_max - lo + 1;
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0);
  const std::array<std::pair<double, double>, 7> osc{
      {{1, 1}, {1, 2}, {r2, 1.5}, {r2, 2.5}, {r3, 2}, {r3, 3}, {1, 3}}};
  const int cols = 1 + 2 * int(osc.size()) + 2;
  if (rows < 2 * cols) throw ConfigError("frak_e: M_max too small for the extrapolation basis");
  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < rows; ++i) {
    const double M = lo + i;
    int c = 0;
    A(i, c++) = 1.0;
    for (auto [w, k] : osc) {
      A(i, c++) = std::cos(w * M) / std::pow(M, k);
      A(i, c++) = std::sin(w * M) / std::pow(M, k);
    }
    A(i, c++) = 1.0 / (M * M);
    A(i, c++) = 1.0 / (M * M * M);
    b(i) = S[std::size_t(lo + i)];
  }
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
  const double rms = std::sqrt((A * x - b).squaredNorm() / rows);
  return {x(0), rms};
}

/// (2 a^2 a0^2 - 4 a^2 a0^2 S_inf) * sum_{sigma != nu} N_sigma N_nu.
inline FrakEResult frak_e_constant(double a, double a0, i64 pair_products, int M_max = 256, unsigned threads = 0) {
  if (M_max < 8) throw ConfigError("frak_e: M_max must be >= 8");
  FrakEResult r;
  const auto S = cube_partial_sums(M_max, threads);
  std::tie(r.S_inf, r.fit_rms) = extrapolate_cube_sum(S, M_max);
  std::vector<int> Ms;
  for (int M = 8; M <= M_max; M *= 2) Ms.push_back(M);
  if (Ms.back() != M_max) Ms.push_back(M_max);
  int prev = 0;
  for (int M : Ms) {
    FrakERow row{M, S[std::size_t(M)], 0.0};
    for (int Mp = std::max(prev, M / 2) + 1; Mp <= M; ++Mp)
      row.amplitude = std::max(row.amplitude, std::abs(S[std::size_t(Mp)] - r.S_inf));
    r.table.push_back(row);
    prev = M;
  }
  if (r.table.size() >= 2 && r.table.back().amplitude >= r.table[r.table.size() - 2].amplitude) r.warning = true;
  const double c = a * a * a0 * a0;
  r.value = (2.0 * c - 4.0 * c * r.S_inf) * double(pair_products);
  return r;
}

// ---------------------------------------------------------------------------
// Pair-excitation coefficients and bound probes.

inline const CoefficientBank& require_bank(const GPSystem& sys) {
  if (!sys.bank) throw DomainError("coefficient tables unavailable: " + sys.scattering_note);
  return *sys.bank;
}

/// xi_{k,q,p}^{nu,sigma} at k = 2 pi m, gated by the four ball indicators.
inline double xi_coefficient(const GPSystem& sys, const LatticeVector& m, const LatticeVector& q,
                             const LatticeVector& p, std::size_t sigma, std::size_t nu) {
  const auto& bank = require_bank(sys);
  const auto& Bs = sys.balls.at(sigma);
  const auto& Bn = sys.balls.at(nu);
  if (!Bs.contains(p) || !Bn.contains(q) || Bs.contains(p - m) || Bn.contains(q + m)) return 0.0;
  const i64 n = norm_sq(m);
  if (n > bank.n_max) throw AccuracyError("xi_coefficient: |m|^2 beyond the coefficient table");
  const double tp2 = 4.0 * std::numbers::pi * std::numbers::pi;
  const i64 md = dot(m, q - p);
  return -(bank.W[n] + bank.eta[n] * tp2 * double(md)) / (tp2 * double(n + md));
}

struct ProbeSample {
  LatticeVector p, q;
  std::size_t sigma = 0, nu = 0;
};

/// Evenly spaced points of each ordered ball, paired across ordered spins.
inline std::vector<ProbeSample> default_probe_samples(const GPSystem& sys, int per_ball = 6) {
  std::vector<ProbeSample> out;
  auto pick = [&](const FermiBall& b) {
    std::vector<LatticeVector> v;
    const std::size_t n = b.points.size();
    const int k = int(std::min<std::size_t>(n, std::size_t(per_ball)));
    for (int i = 0; i < k; ++i) v.push_back(b.points[k == 1 ? 0 : (n - 1) * std::size_t(i) / std::size_t(k - 1)]);
    return v;
  };
  for (auto [sg, nu] : sys.spin_pairs())
    for (const auto& p : pick(sys.balls[sg]))
      for (const auto& q : pick(sys.balls[nu])) out.push_back({p, q, sg, nu});
  return out;
}

struct L1Probe {
  double sum_W = 0, sum_eta = 0;  // maxima over samples
  double ratio_W = 0;             // sum_W / (a / ell)
  double ratio_eta = 0;           // sum_eta / (a N^{1/3} ln N)
};

/// sum_k |W_k / (|k|^2 + k.(q-p))| chi chi and the eta analogue with the
/// k.(q-p) factor, truncated at the coefficient table.
inline L1Probe bound_probe_L1(const GPSystem& sys, const std::vector<ProbeSample>& samples, unsigned threads = 0) {
  L1Probe r;
  if (samples.empty()) return r;
  const auto& bank = require_bank(sys);
  const FermiBall kb = enumerate_ball(bank.n_max);
  const double tp2 = 4.0 * std::numbers::pi * std::numbers::pi;
  std::vector<double> sW(samples.size()), sE(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    const auto& s = samples[i];
    const auto& Bs = sys.balls[s.sigma];
    const auto& Bn = sys.balls[s.nu];
    const auto d = s.q - s.p;
    StableSum<double> w, e;
    for (const auto& m : kb.points) {
      const i64 n = norm_sq(m);
      if (n == 0 || Bs.contains(s.p - m) || Bn.contains(s.q + m)) continue;
      const i64 md = dot(m, d);
      const double den = double(n + md);
      w += std::abs(bank.W[n] / (tp2 * den));
      e += std::abs(bank.eta[n] * double(md) / den);
    }
    sW[i] = w.get();
    sE[i] = e.get();
  });
  for (std::size_t i = 0; i < samples.size(); ++i) {
    r.sum_W = std::max(r.sum_W, sW[i]);
    r.sum_eta = std::max(r.sum_eta, sE[i]);
  }
  const double Nt = double(sys.N_total);
  r.ratio_W = r.sum_W / (sys.a / sys.ell);
  r.ratio_eta = r.sum_eta / (sys.a * std::cbrt(Nt) * std::log(Nt));
  return r;
}

struct XiL2Probe {
  double max_sum = 0;  // max over sampled (q, nu, sigma) of sum_p sum_k |xi|^2
  double ratio = 0;    // max_sum / (a^2 N^{2/3})
};

inline XiL2Probe xi_l2_probe(const GPSystem& sys, const std::vector<ProbeSample>& samples, unsigned threads = 0) {
  XiL2Probe r;
  if (samples.empty()) return r;
  const auto& bank = require_bank(sys);
  const FermiBall kb = enumerate_ball(bank.n_max);
  // Distinct (q, nu, sigma) among the samples.
  std::vector<ProbeSample> qs;
  for (const auto& s : samples) {
    bool seen = false;
    for (const auto& t : qs) seen |= (t.q == s.q && t.nu == s.nu && t.sigma == s.sigma);
    if (!seen) qs.push_back(s);
  }
  std::vector<double> sums(qs.size());
  parallel_for(qs.size(), threads, [&](std::size_t i) {
    const auto& s = qs[i];
    StableSum<double> acc;
    for (const auto& p : sys.balls[s.sigma].points)
      for (const auto& m : kb.points) {
        if (norm_sq(m) == 0) continue;
        const double x = xi_coefficient(sys, m, s.q, p, s.sigma, s.nu);
        acc += x * x;
      }
    sums[i] = acc.get();
  });
  for (double x : sums) r.max_sum = std::max(r.max_sum, x);
  r.ratio = r.max_sum / (sys.a * sys.a * std::pow(double(sys.N_total), 2.0 / 3.0));
  return r;
}

// ---------------------------------------------------------------------------
// Full report.

struct ProbeRatios {
  double L1_W = 0, L1_eta = 0, xi_l2 = 0;
  double C_eta = 0, C_W = 0, C_v = 0;
};

struct EnergyBreakdown {
  double kinetic = 0;
  double first_simple = 0;
  std::optional<double> first_full;
  double second = 0;
  double frak_e = 0;
  double surface = 0;
  struct Diagnostics {
    double tail_bound = 0;
    i64 n_terms = 0;
    double first_order_remainder = 0;
    double frak_S_inf = 0;
    bool frak_warning = false;
    std::optional<ProbeRatios> probe_ratios;
    std::string scattering_note;
  } diagnostics;
};

struct ReportOptions {
  SecondOrderOptions second{};
  FirstOrderOptions first{};
  int frak_M_max = 256;
  bool probes = true;
  unsigned threads = 0;
};

inline EnergyBreakdown total_report(const GPSystem& sys, const ReportOptions& opt = {}) {
  EnergyBreakdown e;
  const double pi = std::numbers::pi;
  i64 kin = 0;
  for (const auto& b : sys.balls) kin += b.kinetic_integer_sum();
  e.kinetic = 4.0 * pi * pi * double(kin);
  const i64 pp = sys.pair_product_sum();
  e.first_simple = 4.0 * pi * sys.a * sys.a0 * double(pp);
  e.surface = 4.0 * pi * sys.a * sys.a0 * double(surface_count_correction(sys.balls, sys.N));
  e.diagnostics.scattering_note = sys.scattering_note;

  if (sys.scattering) {
    if (pp == 0) {
      e.first_full = 0.0;
    } else {
      FirstOrderOptions fo = opt.first;
      fo.threads = opt.threads;
      const auto f1 = first_order_constant(*sys.scattering, fo);
      e.first_full = f1.value * double(pp);
      e.diagnostics.first_order_remainder = f1.remainder * double(pp);
    }
  }

  SecondOrderOptions so = opt.second;
  so.threads = opt.threads;
  const auto e2 = e_second(sys, so);
  e.second = e2.value;
  e.diagnostics.tail_bound = e2.tail_bound;
  e.diagnostics.n_terms = e2.n_terms;

  if (pp != 0) {
    const auto fr = frak_e_constant(sys.a, sys.a0, pp, opt.frak_M_max, opt.threads);
    e.frak_e = fr.value;
    e.diagnostics.frak_S_inf = fr.S_inf;
    e.diagnostics.frak_warning = fr.warning;
  }

  if (opt.probes && sys.bank) {
    ProbeRatios pr;
    const auto samples = default_probe_samples(sys);
    const auto l1 = bound_probe_L1(sys, samples, opt.threads);
    pr.L1_W = l1.ratio_W;
    pr.L1_eta = l1.ratio_eta;
    pr.xi_l2 = xi_l2_probe(sys, samples, opt.threads).ratio;
    pr.C_eta = sys.bank->C_eta;
    pr.C_W = sys.bank->C_W;
    pr.C_v = sys.bank->C_v;
    e.diagnostics.probe_ratios = pr;
  }
  return e;
}

}  // namespace hyfermi
