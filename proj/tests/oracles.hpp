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

// Independent reference computations. Nothing here calls into the library
// algorithms it is used to check; shared code is limited to plain data types.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <tuple>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/sinc.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using i64 = std::int64_t;

/// Histogram of |m|^2 over the cube [-r, r]^3, accumulated into ball counts
/// for every R <= R_max.
inline std::vector<i64> cube_scan_counts(i64 R_max) {
  i64 r = 0;
  while ((r + 1) * (r + 1) <= R_max) ++r;
  std::vector<i64> hist(std::size_t(R_max) + 1, 0);
  for (i64 x = -r; x <= r; ++x)
    for (i64 y = -r; y <= r; ++y)
      for (i64 z = -r; z <= r; ++z) {
        const i64 n = x * x + y * y + z * z;
        if (n <= R_max) ++hist[std::size_t(n)];
      }
  for (std::size_t n = 1; n < hist.size(); ++n) hist[n] += hist[n - 1];
  return hist;
}

using Pt = std::tuple<int, int, int>;

inline std::vector<Pt> cube_scan_points(i64 R) {
  std::vector<Pt> out;
  i64 r = 0;
  while ((r + 1) * (r + 1) <= R) ++r;
  for (i64 x = -r; x <= r; ++x)
    for (i64 y = -r; y <= r; ++y)
      for (i64 z = -r; z <= r; ++z)
        if (x * x + y * y + z * z <= R) out.emplace_back(int(x), int(y), int(z));
  return out;
}

inline i64 n2(const Pt& p) {
  auto [x, y, z] = p;
  return i64(x) * x + i64(y) * y + i64(z) * z;
}
inline i64 dotp(const Pt& a, const Pt& b) {
  return i64(std::get<0>(a)) * std::get<0>(b) + i64(std::get<1>(a)) * std::get<1>(b) +
         i64(std::get<2>(a)) * std::get<2>(b);
}

struct E2Oracle {
  double low = 0, tail = 0, value = 0;
};

/// Reference for the cutoff-split second-order sum.
///
/// Low part: k outermost, exact rational accumulation. Every term is 1/(2n)
/// or 1/(2(n + m.d)) with integer denominators, so denominators are binned
/// and summed as exact fractions.
///
/// Tail: direct sum to twice the engine's K_max under a wider Gaussian
/// taper, loop order m outermost, remainder by 21-point Gauss-Kronrod and exp-sinh
/// quadrature of the angular average.
inline E2Oracle e_second_oracle(const std::vector<i64>& R_list, double a, double a0, double kmax_factor = 8.0) {
  using boost::multiprecision::cpp_rational;
  const double pi = std::numbers::pi;
  i64 Rm = 0;
  for (auto R : R_list) Rm = std::max(Rm, R);
  const i64 cut = 16 * Rm;
  std::vector<std::vector<Pt>> balls;
  for (auto R : R_list) balls.push_back(cube_scan_points(R));
  const auto kpts = cube_scan_points(cut);

  std::map<i64, i64> den_count;  // 2 n -> count (positive), 2(n + m.d) -> count (negative)
  std::map<i64, i64> neg_count;
  std::map<Pt, i64> dcount;
  for (std::size_t s = 0; s < balls.size(); ++s)
    for (std::size_t t = 0; t < balls.size(); ++t) {
      if (s == t) continue;
      const i64 Rs = R_list[s], Rt = R_list[t];
      for (const auto& m : kpts) {
        const i64 n = n2(m);
        if (n == 0) continue;
        den_count[2 * n] += i64(balls[s].size() * balls[t].size());
        for (const auto& p : balls[s]) {
          const i64 pm = dotp(p, m), pp = n2(p);
          if (pp - 2 * pm + n <= Rs) continue;
          for (const auto& q : balls[t]) {
            const i64 qm = dotp(q, m), qq = n2(q);
            if (qq + 2 * qm + n <= Rt) continue;
            neg_count[2 * (n + qm - pm)] += 1;
          }
        }
      }
      for (const auto& p : balls[s])
        for (const auto& q : balls[t]) {
          Pt d{std::get<0>(q) - std::get<0>(p), std::get<1>(q) - std::get<1>(p), std::get<2>(q) - std::get<2>(p)};
          ++dcount[d];
        }
    }
  cpp_rational low = 0;
  for (auto [den, c] : den_count) low += cpp_rational(c, den);
  for (auto [den, c] : neg_count) low -= cpp_rational(c, den);

  const double Mc = std::sqrt(double(cut));
  const double K = kmax_factor * Mc;
  const double sg = std::max(3.0, (K - Mc) / 16.0);
  const double rc = Mc + 8.0 * sg, Kend = Mc + 16.0 * sg;
  const auto wpts = cube_scan_points(i64(std::floor(Kend * Kend)));
  std::vector<Pt> ds;
  std::vector<long double> acc;
  for (auto& [d, c] : dcount) ds.push_back(d);
  acc.assign(ds.size(), 0.0L);
  for (const auto& m : wpts) {
    const i64 n = n2(m);
    if (n <= cut) continue;
    const double psi = 0.5 * std::erfc((std::sqrt(double(n)) - rc) / sg);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const long double md = dotp(m, ds[i]);
      const long double nn = n;
      acc[i] += 0.5L * psi * (-(md * md) / (nn * (nn * nn - md * md)));
    }
  }
  boost::math::quadrature::exp_sinh<double> es;
  long double tail = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double dn = std::sqrt(double(n2(ds[i])));
    double cont = 0;
    if (dn > 0) {
      auto ang = [&](double r) {
        const double b = dn / r;
        // 1 - atanh(b)/b through log1p for small b accuracy.
        double g;
        if (b < 1e-3)
          g = -b * b / 3.0 - b * b * b * b / 5.0;
        else
          g = 1.0 - 0.5 * (std::log1p(b) - std::log1p(-b)) / b;
        return 2.0 * pi * g;
      };
      cont = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
          [&](double r) { return ang(r) * 0.5 * std::erfc((rc - r) / sg); }, Mc, Kend, 10, 1e-13);
      cont += es.integrate([&](double r) { return ang(r); }, Kend, std::numeric_limits<double>::infinity(), 1e-14);
    }
    tail += (long double)dcount[ds[i]] * (acc[i] + cont);
  }
  E2Oracle o;
  o.low = static_cast<double>(low);
  o.tail = double(tail);
  o.value = 8.0 * a * a * a0 * a0 * static_cast<double>(low + cpp_rational(double(tail)));
  return o;
}

/// Gaussian-damped shell sum T(eps) = sum_n r3(n) cos(sqrt n)/n exp(-eps n),
/// with r3 from a direct count over x, y and then z. T is smooth in eps
/// near 0, so Richardson on (eps, eps/2) removes the linear term.
inline double shell_cos_sum_limit(double eps) {
  const double span = 40.0;
  const i64 nmax = i64(span / (eps / 2.0));
  i64 r = 0;
  while ((r + 1) * (r + 1) <= nmax) ++r;
  std::vector<i64> r2(std::size_t(nmax) + 1, 0);
  for (i64 x = 0; x <= r; ++x)
    for (i64 y = 0; x * x + y * y <= nmax; ++y) {
      const int mult = (x ? 2 : 1) * (y ? 2 : 1);
      r2[std::size_t(x * x + y * y)] += mult;
    }
  auto T = [&](double e) {
    long double s = 0;
    for (i64 z = 0; z <= r; ++z) {
      const int mz = z ? 2 : 1;
      for (i64 m = 0; m + z * z <= nmax; ++m) {
        const i64 n = m + z * z;
        if (n == 0 || r2[std::size_t(m)] == 0) continue;
        const double w = double(mz * r2[std::size_t(m)]);
        s += w * std::cos(std::sqrt(double(n))) / double(n) * std::exp(-e * double(n));
      }
    }
    return double(s);
  };
  return 2.0 * T(eps / 2.0) - T(eps);
}

/// Zero-energy scattering length by adaptive Dormand-Prince integration of
/// u'' = v u / 2 from u(0) = 0, u'(0) = 1, restarted at every breakpoint.
inline double scattering_length_ode(const std::function<double(double)>& v, std::vector<double> breaks) {
  using State = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;
  State x{0.0, 1.0};
  auto rhs = [&](const State& s, State& d, double r) {
    d[0] = s[1];
    d[1] = 0.5 * v(r) * s[0];
  };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i], hi = breaks[i + 1];
    // Evaluate strictly inside each piece so jumps at breakpoints are not sampled.
    auto piece = [&](const State& s, State& d, double r) { rhs(s, d, std::clamp(r, lo + 1e-15 * (hi - lo), hi - 1e-15 * (hi - lo))); };
    ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-14, 1e-14), piece, x, lo, hi,
                            (hi - lo) / 64.0);
  }
  return breaks.back() - x[0] / x[1];
}

/// Closed-form Neumann ground state of the square well of height h and
/// radius R in the ball of radius L: u = sinh(kappa y) inside and a
/// trigonometric branch outside, with L u'(L) = u(L).
struct SquareWellNeumann {
  double h = 0, R = 0, L = 0;
  long double lambda = 0, kappa = 0, k = 0, A = 0, B = 0, scale = 1;

  SquareWellNeumann(double h_, double R_, double L_) : h(h_), R(R_), L(L_) {
    auto g = [&](long double lam) {
      set(lam);
      const long double T = L - R;
      const long double u = A * std::sin(k * T) + B * std::cos(k * T);
      const long double du = A * k * std::cos(k * T) - B * k * std::sin(k * T);
      return L * du - u;
    };
    const long double a0 = R - std::tanh(std::sqrt(h / 2.0) * R) / std::sqrt(h / 2.0);
    long double lo = 1.5L * a0 / (L * (long double)L * L), hi = 6.0L * a0 / (L * (long double)L * L);
    long double glo = g(lo);
    for (int it = 0; it < 200; ++it) {  // plain bisection
      const long double mid = 0.5L * (lo + hi);
      const long double gm = g(mid);
      if ((gm > 0) == (glo > 0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    set(0.5L * (lo + hi));
    const long double T = L - R;
    scale = L / (A * std::sin(k * T) + B * std::cos(k * T));
  }

  void set(long double lam) {
    lambda = lam;
    kappa = std::sqrt(h / 2.0L - lam);
    k = std::sqrt(lam);
    B = std::sinh(kappa * R);
    A = kappa * std::cosh(kappa * R) / k;
  }

  /// u(y) with u(L) = L.
  double u(double y) const {
    if (y <= R) return double(scale * std::sinh(kappa * y));
    const long double t = y - R;
    return double(scale * (A * std::sin(k * t) + B * std::cos(k * t)));
  }

  /// int_{|y| < L} (1 - u(y)/y) dy.
  double int_w() const {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto f = [&](double y) { return 4.0 * std::numbers::pi * (y * y - y * u(y)); };
    return GK::integrate(f, 0.0, R, 12, 1e-14) + GK::integrate(f, R, L, 15, 1e-14);
  }
};

/// 4 pi int_0^ell r^2 sin(|p| r)/(|p| r) dr by quadrature.
inline double chi_hat_quadrature(double ell, double p) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  return 4.0 * std::numbers::pi *
         GK::integrate([&](double r) { return r * r * boost::math::sinc_pi(p * r); }, 0.0, ell, 15, 1e-14);
}

}  // namespace oracle
