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

// Radial scattering problem for a non-negative, compactly supported
// potential v, and the Fourier coefficient families built from it.
//
// Everything is solved in scaled coordinates y = x/a, where the Neumann ball
// has radius L = ell/a and u(y) = y f(y). Inside the support [0, R_v] the
// equation -u'' + v u / 2 = lambda u is integrated with RK4; outside it the
// solution is closed form. Physical coefficients follow by scaling:
//
//   eta_p  = -a^3 What(s),   vhat_p = a V(s),   chihat_p = a^3 X(s),   s = a|p|.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "hyfermi/errors.hpp"
#include "hyfermi/lattice.hpp"
#include "hyfermi/summation.hpp"

namespace hyfermi {

namespace detail {

inline constexpr double kPi = std::numbers::pi;

inline double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// 1 - sin(x)/x without cancellation.
inline double one_minus_sinc(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 0.1)
    return x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
  return 1.0 - std::sin(x) / x;
}

// (sin x - x cos x) / x^3, the ball transform kernel; 1/3 at x = 0.
inline double ball_kernel(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 0.05)
    return 1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0;
  return (std::sin(x) - x * std::cos(x)) / (x2 * x);
}

// Quintic Hermite interpolation on one cell, t in [0, 1].
inline double hermite5(double t, double h, double p0, double d0, double s0, double p1, double d1,
                       double s1) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double H3 = 0.5 * t3 - t4 + 0.5 * t5;
  const double H4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double H5 = 10 * t3 - 15 * t4 + 6 * t5;
  return p0 * H0 + h * d0 * H1 + h * h * s0 * H2 + h * h * s1 * H3 + h * d1 * H4 + p1 * H5;
}

}  // namespace detail

class RadialPotential {
 public:
  enum class Kind { square_well, tabulated };

  static RadialPotential square_well(double height, double radius) {
    if (!(height >= 0) || !std::isfinite(height)) throw DomainError("square_well: height must be >= 0");
    if (!(radius > 0) || !std::isfinite(radius)) throw DomainError("square_well: radius must be > 0");
    RadialPotential p;
    p.kind_ = Kind::square_well;
    p.height_ = height;
    p.radius_ = radius;
    return p;
  }

  /// Piecewise-linear table; v is taken as 0 beyond the last node.
  static RadialPotential tabulated(std::vector<double> r, std::vector<double> v) {
    if (r.size() != v.size() || r.size() < 2) throw DomainError("tabulated potential: need >= 2 (r, v) rows");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::isfinite(r[i]) || !std::isfinite(v[i])) throw DomainError("tabulated potential: non-finite entry");
      if (v[i] < 0) throw DomainError("tabulated potential: v must be non-negative");
      if (i > 0 && !(r[i] > r[i - 1])) throw DomainError("tabulated potential: r must be increasing");
    }
    if (r.front() != 0.0) throw DomainError("tabulated potential: first row must be r = 0");
    RadialPotential p;
    p.kind_ = Kind::tabulated;
    p.r_ = std::move(r);
    p.v_ = std::move(v);
    return p;
  }

  Kind kind() const { return kind_; }
  double height() const { return height_; }
  double radius() const { return radius_; }
  const std::vector<double>& table_r() const { return r_; }
  const std::vector<double>& table_v() const { return v_; }

  double support_radius() const { return kind_ == Kind::square_well ? radius_ : r_.back(); }

  bool is_zero() const {
    if (kind_ == Kind::square_well) return height_ == 0.0;
    return std::all_of(v_.begin(), v_.end(), [](double x) { return x == 0.0; });
  }

  /// Value with the convention v(r) = lim from the left at r when
  /// `left` is set, from the right otherwise. Only matters at jumps.
  double value(double r, bool left = false) const {
    if (kind_ == Kind::square_well) return (left ? r <= radius_ : r < radius_) ? height_ : 0.0;
    if (r > r_.back() || (!left && r == r_.back())) return 0.0;
    if (r <= 0) return v_.front();
    auto it = std::upper_bound(r_.begin(), r_.end(), r);
    std::size_t j = std::size_t(it - r_.begin());
    if (j >= r_.size()) return v_.back();
    const double t = (r - r_[j - 1]) / (r_[j] - r_[j - 1]);
    return v_[j - 1] + t * (v_[j] - v_[j - 1]);
  }
  double operator()(double r) const { return value(r); }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    if (kind_ == Kind::square_well)
      os << "well:height=" << height_ << ",radius=" << radius_;
    else
      os << "table:" << (source_.empty() ? std::string("<inline>") : source_) << " (" << r_.size() << " rows)";
    return os.str();
  }

  void set_source(std::string s) { source_ = std::move(s); }

 private:
  Kind kind_ = Kind::square_well;
  double height_ = 0.0, radius_ = 1.0;
  std::vector<double> r_, v_;
  std::string source_;
};

/// CSV with header "r,v".
inline RadialPotential load_potential_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open potential table '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("potential table '" + path + "' is empty");
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    return s;
  };
  if (strip(line) != "r,v") throw ConfigError("potential table '" + path + "': header must be 'r,v'");
  std::vector<double> r, v;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("potential table line " + std::to_string(lineno) + ": expected r,v");
    try {
      std::size_t used = 0;
      const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
      r.push_back(std::stod(a, &used));
      if (used != a.size()) throw std::invalid_argument("trailing");
      v.push_back(std::stod(b, &used));
      if (used != b.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("potential table line " + std::to_string(lineno) + ": bad number");
    }
  }
  auto p = RadialPotential::tabulated(std::move(r), std::move(v));
  p.set_source(path);
  return p;
}

/// `well:height=<f>,radius=<f>` or `table:<path>`.
inline RadialPotential parse_potential(const std::string& spec) {
  if (spec.rfind("table:", 0) == 0) return load_potential_table(spec.substr(6));
  if (spec.rfind("well:", 0) != 0) throw ConfigError("potential spec must start with 'well:' or 'table:'");
  std::optional<double> h, r;
  std::stringstream ss(spec.substr(5));
  std::string kv;
  while (std::getline(ss, kv, ',')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("potential spec: expected key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    double x = 0;
    try {
      std::size_t used = 0;
      x = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("potential spec: bad number '" + val + "'");
    }
    if (key == "height")
      h = x;
    else if (key == "radius")
      r = x;
    else
      throw ConfigError("potential spec: unknown key '" + key + "'");
  }
  if (!h || !r) throw ConfigError("potential spec: well needs height and radius");
  return RadialPotential::square_well(*h, *r);
}

namespace detail {

// RK4 profile of -u'' + (v/2 - lambda) u = 0 on [0, R], u(0) = 0, u'(0) = 1.
// Stage evaluations at a cell's right end use the left limit of v, so a
// jump at R is seen from inside.
struct InnerProfile {
  double R = 0, h = 0;
  int steps = 0;
  std::vector<double> u, du;
  std::vector<double> d2u_right;  // u'' at node i seen from cell i
  std::vector<double> d2u_left;   // u'' at node i seen from cell i-1
};

inline InnerProfile integrate_inner(const RadialPotential& v, double lambda, int steps, bool keep) {
  InnerProfile p;
  p.R = v.support_radius();
  p.steps = steps;
  p.h = p.R / steps;
  const double h = p.h;
  double u = 0.0, du = 1.0;
  if (keep) {
    p.u.resize(steps + 1);
    p.du.resize(steps + 1);
    p.d2u_right.resize(steps + 1);
    p.d2u_left.resize(steps + 1);
    p.u[0] = u;
    p.du[0] = du;
  }
  for (int i = 0; i < steps; ++i) {
    const double y0 = i * h;
    const double q0 = 0.5 * v.value(y0, false) - lambda;
    const double qm = 0.5 * v.value(y0 + 0.5 * h, false) - lambda;
    const double q1 = 0.5 * v.value(y0 + h, true) - lambda;
    const double k1u = du, k1d = q0 * u;
    const double k2u = du + 0.5 * h * k1d, k2d = qm * (u + 0.5 * h * k1u);
    const double k3u = du + 0.5 * h * k2d, k3d = qm * (u + 0.5 * h * k2u);
    const double k4u = du + h * k3d, k4d = q1 * (u + h * k3u);
    if (keep) p.d2u_right[i] = q0 * u;
    u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    du += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
    if (keep) {
      p.u[i + 1] = u;
      p.du[i + 1] = du;
      p.d2u_left[i + 1] = q1 * u;
    }
  }
  if (!keep) {
    p.u = {u};
    p.du = {du};
  }
  return p;
}

}  // namespace detail

struct ScatteringOptions {
  int steps = 256;          // RK4 cells across the potential support
  double max_ratio = 0.25;  // largest accepted a / ell
};

/// Zero-energy scattering length: u(r) = c (r - a0) beyond the support.
inline double scattering_length(const RadialPotential& v, int steps = 2048) {
  if (v.is_zero()) return 0.0;
  if (steps < 4) throw ConfigError("scattering_length: steps must be >= 4");
  const auto p = detail::integrate_inner(v, 0.0, steps, false);
  const double u = p.u.back(), du = p.du.back();
  if (!(du > 0) || !std::isfinite(u)) throw NumericalError("scattering_length: integration produced u'(R) <= 0");
  return p.R - u / du;
}

struct FieldBounds {
  double f_min = 1.0, f_max = 1.0;
};

class ScatteringSolution {
 public:
  double a = 0, ell = 0, L = 0;
  double lambda = 0;  // Neumann eigenvalue in scaled units
  double a0 = 0;      // scattering length on the same grid
  double k = 0;       // sqrt(lambda)
  int steps = 0;
  RadialPotential potential = RadialPotential::square_well(0.0, 1.0);

  bool trivial() const { return trivial_; }
  double support() const { return inner_.R; }

  /// u(y), normalized so that u(L) = L.
  double u(double y) const {
    if (trivial_ || y >= L) return y;
    if (y >= inner_.R) return y - h_outer(y);
    return inner_u(y);
  }
  double f(double y) const { return y > 0 ? u(y) / y : (trivial_ ? 1.0 : c_ * inner_.du[0]); }
  double w(double y) const { return y >= L ? 0.0 : 1.0 - f(y); }

  /// h = y - u = y w, the quantity all transforms are built from.
  double h(double y) const {
    if (trivial_ || y >= L) return 0.0;
    if (y >= inner_.R) return h_outer(y);
    return y - inner_u(y);
  }

  /// What(s) = 4 pi int_0^L w(y) y^2 sinc(s y) dy.
  double W_hat(double s) const {
    if (trivial_) return 0.0;
    double in = inner_integral([&](double y, double uu) { return (y - uu) * y * detail::sinc(s * y); }, s);
    double out = outer_integral([&](double y) { return h_outer(y) * y * detail::sinc(s * y); }, s);
    return 4.0 * detail::kPi * (in + out);
  }

  /// Y(s) = 4 pi int v w y^2 sinc(s y) dy, the transform of v w.
  double Y(double s) const {
    if (trivial_) return 0.0;
    return 4.0 * detail::kPi *
           inner_integral([&](double y, double uu, double vv) { return vv * (y - uu) * y * detail::sinc(s * y); }, s,
                          true);
  }

  /// V(s) = 4 pi int v y^2 sinc(s y) dy.
  double V(double s) const { return potential_transform(potential, s); }

  /// X(s), transform of the indicator of the ball of radius L.
  double X(double s) const { return 4.0 * detail::kPi * L * L * L * detail::ball_kernel(s * L); }

  /// int w over the scaled ball.
  double int_w() const { return W_hat(0.0); }

  /// int v f over R^3 in scaled coordinates.
  double int_vf() const {
    if (trivial_) return potential_transform(potential, 0.0);
    return 4.0 * detail::kPi * inner_integral([](double y, double uu, double vv) { return vv * uu * y; }, 0.0, true);
  }

  // Physical coefficients at p = 2 pi m, indexed by n = |m|^2.
  double s_of(i64 n) const { return a * 2.0 * detail::kPi * std::sqrt(double(n)); }
  double eta(i64 n) const { return -a * a * a * W_hat(s_of(n)); }
  double v_hat(i64 n) const { return a * V(s_of(n)); }
  double W_coeff(i64 n) const {
    if (trivial_) return 0.0;
    return a * lambda * (X(s_of(n)) - W_hat(s_of(n)));
  }

  FieldBounds field_bounds(int samples = 256) const {
    FieldBounds b;
    if (trivial_) return b;
    b.f_min = b.f_max = f(0.0);
    auto upd = [&](double y) {
      const double x = f(y);
      b.f_min = std::min(b.f_min, x);
      b.f_max = std::max(b.f_max, x);
    };
    for (int i = 1; i <= inner_.steps; ++i) upd(i * inner_.h);
    for (int i = 0; i <= samples; ++i) upd(inner_.R + (L - inner_.R) * i / samples);
    return b;
  }

  static double potential_transform(const RadialPotential& v, double s) {
    using boost::math::quadrature::gauss;
    if (v.is_zero()) return 0.0;
    if (v.kind() == RadialPotential::Kind::square_well) {
      const double R = v.radius();
      return 4.0 * detail::kPi * v.height() * R * R * R * detail::ball_kernel(s * R);
    }
    const auto& r = v.table_r();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      const int sub = std::max(1, int(std::ceil(s * (r[i + 1] - r[i]))));
      for (int j = 0; j < sub; ++j) {
        const double lo = r[i] + (r[i + 1] - r[i]) * j / sub, hi = r[i] + (r[i + 1] - r[i]) * (j + 1) / sub;
        acc += gauss<double, 10>::integrate(
            [&](double y) { return v.value(y) * y * y * detail::sinc(s * y); }, lo, hi);
      }
    }
    return 4.0 * detail::kPi * acc;
  }

 private:
  friend ScatteringSolution solve_neumann(const RadialPotential&, double, double, const ScatteringOptions&);

  double inner_u(double y) const {
    const auto& p = inner_;
    int i = std::min(int(y / p.h), p.steps - 1);
    const double t = (y - i * p.h) / p.h;
    return c_ * detail::hermite5(t, p.h, p.u[i], p.du[i], p.d2u_right[i], p.u[i + 1], p.du[i + 1],
                                 p.d2u_left[i + 1]);
  }

  // Outer region with t = L - y: h = 2 L sin^2(k t / 2) - t (1 - sinc(k t)).
  double h_outer(double y) const {
    const double t = L - y;
    const double sh = std::sin(0.5 * k * t);
    return 2.0 * L * sh * sh - t * detail::one_minus_sinc(k * t);
  }

  template <typename F>
  double inner_integral(F&& g, double s, bool with_v = false) const {
    using boost::math::quadrature::gauss;
    const auto& p = inner_;
    const int sub = std::max(1, int(std::ceil(s * p.h / 2.0)));
    StableSum<double> acc;
    for (int i = 0; i < p.steps; ++i) {
      for (int j = 0; j < sub; ++j) {
        const double lo = p.h * (i + double(j) / sub), hi = p.h * (i + double(j + 1) / sub);
        acc += gauss<double, 8>::integrate(
            [&](double y) {
              const double t = (y - i * p.h) / p.h;
              const double uu = c_ * detail::hermite5(t, p.h, p.u[i], p.du[i], p.d2u_right[i], p.u[i + 1],
                                                      p.du[i + 1], p.d2u_left[i + 1]);
              if constexpr (std::is_invocable_v<F, double, double, double>) {
                // Gauss nodes are cell interior, so jumps at nodes never matter.
                const double vv = with_v ? potential.value(y) : 0.0;
                return g(y, uu, vv);
              } else {
                return g(y, uu);
              }
            },
            lo, hi);
      }
    }
    return acc.get();
  }

  template <typename F>
  double outer_integral(F&& g, double s) const {
    using boost::math::quadrature::gauss;
    const double lo = inner_.R, T = L - inner_.R;
    if (T <= 0) return 0.0;
    const int panels = std::max(4, int(std::ceil(s * T / 1.5)));
    StableSum<double> acc;
    for (int j = 0; j < panels; ++j)
      acc += gauss<double, 16>::integrate(g, lo + T * j / panels, lo + T * (j + 1) / panels);
    return acc.get();
  }

  detail::InnerProfile inner_;
  double c_ = 1.0;
  bool trivial_ = false;
};

/// Lowest lambda with L u'(L) = u(L) on [0, L], L = ell / a; u(L) = L.
inline ScatteringSolution solve_neumann(const RadialPotential& v, double a, double ell,
                                        const ScatteringOptions& opt = {}) {
  if (!(a > 0) || !(ell > 0)) throw DomainError("solve_neumann: a and ell must be positive");
  if (!(a / ell < opt.max_ratio))
    throw DomainError("solve_neumann: a/ell = " + std::to_string(a / ell) + " exceeds the smallness threshold " +
                      std::to_string(opt.max_ratio));
  if (opt.steps < 4) throw ConfigError("solve_neumann: steps must be >= 4");
  ScatteringSolution sol;
  sol.a = a;
  sol.ell = ell;
  sol.L = ell / a;
  sol.steps = opt.steps;
  sol.potential = v;
  const double L = sol.L, R = v.support_radius();
  if (!(R < L)) throw DomainError("solve_neumann: potential support must lie inside the ball of radius ell/a");
  if (v.is_zero()) {
    sol.trivial_ = true;
    sol.inner_.R = R;
    return sol;
  }

  const double T = L - R;
  auto mismatch = [&](double lam) {
    const auto p = detail::integrate_inner(v, lam, opt.steps, false);
    const double uR = p.u.back(), duR = p.du.back();
    const double kk = std::sqrt(lam), x = kk * T, sh = std::sin(0.5 * x);
    const double A = R - 2.0 * L * sh * sh + T * detail::one_minus_sinc(x);
    const double B = 1.0 - 2.0 * sh * sh + L * kk * kk * T * detail::sinc(x);
    return duR * A - uR * B;
  };

  const auto p0 = detail::integrate_inner(v, 0.0, opt.steps, false);
  sol.a0 = R - p0.u.back() / p0.du.back();
  if (!(mismatch(0.0) > 0)) throw NumericalError("solve_neumann: mismatch at lambda = 0 is not positive");
  double hi = 3.0 * std::max(sol.a0, 1e-300) / (L * L * L);
  int doublings = 0;
  while (mismatch(hi) > 0) {
    hi *= 2.0;
    if (++doublings > 200) throw NumericalError("solve_neumann: no eigenvalue bracket found");
  }
  std::uintmax_t iters = 200;
  const auto [lo_r, hi_r] =
      boost::math::tools::toms748_solve(mismatch, 0.0, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  if (iters >= 200) throw NumericalError("solve_neumann: root finder did not converge");
  sol.lambda = 0.5 * (lo_r + hi_r);
  sol.k = std::sqrt(sol.lambda);

  sol.inner_ = detail::integrate_inner(v, sol.lambda, opt.steps, true);
  // Scale so that the closed-form outer branch, which has u(L) = L, meets
  // the inner profile at R.
  const double x = sol.k * T;
  const double uR_outer = L * std::cos(x) - T * detail::sinc(x);
  sol.c_ = uR_outer / sol.inner_.u.back();

  for (int i = 1; i <= sol.inner_.steps; ++i)
    if (!(sol.inner_.u[i] > 0)) throw NumericalError("solve_neumann: interior node found, not the ground state");
  const auto fb = sol.field_bounds();
  if (!(fb.f_min > 0)) throw NumericalError("solve_neumann: f is not positive, not the ground state");
  return sol;
}

/// 4 pi ell^3 (sin x - x cos x) / x^3 with x = ell |p|, |p| = 2 pi sqrt(n).
inline double chi_hat(double ell, i64 n) {
  if (!(ell > 0)) throw DomainError("chi_hat: ell must be positive");
  const double p = 2.0 * detail::kPi * std::sqrt(double(n));
  return 4.0 * detail::kPi * ell * ell * ell * detail::ball_kernel(ell * p);
}

/// Terms of |p|^2 eta_p + (1/2) sum_q vhat_{p-q} eta_q + (1/2) vhat_p - W_p.
/// The convolution is the Fourier coefficient of v * eta, evaluated in
/// position space; it is exact because both supports lie inside the torus.
struct IdentityResidual {
  double residual = 0, W = 0, kinetic = 0, convolution = 0, source = 0;
};

inline IdentityResidual identity_residual(const ScatteringSolution& sol, i64 n) {
  IdentityResidual r;
  if (sol.trivial()) return r;
  const double s = sol.s_of(n), a = sol.a;
  const double Wh = sol.W_hat(s);
  r.kinetic = -a * s * s * Wh;
  r.convolution = -0.5 * a * sol.Y(s);
  r.source = 0.5 * a * sol.V(s);
  r.W = a * sol.lambda * (sol.X(s) - Wh);
  r.residual = r.kinetic + r.convolution + r.source - r.W;
  return r;
}

/// Tables of eta, W and vhat for 0 <= n <= n_max, plus the fitted constants
/// of their envelope bounds.
struct CoefficientBank {
  i64 n_max = -1;
  std::vector<double> eta, W, v_hat;
  double C_eta = 0;  // max |eta_p| / (a min(ell^2, |p|^-2))
  double C_W = 0;    // max |W_p| / a
  double C_v = 0;    // max |vhat_p - vhat_0| / (a^3 |p|^2), p != 0

  static CoefficientBank build(const ScatteringSolution& sol, i64 n_max, unsigned threads = 0) {
    if (n_max < 0) throw DomainError("CoefficientBank: n_max must be >= 0");
    CoefficientBank b;
    b.n_max = n_max;
    const std::size_t sz = std::size_t(n_max) + 1;
    b.eta.assign(sz, 0.0);
    b.W.assign(sz, 0.0);
    b.v_hat.assign(sz, 0.0);
    parallel_for(sz, threads, [&](std::size_t n) {
      const double s = sol.s_of(i64(n));
      const double Wh = sol.W_hat(s);
      b.eta[n] = -sol.a * sol.a * sol.a * Wh;
      b.W[n] = sol.trivial() ? 0.0 : sol.a * sol.lambda * (sol.X(s) - Wh);
      b.v_hat[n] = sol.a * sol.V(s);
    });
    const double a = sol.a, l2 = sol.ell * sol.ell;
    for (std::size_t n = 0; n < sz; ++n) {
      const double p2 = 4.0 * detail::kPi * detail::kPi * double(n);
      const double env = n == 0 ? l2 : std::min(l2, 1.0 / p2);
      b.C_eta = std::max(b.C_eta, std::abs(b.eta[n]) / (a * env));
      b.C_W = std::max(b.C_W, std::abs(b.W[n]) / a);
      if (n > 0) b.C_v = std::max(b.C_v, std::abs(b.v_hat[n] - b.v_hat[0]) / (a * a * a * p2));
    }
    return b;
  }
};

struct FirstOrderOptions {
  double window_radius = 24.0;  // lattice units, centre of the erfc taper
  double window_sigma = 3.0;    // taper width
  double tolerance = 1e-8;      // relative bound on the reported remainder
  unsigned threads = 0;
};

struct FirstOrderResult {
  double value = 0;
  double lattice_window = 0;    // sum over the lattice of phi vhat eta
  double continuum_window = 0;  // the same weight, integrated
  double full_integral = 0;     // sum over all p of vhat eta, via position space
  double remainder = 0;         // |lattice_window - continuum_window|
  double quadrature_error = 0;
};

/// (1/2)(vhat_0 + sum_p vhat_p eta_p).
///
/// The lattice sum is split with a smooth radial window phi. The windowed
/// part is summed shell by shell. The complement is replaced by its
/// integral, which equals the full integral (computed in position space as
/// -a int v w) minus the windowed integral. Because v * eta is supported
/// inside the torus, the only error of that replacement is the Poisson
/// aliasing of the windowed sum, reported as `remainder`.
inline FirstOrderResult first_order_constant(const ScatteringSolution& sol, const FirstOrderOptions& opt = {}) {
  FirstOrderResult r;
  if (sol.trivial()) {
    r.value = 0.5 * sol.a * sol.V(0.0);
    return r;
  }
  if (!(sol.ell + sol.a * sol.support() < 1.0))
    throw DomainError("first_order_constant: ell + a R_v must be < 1 for the torus identity");
  if (!(opt.window_sigma > 0) || !(opt.window_radius > 0)) throw ConfigError("first_order_constant: bad window");
  const double rc = opt.window_radius, sg = opt.window_sigma;
  const double rmax = rc + 8.0 * sg;
  auto phi = [&](double r) { return 0.5 * std::erfc((r - rc) / sg); };
  auto F = [&](double m) {
    const double s = sol.a * 2.0 * detail::kPi * m;
    return sol.a * sol.V(s) * (-sol.a * sol.a * sol.a * sol.W_hat(s));
  };

  const i64 n_max = i64(std::floor(rmax * rmax));
  const ShellTable t = ShellTable::build(n_max);
  std::vector<double> shell(std::size_t(n_max) + 1, 0.0);
  parallel_for(shell.size(), opt.threads, [&](std::size_t n) {
    if (t.r3[n] == 0) return;
    const double m = std::sqrt(double(n));
    shell[n] = double(t.r3[n]) * phi(m) * F(m);
  });
  StableSum<double> lat;
  for (double x : shell) lat += x;
  r.lattice_window = lat.get();

  const int panels = int(std::ceil(rmax / 0.5));
  std::vector<double> part(panels, 0.0), perr(panels, 0.0);
  parallel_for(std::size_t(panels), opt.threads, [&](std::size_t j) {
    const double lo = 0.5 * double(j), hi = std::min(rmax, 0.5 * double(j + 1));
    double e = 0;
    part[j] = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double m) { return 4.0 * detail::kPi * m * m * phi(m) * F(m); }, lo, hi, 0, 0, &e);
    perr[j] = e;
  });
  StableSum<double> cont;
  for (int j = 0; j < panels; ++j) {
    cont += part[j];
    r.quadrature_error += perr[j];
  }
  r.continuum_window = cont.get();

  r.full_integral = -sol.a * sol.Y(0.0);
  const double vhat0 = sol.a * sol.V(0.0);
  const double total = r.lattice_window + (r.full_integral - r.continuum_window);
  r.value = 0.5 * (vhat0 + total);
  r.remainder = std::abs(r.lattice_window - r.continuum_window);
  if (r.remainder > opt.tolerance * std::abs(r.value))
    throw AccuracyError("first_order_constant: window remainder " + std::to_string(r.remainder) +
                        " above tolerance");
  return r;
}

}  // namespace hyfermi
