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

// Integer geometry of Fermi balls. Momenta are k = 2*pi*m with m integer, so
// a ball of squared radius R (in units of (2*pi)^2) is {m : |m|^2 <= R} and
// every shell test is exact integer arithmetic.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "hyfermi/errors.hpp"

namespace hyfermi {

using i64 = std::int64_t;

struct LatticeVector {
  std::int32_t x = 0, y = 0, z = 0;

  friend bool operator==(const LatticeVector&, const LatticeVector&) = default;
  LatticeVector operator-() const { return {-x, -y, -z}; }
  LatticeVector operator+(const LatticeVector& o) const { return {x + o.x, y + o.y, z + o.z}; }
  LatticeVector operator-(const LatticeVector& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

constexpr i64 norm_sq(const LatticeVector& m) {
  return i64(m.x) * m.x + i64(m.y) * m.y + i64(m.z) * m.z;
}
constexpr i64 dot(const LatticeVector& a, const LatticeVector& b) {
  return i64(a.x) * b.x + i64(a.y) * b.y + i64(a.z) * b.z;
}

/// floor(sqrt(n)) for n >= 0, exact.
inline i64 isqrt(i64 n) {
  if (n <= 0) return 0;
  i64 r = static_cast<i64>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

/// r3(n) and cumulative ball counts for 0 <= n <= max_n.
struct ShellTable {
  i64 max_n = -1;
  std::vector<i64> r3;
  std::vector<i64> cumulative;

  /// Built as the convolution of r2 with the squares, so it does not share
  /// code with the point enumeration.
  static ShellTable build(i64 max_n) {
    if (max_n < 0) throw DomainError("ShellTable: max_n must be >= 0");
    ShellTable t;
    t.max_n = max_n;
    std::vector<i64> r2(static_cast<std::size_t>(max_n) + 1, 0);
    const i64 r = isqrt(max_n);
    for (i64 x = -r; x <= r; ++x) {
      const i64 rest = max_n - x * x;
      const i64 ymax = isqrt(rest);
      for (i64 y = -ymax; y <= ymax; ++y) ++r2[x * x + y * y];
    }
    t.r3.assign(r2.size(), 0);
    for (i64 z = -r; z <= r; ++z) {
      const i64 z2 = z * z;
      for (i64 n = z2; n <= max_n; ++n) t.r3[n] += r2[n - z2];
    }
    t.cumulative.resize(t.r3.size());
    i64 acc = 0;
    for (std::size_t n = 0; n < t.r3.size(); ++n) t.cumulative[n] = (acc += t.r3[n]);
    return t;
  }

  i64 count(i64 R) const { return R < 0 ? 0 : cumulative.at(static_cast<std::size_t>(R)); }
};

struct FermiBall {
  i64 R = 0;
  std::vector<LatticeVector> points;  // ordered by (|m|^2, x, y, z)
  std::vector<i64> shell_counts;      // r3(n) for 0 <= n <= R
  i64 count = 0;

  bool contains(const LatticeVector& m) const { return norm_sq(m) <= R; }
  i64 kinetic_integer_sum() const {
    i64 s = 0;
    for (std::size_t n = 0; n < shell_counts.size(); ++n) s += i64(n) * shell_counts[n];
    return s;
  }
};

/// Upper bound on enumerated points; guards against accidental huge R.
inline constexpr i64 kDefaultPointBudget = 60'000'000;

/// Every m with |m|^2 <= R, ordered by (|m|^2, lexicographic).
inline FermiBall enumerate_ball(i64 R, i64 point_budget = kDefaultPointBudget) {
  if (R < 0) throw DomainError("enumerate_ball: R must be >= 0");
  const double estimate = 4.0 / 3.0 * std::numbers::pi * std::pow(double(R), 1.5);
  if (estimate > double(point_budget))
    throw CapacityError("enumerate_ball: R=" + std::to_string(R) + " exceeds the point budget");

  FermiBall b;
  b.R = R;
  b.shell_counts.assign(static_cast<std::size_t>(R) + 1, 0);
  const i64 r = isqrt(R);
  // Pass 1: shell histogram. Pass 2: counting sort into shell slots, scanning
  // lexicographically so ties stay ordered.
  for (i64 x = -r; x <= r; ++x)
    for (i64 y = -r; y <= r; ++y) {
      const i64 rest = R - x * x - y * y;
      if (rest < 0) continue;
      const i64 zmax = isqrt(rest);
      for (i64 z = -zmax; z <= zmax; ++z) ++b.shell_counts[x * x + y * y + z * z];
    }
  std::vector<i64> offset(b.shell_counts.size() + 1, 0);
  for (std::size_t n = 0; n < b.shell_counts.size(); ++n) offset[n + 1] = offset[n] + b.shell_counts[n];
  b.count = offset.back();
  b.points.resize(static_cast<std::size_t>(b.count));
  for (i64 x = -r; x <= r; ++x)
    for (i64 y = -r; y <= r; ++y) {
      const i64 rest = R - x * x - y * y;
      if (rest < 0) continue;
      const i64 zmax = isqrt(rest);
      for (i64 z = -zmax; z <= zmax; ++z) {
        const i64 n = x * x + y * y + z * z;
        b.points[offset[n]++] = {std::int32_t(x), std::int32_t(y), std::int32_t(z)};
      }
    }
  return b;
}

struct MagicEntry {
  i64 R = 0;
  i64 N = 0;
  i64 kinetic_integer_sum = 0;  // sum of |m|^2 over the ball
};

/// All distinct full-ball cardinalities N <= max_count, each with its
/// smallest R. Radii with r3(R) = 0 repeat a count and are skipped.
inline std::vector<MagicEntry> magic_numbers(i64 max_count) {
  if (max_count < 1) throw DomainError("magic_numbers: max_count must be >= 1");
  // count(R) >= (4/3) pi (sqrt(R) - sqrt(3)/2)^3, so this R is large enough.
  const double rad = std::cbrt(3.0 * double(max_count) / (4.0 * std::numbers::pi)) + 1.0;
  const i64 Rmax = i64(std::ceil(rad * rad)) + 2;
  const ShellTable t = ShellTable::build(Rmax);
  std::vector<MagicEntry> out;
  i64 kin = 0;
  for (i64 R = 0; R <= Rmax; ++R) {
    kin += R * t.r3[R];
    if (t.cumulative[R] > max_count) break;
    if (t.r3[R] == 0) continue;
    out.push_back({R, t.cumulative[R], kin});
  }
  return out;
}

struct BallForCount {
  FermiBall ball;
  bool is_magic = false;
};

/// Smallest ball holding at least N points.
inline BallForCount ball_for_count(i64 N) {
  if (N < 1) throw DomainError("ball_for_count: N must be >= 1");
  i64 Rmax = 16;
  for (;;) {
    const ShellTable t = ShellTable::build(Rmax);
    if (t.cumulative.back() >= N) {
      i64 R = 0;
      while (t.cumulative[R] < N) ++R;
      return {enumerate_ball(R), t.cumulative[R] == N};
    }
    Rmax *= 2;
  }
}

/// R of the ball with exactly N points, or -1 if N is not magic.
inline i64 magic_radius(i64 N) {
  if (N < 1) return -1;
  i64 Rmax = 16;
  for (;;) {
    const ShellTable t = ShellTable::build(Rmax);
    if (t.cumulative.back() >= N) {
      i64 R = 0;
      while (t.cumulative[R] < N) ++R;
      return t.cumulative[R] == N ? R : -1;
    }
    Rmax *= 2;
  }
}

/// |count(R) - (4/3) pi R^{3/2}| / R^{21/32 + eps}; zero at R = 0.
inline double ball_count_defect(i64 R, i64 count, double eps) {
  if (R == 0) return 0.0;
  const double vol = 4.0 / 3.0 * std::numbers::pi * std::pow(double(R), 1.5);
  return std::abs(double(count) - vol) / std::pow(double(R), 21.0 / 32.0 + eps);
}

inline double fermi_momentum_check(i64 N, double eps = 0.05) {
  const i64 R = magic_radius(N);
  if (R < 0) throw DomainError("fermi_momentum_check: N=" + std::to_string(N) + " is not magic");
  return ball_count_defect(R, N, eps);
}

/// (2 pi)^2 * sum |m|^2, with the integer sum formed first.
inline double kinetic_sum(const FermiBall& b) {
  return 4.0 * std::numbers::pi * std::numbers::pi * double(b.kinetic_integer_sum());
}

/// sum_{i != j} (#B_i #B_j - N_i N_j).
inline i64 surface_count_correction(const std::vector<FermiBall>& balls, const std::vector<i64>& targets) {
  if (balls.size() != targets.size())
    throw DomainError("surface_count_correction: balls and targets differ in length");
  i64 s = 0;
  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = 0; j < balls.size(); ++j)
      if (i != j) s += balls[i].count * balls[j].count - targets[i] * targets[j];
  return s;
}

}  // namespace hyfermi
