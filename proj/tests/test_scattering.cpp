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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "hyfermi/scattering.hpp"
#include "oracles.hpp"

using namespace hyfermi;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

// Smooth bump tabulated on [0, 1]; the oracle interpolates the same nodes.
struct Bump {
  std::vector<double> r, v;
  Bump() {
    for (int i = 0; i <= 50; ++i) {
      const double x = i / 50.0;
      r.push_back(x);
      v.push_back(3.0 * (1 - x) * (1 - x));
    }
  }
  double operator()(double x) const {
    if (x >= 1.0) return 0.0;
    const int i = std::min(49, int(x * 50.0));
    const double t = (x - r[i]) / (r[i + 1] - r[i]);
    return v[i] + t * (v[i + 1] - v[i]);
  }
};

std::string write_temp(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p.string();
}

}  // namespace

TEST(ScatteringLength, SquareWellClosedForm) {
  EXPECT_LT(rel(scattering_length(RadialPotential::square_well(2, 1)), 1 - std::tanh(1.0)), 1e-8);
  EXPECT_LT(rel(scattering_length(RadialPotential::square_well(8, 0.5)), 0.5 - std::tanh(1.0) / 2), 1e-8);
}

TEST(ScatteringLength, SquareWellMatchesOde) {
  const double ref = oracle::scattering_length_ode([](double r) { return r < 1.3 ? 5.0 : 0.0; }, {0.0, 1.3, 2.0});
  EXPECT_LT(rel(scattering_length(RadialPotential::square_well(5, 1.3)), ref), 1e-9);
}

TEST(ScatteringLength, ZeroPotentialIsExactlyZero) {
  EXPECT_EQ(scattering_length(RadialPotential::square_well(0, 1)), 0.0);
  EXPECT_EQ(scattering_length(RadialPotential::tabulated({0, 1}, {0, 0})), 0.0);
}

TEST(ScatteringLength, TabulatedMatchesOde) {
  const Bump b;
  const double ref = oracle::scattering_length_ode(b, b.r);
  const double got = scattering_length(RadialPotential::tabulated(b.r, b.v));
  EXPECT_LT(rel(got, ref), 1e-7);
}

TEST(Potential, ParseWell) {
  const auto p = parse_potential("well:height=2,radius=1");
  EXPECT_EQ(p.kind(), RadialPotential::Kind::square_well);
  EXPECT_EQ(p.height(), 2.0);
  EXPECT_EQ(p.radius(), 1.0);
  EXPECT_EQ(p(0.5), 2.0);
  EXPECT_EQ(p(1.5), 0.0);
}

TEST(Potential, ParseErrors) {
  EXPECT_THROW(parse_potential("lj:eps=1"), ConfigError);
  EXPECT_THROW(parse_potential("well:height=2"), ConfigError);
  EXPECT_THROW(parse_potential("well:height=x,radius=1"), ConfigError);
  EXPECT_THROW(parse_potential("well:height=2,radius=1,depth=3"), ConfigError);
  EXPECT_THROW(parse_potential("well:height=-2,radius=1"), DomainError);
  EXPECT_THROW(parse_potential("table:/nonexistent/v.csv"), ConfigError);
}

TEST(Potential, TableFile) {
  const auto ok = write_temp("hyfermi_table_ok.csv", "r,v\n0,2\n0.5,2\n1,0\n");
  const auto p = parse_potential("table:" + ok);
  EXPECT_EQ(p.kind(), RadialPotential::Kind::tabulated);
  EXPECT_DOUBLE_EQ(p(0.75), 1.0);
  EXPECT_EQ(p(2.0), 0.0);
  EXPECT_THROW(load_potential_table(write_temp("hyfermi_table_hdr.csv", "x,y\n0,1\n1,0\n")), ConfigError);
  EXPECT_THROW(load_potential_table(write_temp("hyfermi_table_num.csv", "r,v\n0,1\n1,abc\n")), ConfigError);
  EXPECT_THROW(load_potential_table(write_temp("hyfermi_table_neg.csv", "r,v\n0,1\n1,-1\n")), DomainError);
  EXPECT_THROW(load_potential_table(write_temp("hyfermi_table_ord.csv", "r,v\n0,1\n0,1\n")), DomainError);
}

TEST(Neumann, EigenvalueMatchesClosedForm) {
  for (double ratio : {0.1, 0.01, 0.001}) {
    const double a = 0.25 * ratio, ell = 0.25;
    const auto sol = solve_neumann(RadialPotential::square_well(2, 1), a, ell, {.steps = 1024});
    const oracle::SquareWellNeumann ref(2, 1, ell / a);
    EXPECT_LT(rel(sol.lambda, double(ref.lambda)), 1e-9) << ratio;
    for (double y : {0.3, 1.0, 2.0, 0.5 * sol.L, sol.L})
      EXPECT_NEAR(sol.u(y), ref.u(y), 1e-9 * std::max(1.0, y)) << y;
  }
}

TEST(Neumann, IntegralOfDefectMatchesClosedForm) {
  const double a = 0.01, ell = 0.25;
  const auto sol = solve_neumann(RadialPotential::square_well(2, 1), a, ell, {.steps = 1024});
  const oracle::SquareWellNeumann ref(2, 1, ell / a);
  EXPECT_LT(rel(sol.int_w(), ref.int_w()), 1e-9);
}

TEST(Neumann, ZeroPotentialIsTrivial) {
  const auto sol = solve_neumann(RadialPotential::square_well(0, 1), 0.01, 0.25);
  EXPECT_TRUE(sol.trivial());
  EXPECT_EQ(sol.lambda, 0.0);
  EXPECT_EQ(sol.a0, 0.0);
  EXPECT_EQ(sol.f(3.0), 1.0);
  EXPECT_EQ(sol.W_hat(0.0), 0.0);
}

TEST(Neumann, RejectsBadInput) {
  const auto v = RadialPotential::square_well(2, 1);
  EXPECT_THROW(solve_neumann(v, 0.0, 0.25), DomainError);
  EXPECT_THROW(solve_neumann(v, 0.1, 0.25), DomainError);  // a/ell above threshold
  EXPECT_THROW(solve_neumann(v, 0.01, 0.25, {.steps = 2}), ConfigError);
}

TEST(Neumann, GroundStateIsPositive) {
  const auto sol = solve_neumann(RadialPotential::square_well(2, 1), 0.01, 0.25);
  const auto fb = sol.field_bounds();
  EXPECT_GT(fb.f_min, 0.0);
  EXPECT_LE(fb.f_max, 1.0 + 1e-12);
}

TEST(Neumann, SmallRatioAsymptotics) {
  const double ratio = 1e-3, ell = 0.25, a = ratio * ell;
  const auto sol = solve_neumann(RadialPotential::square_well(2, 1), a, ell, {.steps = 1024});
  const double a0 = sol.a0;
  const double lam_pred = 3 * a0 / std::pow(sol.L, 3) * (1 + 1.8 * a0 * ratio);
  EXPECT_LT(rel(sol.lambda, lam_pred), 5 * ratio);
  EXPECT_LT(rel(sol.int_w() / (sol.L * sol.L), 0.4 * kPi * a0), 5 * ratio);
}

TEST(ChiHat, MatchesQuadrature) {
  for (double ell : {0.1, 0.25}) {
    EXPECT_DOUBLE_EQ(chi_hat(ell, 0), 4.0 / 3.0 * kPi * ell * ell * ell);
    for (i64 n : {1, 2, 3, 17, 400}) {
      const double p = 2 * kPi * std::sqrt(double(n));
      EXPECT_NEAR(chi_hat(ell, n), oracle::chi_hat_quadrature(ell, p), 1e-13) << ell << " " << n;
    }
  }
  EXPECT_THROW(chi_hat(0.0, 1), DomainError);
}

TEST(Identity, ResidualSmallAcrossMomenta) {
  const auto sol = solve_neumann(RadialPotential::square_well(2, 1), 0.01, 0.25);
  for (i64 n = 1; n <= 400; n += 21) {
    const auto r = identity_residual(sol, n);
    ASSERT_NE(r.W, 0.0);
    EXPECT_LT(std::abs(r.residual) / std::abs(r.W), 1e-5) << n;
  }
}

TEST(Identity, ResidualShrinksUnderRefinement) {
  const auto v = RadialPotential::square_well(2, 1);
  const auto s1 = solve_neumann(v, 0.01, 0.25, {.steps = 256});
  const auto s2 = solve_neumann(v, 0.01, 0.25, {.steps = 512});
  double m1 = 0, m2 = 0;
  for (i64 n = 1; n <= 400; n += 21) {
    m1 = std::max(m1, std::abs(identity_residual(s1, n).residual / identity_residual(s1, n).W));
    m2 = std::max(m2, std::abs(identity_residual(s2, n).residual / identity_residual(s2, n).W));
  }
  EXPECT_GT(m1 / m2, 4.0);
}

TEST(Bank, EntriesMatchSolution) {
  const auto sol = solve_neumann(RadialPotential::square_well(2, 1), 0.01, 0.25);
  const auto b = CoefficientBank::build(sol, 50, 2);
  for (i64 n : {0, 1, 7, 50}) {
    EXPECT_EQ(b.eta[n], sol.eta(n));
    EXPECT_EQ(b.v_hat[n], sol.v_hat(n));
  }
  EXPECT_GT(b.C_eta, 0.0);
  EXPECT_GT(b.C_W, 0.0);
  const auto b1 = CoefficientBank::build(sol, 50, 1);
  EXPECT_EQ(b1.W, b.W);
}

TEST(FirstOrder, MatchesExpansion) {
  const double ell = 0.25, ratio = 1e-2, a = ratio * ell;
  const auto sol = solve_neumann(RadialPotential::square_well(2, 1), a, ell);
  const auto r = first_order_constant(sol);
  const double pred = 4 * kPi * a * sol.a0 * (1 + 1.5 * sol.a0 * ratio);
  EXPECT_LT(rel(r.value, pred), 20 * ratio * ratio);
  EXPECT_LT(r.remainder, 1e-8 * std::abs(r.value));
}

TEST(FirstOrder, TorusConditionEnforced) {
  const auto sol = solve_neumann(RadialPotential::square_well(2, 1), 0.1, 0.95);
  EXPECT_THROW(first_order_constant(sol), DomainError);
}
