// Copyright 2026 The movnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "movnet/numerics.hpp"

namespace movnet {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Integrate1d, RayleighDensityNormalizes) {
  const double lambda = 1e-4;
  const double v =
      integrate_1d([&](double r) { return 2.0 * kPi * lambda * r * std::exp(-kPi * lambda * r * r); }, 0.0,
                   std::numeric_limits<double>::infinity());
  EXPECT_NEAR(v, 1.0, 1e-8);
}

TEST(Integrate1d, Linear) { EXPECT_NEAR(integrate_1d([](double x) { return x; }, 0.0, 1.0), 0.5, 1e-14); }

TEST(Integrate1d, GammaTypeAreaDensityNormalizes) {
  // f_A(y) = (343/15) sqrt(7/(2 pi)) y^(5/2) exp(-7y/2).
  const double c = 343.0 / 15.0 * std::sqrt(7.0 / (2.0 * kPi));
  const double v = integrate_1d([&](double y) { return c * std::pow(y, 2.5) * std::exp(-3.5 * y); }, 0.0,
                                std::numeric_limits<double>::infinity());
  EXPECT_NEAR(v, 1.0, 1e-6);
}

TEST(Integrate1d, TestBattery) {
  const double inf = std::numeric_limits<double>::infinity();
  QuadratureSettings q;
  q.rel_tol = 1e-10;
  struct Case {
    std::function<double(double)> f;
    double lo, hi, exact;
  };
  const std::vector<Case> cases{
      {[](double x) { return std::exp(-x * x); }, 0.0, inf, 0.5 * std::sqrt(kPi)},
      {[](double x) { return std::pow(x, -3.0); }, 1.0, inf, 0.5},
      {[](double x) { return 1.0 / (1.0 + x * x); }, 0.0, inf, 0.5 * kPi},
      {[](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 2.0},
      {[](double x) { return std::log(x); }, 0.0, 1.0, -1.0},
      // Circle-segment integrand: lens of two unit disks at distance 1.
      {[](double x) { return 2.0 * std::sqrt(std::max(0.0, 1.0 - x * x)); }, 0.5, 1.0,
       (2.0 * kPi / 3.0 - std::sqrt(3.0) / 2.0) / 2.0},
  };
  for (const auto& c : cases) {
    const double v = integrate_1d(c.f, c.lo, c.hi, q);
    EXPECT_NEAR(v, c.exact, std::max(1e-8 * std::abs(c.exact), 1e-12)) << c.lo << " " << c.hi;
  }
}

TEST(Integrate1d, ReversedLimitsFlipSign) {
  EXPECT_NEAR(integrate_1d([](double x) { return x * x; }, 2.0, 0.0), -8.0 / 3.0, 1e-12);
}

TEST(Integrate1d, NanIntegrandRejected) {
  EXPECT_THROW((void)integrate_1d([](double) { return std::nan(""); }, 0.0, 1.0), QuadratureError);
}

TEST(Integrate1d, NanLimitRejected) {
  EXPECT_THROW((void)integrate_1d([](double x) { return x; }, std::nan(""), 1.0), QuadratureError);
}

TEST(Integrate1d, SubdivisionBudgetExhausted) {
  QuadratureSettings q;
  q.max_subdivisions = 2;
  q.rel_tol = 1e-14;
  EXPECT_THROW((void)integrate_1d([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, q), QuadratureError);
}

TEST(Integrate2dPolar, GaussianKernel) {
  const double lambda = 1e-4;
  const double v = integrate_2d_polar([&](double x, double) { return std::exp(-lambda * kPi * x * x); }, lambda);
  EXPECT_NEAR(v, 1.0 / lambda, 1.0);
}

TEST(Integrate2dPolar, Zero) {
  EXPECT_EQ(integrate_2d_polar([](double, double) { return 0.0; }, 1e-4), 0.0);
}

TEST(Integrate2dPolar, AngularDependence) {
  // int over the unit disk of (x cos th)^2 = pi / 4.
  const double v = integrate_polar([](double x, double th) { return std::pow(x * std::cos(th), 2); }, 1.0);
  EXPECT_NEAR(v, kPi / 4.0, 1e-10);
}

TEST(Integrate2dPolar, RejectsBadDecay) {
  EXPECT_THROW((void)integrate_2d_polar([](double, double) { return 1.0; }, 0.0), QuadratureError);
}

TEST(FindRoot, Linear) { EXPECT_NEAR(find_root([](double x) { return x - 2.0; }, 0.0, 5.0), 2.0, 1e-12); }

TEST(FindRoot, Sqrt2) {
  EXPECT_NEAR(find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-12), std::sqrt(2.0), 1e-9);
}

TEST(FindRoot, BracketWidthHonorsTolerance) {
  const double x = find_root([](double v) { return std::exp(v) - 3.0; }, 0.0, 5.0, 1e-6);
  EXPECT_NEAR(x, std::log(3.0), 1e-6 * std::log(3.0));
}

TEST(FindRoot, NoSignChange) {
  EXPECT_THROW((void)find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0), RootError);
}

std::vector<double> affine(std::span<const double> x) { return {x[0] / 2.0 + 1.0}; }

TEST(FixedPoint, AffineContraction) {
  const auto r = solve_fixed_point(affine, {0.0}, FixedPointSettings{});
  ASSERT_TRUE(r.converged());
  EXPECT_NEAR(r.x[0], 2.0, 1e-9);
}

TEST(FixedPoint, IdentityConvergesImmediately) {
  const auto r = solve_fixed_point([](std::span<const double> x) { return std::vector<double>(x.begin(), x.end()); },
                                   {5.0}, FixedPointSettings{});
  ASSERT_TRUE(r.converged());
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.x[0], 5.0);
}

TEST(FixedPoint, CosineFixedPoint) {
  FixedPointSettings s;
  s.rel_tol = 1e-13;
  const auto r =
      solve_fixed_point([](std::span<const double> x) { return std::vector<double>{std::cos(x[0])}; }, {1.0}, s);
  ASSERT_TRUE(r.converged());
  EXPECT_NEAR(r.x[0], 0.7390851332151607, 1e-12);
}

TEST(FixedPoint, ResidualsDecayMonotonicallyOnContractions) {
  // Coupled 2-d contraction with positive fixed point.
  auto map = [](std::span<const double> x) {
    return std::vector<double>{0.5 + 0.3 * x[0] + 0.2 * x[1], 1.0 + 0.1 * x[0] + 0.4 * std::sqrt(x[1])};
  };
  const auto r = solve_fixed_point(map, {3.0, 0.2}, FixedPointSettings{});
  ASSERT_TRUE(r.converged());
  ASSERT_GT(r.residual_history.size(), 6u);
  for (std::size_t i = 6; i < r.residual_history.size(); ++i)
    EXPECT_LE(r.residual_history[i], r.residual_history[i - 1]) << i;
  const auto y = map(r.x);
  EXPECT_LE(relative_residual(r.x, y), 1e-10);
}

TEST(FixedPoint, DivergenceDetected) {
  const auto r = solve_fixed_point(
      [](std::span<const double> x) { return std::vector<double>{x[0] * x[0] + 1.0}; }, {2.0}, FixedPointSettings{});
  EXPECT_EQ(r.status, FixedPointStatus::diverged);
  EXPECT_FALSE(r.converged());
  EXPECT_EQ(r.damping_used, 0.5);
}

TEST(FixedPoint, DivergenceBoundStopsRunaway) {
  FixedPointSettings s;
  s.divergence_bound = 100.0;
  // Slowly growing iterates never trip the tenfold residual rule.
  const auto r = solve_fixed_point([](std::span<const double> x) { return std::vector<double>{x[0] + 1.0}; },
                                   {1.0}, s);
  EXPECT_EQ(r.status, FixedPointStatus::diverged);
  EXPECT_LE(r.iterations, 101);
}

TEST(FixedPoint, MaxItersReported) {
  FixedPointSettings s;
  s.max_iters = 3;
  const auto r = solve_fixed_point(affine, {0.0}, s);
  EXPECT_EQ(r.status, FixedPointStatus::max_iters);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_GT(r.residual, s.rel_tol);
}

TEST(FixedPoint, DampedIteration) {
  FixedPointSettings s;
  s.damping = 0.3;
  const auto r = solve_fixed_point(affine, {0.0}, s);
  ASSERT_TRUE(r.converged());
  EXPECT_NEAR(r.x[0], 2.0, 1e-9);
  EXPECT_EQ(r.damping_used, 0.3);
}

TEST(Settings, Validation) {
  QuadratureSettings q;
  q.rel_tol = 0.0;
  EXPECT_THROW(q.validate(), ValidationError);
  q = {};
  q.tail_cutoff_sigma = 2.0;
  EXPECT_THROW(q.validate(), ValidationError);
  FixedPointSettings f;
  f.damping = 0.0;
  EXPECT_THROW(f.validate(), ValidationError);
  f = {};
  f.damping = 1.5;
  EXPECT_THROW(f.validate(), ValidationError);
}

TEST(RelativeResidual, Componentwise) {
  const std::vector<double> x{1.0, 0.0, -2.0};
  const std::vector<double> y{1.1, 0.5, -2.0};
  EXPECT_NEAR(relative_residual(x, y), 0.5, 1e-15);
}

}  // namespace
}  // namespace movnet
