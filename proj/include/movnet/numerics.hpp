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

#pragma once

// Numerical kernels shared by the analytic modules: adaptive Gauss-Kronrod
// quadrature on finite and semi-infinite ranges, nested polar quadrature,
// bracketed root finding and damped fixed-point iteration.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "movnet/error.hpp"

namespace movnet {

struct QuadratureSettings {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  int max_subdivisions = 4000;
  // Semi-infinite integrals over a PPP kernel exp(-c*pi*x^2) are truncated at
  // x = tail_cutoff_sigma / sqrt(pi*c).
  double tail_cutoff_sigma = 6.0;

  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
      throw ValidationError("quadrature.rel_tol", "quadrature rel_tol must lie in (0, 1)");
    if (!(abs_tol > 0.0 && abs_tol < 1.0))
      throw ValidationError("quadrature.abs_tol", "quadrature abs_tol must lie in (0, 1)");
    if (max_subdivisions < 1)
      throw ValidationError("quadrature.max_subdivisions", "max_subdivisions must be positive");
    if (!(tail_cutoff_sigma >= 3.0))
      throw ValidationError("quadrature.tail_cutoff_sigma", "tail_cutoff_sigma must be at least 3");
  }

  // Settings for an inner integral whose result feeds an outer quadrature.
  QuadratureSettings tightened(double factor = 0.1) const {
    QuadratureSettings s = *this;
    s.rel_tol = std::max(rel_tol * factor, 1e-15);
    return s;
  }
};

struct FixedPointSettings {
  double rel_tol = 1e-10;
  int max_iters = 500;
  double damping = 1.0;
  // Iterates beyond this magnitude are reported as divergence.
  double divergence_bound = std::numeric_limits<double>::infinity();

  void validate() const {
    if (!(rel_tol > 0.0))
      throw ValidationError("fixed_point.rel_tol", "fixed-point rel_tol must be positive");
    if (max_iters < 1)
      throw ValidationError("fixed_point.max_iters", "fixed-point max_iters must be positive");
    if (!(damping > 0.0 && damping <= 1.0))
      throw ValidationError("fixed_point.damping", "damping must lie in (0, 1]");
    if (!(divergence_bound > 0.0))
      throw ValidationError("fixed_point.divergence_bound", "divergence_bound must be positive");
  }
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980523301, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
};

inline void check_finite(double fx, double x) {
  if (!std::isfinite(fx))
    throw QuadratureError("integrand returned a non-finite value at x = " + std::to_string(x));
}

template <class F>
Segment gauss_kronrod_21(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double f_center = f(center);
  check_finite(f_center, center);
  double kronrod = f_center * kKronrodWeights[10];
  double gauss = 0.0;
  std::array<double, 10> f_lo{};
  std::array<double, 10> f_hi{};
  for (std::size_t i = 0; i < 10; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double a = f(center - dx);
    const double b = f(center + dx);
    check_finite(a, center - dx);
    check_finite(b, center + dx);
    f_lo[i] = a;
    f_hi[i] = b;
    kronrod += kKronrodWeights[i] * (a + b);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (a + b);
  }
  // QUADPACK error heuristic.
  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[10] * std::abs(f_center - mean);
  for (std::size_t i = 0; i < 10; ++i)
    asc += kKronrodWeights[i] * (std::abs(f_lo[i] - mean) + std::abs(f_hi[i] - mean));
  asc *= std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  return {lo, hi, kronrod * half, err};
}

template <class F>
double adaptive_gk(F& f, double lo, double hi, const QuadratureSettings& s) {
  if (lo == hi) return 0.0;
  std::vector<Segment> heap;
  heap.reserve(64);
  const auto by_error = [](const Segment& a, const Segment& b) { return a.error < b.error; };
  heap.push_back(gauss_kronrod_21(f, lo, hi));
  double total = heap.front().value;
  double total_err = heap.front().error;
  double frozen_err = 0.0;  // segments too narrow to split further
  double frozen_value = 0.0;
  int subdivisions = 0;
  while (total_err + frozen_err > std::max(s.abs_tol, s.rel_tol * std::abs(total))) {
    if (heap.empty()) break;
    if (subdivisions >= s.max_subdivisions)
      throw QuadratureError("quadrature did not converge after " + std::to_string(subdivisions) +
                            " subdivisions (estimated error " + std::to_string(total_err) + ")");
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi) ||
        std::abs(worst.hi - worst.lo) < 64.0 * std::numeric_limits<double>::epsilon() *
                                            std::max(std::abs(worst.lo), std::abs(worst.hi))) {
      frozen_err += worst.error;
      frozen_value += worst.value;
      total_err -= worst.error;
      continue;
    }
    const Segment left = gauss_kronrod_21(f, worst.lo, mid);
    const Segment right = gauss_kronrod_21(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), by_error);
    ++subdivisions;
  }
  // Re-sum to shed the drift of the running update.
  double sum = frozen_value;
  for (const auto& seg : heap) sum += seg.value;
  return sum;
}

}  // namespace detail

// Integrates f over [lo, hi]. `hi` may be +infinity, in which case the range
// is mapped onto [0, 1) with x = lo + t / (1 - t). Integrable endpoint
// singularities are fine; f is never evaluated at an endpoint.
template <class F>
double integrate_1d(F&& f, double lo, double hi, const QuadratureSettings& s = {}) {
  if (std::isnan(lo) || std::isnan(hi)) throw QuadratureError("NaN integration limit");
  if (hi < lo) return -integrate_1d(f, hi, lo, s);
  if (std::isinf(lo)) throw QuadratureError("lower limit must be finite");
  if (std::isinf(hi)) {
    auto mapped = [&](double t) {
      const double one_minus = 1.0 - t;
      const double x = lo + t / one_minus;
      const double fx = f(x);
      if (fx == 0.0) return 0.0;
      return fx / (one_minus * one_minus);
    };
    return detail::adaptive_gk(mapped, 0.0, 1.0, s);
  }
  return detail::adaptive_gk(f, lo, hi, s);
}

// Integrates f(x, theta) * x over the disk of radius x_max in polar
// coordinates: int_0^x_max int_0^2pi f(x, theta) x dtheta dx.
template <class F>
double integrate_polar(F&& f, double x_max, const QuadratureSettings& s = {}) {
  if (!(x_max >= 0.0)) throw QuadratureError("polar radius must be nonnegative");
  const QuadratureSettings inner = s.tightened();
  auto radial = [&](double x) {
    auto angular = [&](double theta) { return f(x, theta); };
    return x * integrate_1d(angular, 0.0, 2.0 * std::numbers::pi, inner);
  };
  return integrate_1d(radial, 0.0, x_max, s);
}

// Polar integral over the whole plane for an integrand dominated by the
// kernel exp(-c*pi*x^2); truncated at tail_cutoff_sigma / sqrt(pi*c).
template <class F>
double integrate_2d_polar(F&& f, double decay_c, const QuadratureSettings& s = {}) {
  if (!(decay_c > 0.0)) throw QuadratureError("decay constant must be positive");
  const double x_max = s.tail_cutoff_sigma / std::sqrt(std::numbers::pi * decay_c);
  return integrate_polar(std::forward<F>(f), x_max, s);
}

// Bracketed root of a continuous function (TOMS 748). Terminates when the
// bracket width falls below rel_tol * |x| or f vanishes exactly.
template <class F>
double find_root(F&& f, double lo, double hi, double rel_tol = 1e-12, std::uintmax_t max_iters = 200) {
  if (!(lo <= hi)) std::swap(lo, hi);
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (std::isnan(f_lo) || std::isnan(f_hi)) throw RootError("function is NaN at the bracket ends");
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0))
    throw RootError("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  auto tolerance = [rel_tol](double a, double b) {
    return std::abs(b - a) <= rel_tol * std::min(std::abs(a), std::abs(b)) || a == b;
  };
  std::uintmax_t iters = max_iters;
  auto wrapped = [&](double x) { return f(x); };
  const auto [a, b] =
      boost::math::tools::toms748_solve(wrapped, lo, hi, f_lo, f_hi, tolerance, iters);
  if (iters >= max_iters && !tolerance(a, b))
    throw RootError("root finding exceeded " + std::to_string(max_iters) + " iterations");
  return 0.5 * (a + b);
}

enum class FixedPointStatus { converged, max_iters, diverged };

struct FixedPointResult {
  std::vector<double> x;
  FixedPointStatus status = FixedPointStatus::max_iters;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double damping_used = 1.0;
  std::vector<double> residual_history;

  bool converged() const noexcept { return status == FixedPointStatus::converged; }
};

// Componentwise relative residual max_i |y_i - x_i| / |x_i|.
inline double relative_residual(std::span<const double> x, std::span<const double> y) {
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double scale = std::abs(x[i]) > 0.0 ? std::abs(x[i]) : 1.0;
    r = std::max(r, std::abs(y[i] - x[i]) / scale);
  }
  return r;
}

// Damped iteration x <- (1 - w) x + w map(x). A residual that grows tenfold
// above its running minimum is treated as divergence; with damping 1 the
// iteration restarts once from the best iterate with damping 0.5.
template <class Map>
FixedPointResult solve_fixed_point(Map&& map, std::vector<double> x0, const FixedPointSettings& s) {
  s.validate();
  FixedPointResult out;
  double damping = s.damping;
  std::vector<double> x = std::move(x0);
  std::vector<double> best_x = x;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < s.max_iters; ++iter) {
    if (std::any_of(x.begin(), x.end(), [&](double v) { return std::abs(v) > s.divergence_bound; })) {
      out.x = std::move(best_x);
      out.status = FixedPointStatus::diverged;
      out.residual = out.residual_history.empty() ? out.residual : out.residual_history.back();
      out.damping_used = damping;
      return out;
    }
    std::vector<double> y = map(std::span<const double>(x));
    if (y.size() != x.size()) throw NumericsError("fixed-point map changed the dimension");
    for (double v : y)
      if (!std::isfinite(v)) throw NumericsError("fixed-point map produced a non-finite value");
    const double residual = relative_residual(x, y);
    out.residual_history.push_back(residual);
    out.iterations = iter + 1;
    if (residual < best_residual) {
      best_residual = residual;
      best_x = x;
    }
    if (residual <= s.rel_tol) {
      out.x = std::move(x);
      out.status = FixedPointStatus::converged;
      out.residual = residual;
      out.damping_used = damping;
      return out;
    }
    if (residual > 10.0 * best_residual) {
      if (damping > 0.5) {
        damping = 0.5;
        x = best_x;
        best_residual = std::numeric_limits<double>::infinity();
        continue;
      }
      out.x = std::move(best_x);
      out.status = FixedPointStatus::diverged;
      out.residual = residual;
      out.damping_used = damping;
      return out;
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - damping) * x[i] + damping * y[i];
  }
  out.x = std::move(x);
  out.status = FixedPointStatus::max_iters;
  out.residual = out.residual_history.empty() ? out.residual : out.residual_history.back();
  out.damping_used = damping;
  return out;
}

}  // namespace movnet
