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

// Stochastic-geometry primitives for a two-tier Poisson network: the exclusion
// area A(r, x, theta), the conditional mean Voronoi-cell integrals h_m, h_s and
// h_BH, and the law of the distance to the serving base station.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <utility>
#include <vector>

#include "movnet/error.hpp"
#include "movnet/numerics.hpp"
#include "movnet/scenario.hpp"

namespace movnet {

struct TierDensities {
  double lambda_s = 0.0;
  double lambda_m = 0.0;
  double rho_ms = 1.0;

  static TierDensities from_radio(double lambda_s, double lambda_m, const RadioParams& radio) {
    return {lambda_s, lambda_m, radio.rho_ms()};
  }

  // Density of the SBS-equivalent process seen by a user.
  double effective() const { return lambda_s + lambda_m * rho_ms * rho_ms; }

  void validate() const {
    if (!(lambda_s >= 0.0 && lambda_m >= 0.0) || !std::isfinite(lambda_s) || !std::isfinite(lambda_m))
      throw ValidationError("densities", "tier densities must be finite and nonnegative");
    if (!(lambda_s + lambda_m > 0.0)) throw ValidationError("densities", "at least one tier must be present");
    if (!(rho_ms > 0.0 && rho_ms <= 1.0)) throw ValidationError("rho_ms", "rho_ms must lie in (0, 1]");
  }
};

// Area of the disk centred at polar point (x, theta) with radius x that is not
// covered by the disk centred at (0, -r) with radius r. Both disks pass
// through the origin.
inline double exclusion_area(double r, double x, double theta) {
  if (std::isnan(r) || std::isnan(x) || std::isnan(theta))
    throw NumericsError("exclusion_area: NaN argument");
  constexpr double pi = std::numbers::pi;
  const double full = pi * x * x;
  if (r <= 0.0 || x <= 0.0) return full;
  const double s = std::sin(theta);
  const double d = std::sqrt(std::max(0.0, x * x + r * r + 2.0 * x * r * s));
  // d - x without cancellation.
  const double e = (r * r + 2.0 * x * r * s) / (d + x);
  double overlap = 0.0;
  if (e >= r) {
    overlap = 0.0;
  } else if (e <= -r) {
    overlap = pi * r * r;
  } else if (d + x <= r) {
    overlap = full;
  } else {
    // Two-circle lens. Heron's product k = 16 T^2 for the triangle (d, r, x)
    // gives the half-angles through atan2, which stays accurate near the
    // tangent and containment boundaries where acos loses half the digits.
    const double k = (r - e) * (r + e) * (d + x - r) * (d + x + r);
    const double sqrt_k = std::sqrt(std::max(0.0, k));
    const double angle_r = std::atan2(sqrt_k, 2.0 * r * (r + x * s));
    const double angle_x = std::atan2(sqrt_k, 2.0 * x * (x + r * s));
    overlap = r * r * angle_r + x * x * angle_x - 0.5 * sqrt_k;
    overlap = std::clamp(overlap, 0.0, std::min(full, pi * r * r));
  }
  return std::clamp(full - overlap, std::max(0.0, full - pi * r * r), full);
}

namespace detail {

// int_0^inf int_0^2pi exp(-a A(r, ca x, th) - b A(r, cb x, th)) x dth dx.
// A depends on theta only through sin(theta), so the angular integral is
// taken over [-pi/2, pi/2] and doubled.
inline double conditional_cell_integral(double r, double a, double ca, double b, double cb,
                                        const QuadratureSettings& q) {
  constexpr double pi = std::numbers::pi;
  const double sigma = q.tail_cutoff_sigma;
  // A(r, y, .) >= pi (y^2 - r^2), so either present term bounds the tail.
  double x_max = std::numeric_limits<double>::infinity();
  if (a > 0.0) x_max = std::min(x_max, std::sqrt(r * r + sigma * sigma / (pi * a)) / ca);
  if (b > 0.0) x_max = std::min(x_max, std::sqrt(r * r + sigma * sigma / (pi * b)) / cb);
  if (!std::isfinite(x_max)) throw NumericsError("conditional cell integral needs a positive density");
  const QuadratureSettings inner = q.tightened();
  auto radial = [&](double x) {
    auto angular = [&](double th) {
      double e = 0.0;
      if (a > 0.0) e += a * exclusion_area(r, ca * x, th);
      if (b > 0.0) e += b * exclusion_area(r, cb * x, th);
      return std::exp(-e);
    };
    return 2.0 * x * integrate_1d(angular, -0.5 * pi, 0.5 * pi, inner);
  };
  // At r = 0 the integral is exactly 1 / (a ca^2 + b cb^2) and it grows with
  // r, so this scale turns rel_tol into an absolute bound per sub-range.
  QuadratureSettings outer = q;
  outer.abs_tol = std::max(q.abs_tol, 0.1 * q.rel_tol / (a * ca * ca + b * cb * cb));
  std::array<double, 4> cuts{0.0, std::min(r / ca, x_max), std::min(r / (b > 0.0 ? cb : ca), x_max), x_max};
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += integrate_1d(radial, cuts[i], cuts[i + 1], outer);
  return total;
}

}  // namespace detail

// Mean area of the cell of an MBS serving a user at distance r.
inline double mean_cell_integral_m(double r, const TierDensities& d, const QuadratureSettings& q = {}) {
  d.validate();
  if (!(r >= 0.0)) throw ValidationError("r", "distance must be nonnegative");
  return detail::conditional_cell_integral(r, d.lambda_s, 1.0 / d.rho_ms, d.lambda_m, 1.0, q);
}

// Mean area of the cell of an SBS serving a user at distance r.
inline double mean_cell_integral_s(double r, const TierDensities& d, const QuadratureSettings& q = {}) {
  d.validate();
  if (!(r >= 0.0)) throw ValidationError("r", "distance must be nonnegative");
  if (!(d.lambda_s > 0.0)) throw ValidationError("lambda_s", "h_s needs a positive SBS density");
  return detail::conditional_cell_integral(r, d.lambda_s, 1.0, d.lambda_m, d.rho_ms, q);
}

// Mean area of the SBS-only cell of an SBS backhauling an MBS at distance r.
inline double mean_cell_integral_bh(double r, double lambda_s, const QuadratureSettings& q = {}) {
  if (!(lambda_s > 0.0)) throw ValidationError("lambda_s", "h_BH needs a positive SBS density");
  if (!(r >= 0.0)) throw ValidationError("r", "distance must be nonnegative");
  return detail::conditional_cell_integral(r, lambda_s, 1.0, 0.0, 1.0, q);
}

inline double serving_distance_pdf(double r, const TierDensities& d) {
  if (r < 0.0) return 0.0;
  const double lam = d.effective();
  return 2.0 * std::numbers::pi * r * lam * std::exp(-std::numbers::pi * r * r * lam);
}

inline double serving_distance_cdf(double r, const TierDensities& d) {
  if (r <= 0.0) return 0.0;
  return -std::expm1(-std::numbers::pi * r * r * d.effective());
}

// ---------------------------------------------------------------------------
// Interpolated h tables.
//
// With s = r sqrt(L), L = lambda_s + lambda_m, the products L * h_m and L * h_s
// depend only on (s, lambda_m / L, rho), and lambda_s * h_BH only on
// s' = r sqrt(lambda_s). Tables are built once per (lambda_m / L, rho) on a
// log-spaced s grid and interpolated with a natural cubic spline in
// (log s, log h).

class LogSpline {
 public:
  LogSpline() = default;
  LogSpline(std::vector<double> log_x, std::vector<double> log_y)
      : x_(std::move(log_x)), y_(std::move(log_y)), m_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 3) throw NumericsError("spline needs at least three points");
    // Natural spline second derivatives via the Thomas algorithm.
    std::vector<double> c(n, 0.0), rhs(n, 0.0), diag(n, 1.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      diag[i] = 2.0 * (h0 + h1);
      c[i] = h1;
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    std::vector<double> cp(n, 0.0), dp(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double lower = x_[i] - x_[i - 1];
      const double denom = diag[i] - (i > 1 ? lower * cp[i - 1] : 0.0);
      cp[i] = c[i] / denom;
      dp[i] = (rhs[i] - (i > 1 ? lower * dp[i - 1] : 0.0)) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = dp[i] - cp[i] * m_[i + 1];
      if (i == 1) break;
    }
  }

  double operator()(double lx) const {
    if (lx <= x_.front()) return y_.front();
    if (lx >= x_.back()) {
      const std::size_t n = x_.size();
      const double slope = (y_[n - 1] - y_[n - 2]) / (x_[n - 1] - x_[n - 2]);
      return y_.back() + slope * (lx - x_.back());
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), lx);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (lx - x_[i]) / h;
    const double u = 1.0 - t;
    return u * y_[i] + t * y_[i + 1] + ((u * u * u - u) * m_[i] + (t * t * t - t) * m_[i + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

inline constexpr int kCellTableSize = 64;
inline constexpr double kCellTableMinS = 1e-4;

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return g;
}

template <class F>
LogSpline tabulate(F&& normalized_h, double s_hi) {
  auto lx = log_grid(kCellTableMinS, s_hi, kCellTableSize);
  std::vector<double> ly(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) ly[i] = std::log(normalized_h(std::exp(lx[i])));
  return LogSpline(std::move(lx), std::move(ly));
}

inline QuadratureSettings table_quadrature() {
  QuadratureSettings q;
  q.rel_tol = 1e-9;
  q.tail_cutoff_sigma = 7.0;
  return q;
}

}  // namespace detail

// Normalised tables for one (mobile fraction, rho) pair.
struct NormalizedCellTables {
  LogSpline m;  // log(L h_m) vs log(r sqrt(L))
  LogSpline s;  // log(L h_s) vs log(r sqrt(L))
};

class CellAreaCache {
 public:
  static CellAreaCache& instance() {
    static CellAreaCache cache;
    return cache;
  }

  std::shared_ptr<const NormalizedCellTables> tiers(double mobile_fraction, double rho) {
    // With equal powers both tiers merge into one process of density L.
    if (rho == 1.0) mobile_fraction = 0.0;
    const std::pair<double, double> key{mobile_fraction, rho};
    {
      std::shared_lock lock(mutex_);
      if (auto it = tiers_.find(key); it != tiers_.end()) return it->second;
    }
    auto built = std::make_shared<NormalizedCellTables>(build_tiers(mobile_fraction, rho));
    std::unique_lock lock(mutex_);
    return tiers_.emplace(key, std::move(built)).first->second;
  }

  std::shared_ptr<const LogSpline> backhaul() {
    {
      std::shared_lock lock(mutex_);
      if (backhaul_) return backhaul_;
    }
    const auto q = detail::table_quadrature();
    auto built = std::make_shared<LogSpline>(detail::tabulate(
        [&](double s) { return mean_cell_integral_bh(s, 1.0, q); }, kBackhaulMaxS));
    std::unique_lock lock(mutex_);
    if (!backhaul_) backhaul_ = std::move(built);
    return backhaul_;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return tiers_.size();
  }

  void clear() {
    std::unique_lock lock(mutex_);
    tiers_.clear();
    backhaul_.reset();
  }

  // Upper end of the normalised backhaul table; beyond it the spline is
  // extrapolated linearly in log-log space.
  static constexpr double kBackhaulMaxS = 12.0;

 private:
  NormalizedCellTables build_tiers(double f, double rho) {
    const auto q = detail::table_quadrature();
    const TierDensities unit{1.0 - f, f, rho};
    NormalizedCellTables t;
    if (f == 0.0) {
      // Without MBSs h_s and h_BH are the same integral; share the spline so
      // the two code paths agree to rounding.
      const double s_hi = 8.0 / std::sqrt(std::numbers::pi);
      t.m = detail::tabulate([&](double s) { return mean_cell_integral_m(s, unit, q); }, s_hi);
      t.s = *backhaul();
      return t;
    }
    // Covers both the user-distance kernel exp(-pi (1 - f + rho^2 f) s^2) and
    // the SBS-only backhaul kernel exp(-pi (1 - f) s^2).
    const double s_hi = 8.0 / std::sqrt(std::numbers::pi * std::max(1.0 - f, 1e-4));
    t.m = detail::tabulate([&](double s) { return mean_cell_integral_m(s, unit, q); }, s_hi);
    t.s = detail::tabulate([&](double s) { return mean_cell_integral_s(s, unit, q); }, s_hi);
    return t;
  }

  mutable std::shared_mutex mutex_;
  std::map<std::pair<double, double>, std::shared_ptr<const NormalizedCellTables>> tiers_;
  std::shared_ptr<const LogSpline> backhaul_;
};

// h_m, h_s and h_BH for fixed tier densities, served from the shared cache.
class CellAreaTable {
 public:
  explicit CellAreaTable(const TierDensities& d) : d_(d) {
    d.validate();
    if (!(d.lambda_s > 0.0)) throw ValidationError("lambda_s", "cell tables need a positive SBS density");
    total_ = d.lambda_s + d.lambda_m;
    sqrt_total_ = std::sqrt(total_);
    sqrt_s_ = std::sqrt(d.lambda_s);
    tiers_ = CellAreaCache::instance().tiers(d.lambda_m / total_, d.rho_ms);
    bh_ = CellAreaCache::instance().backhaul();
  }

  double h_m(double r) const { return std::exp(tiers_->m(log_s(r * sqrt_total_))) / total_; }
  double h_s(double r) const { return std::exp(tiers_->s(log_s(r * sqrt_total_))) / total_; }
  double h_bh(double r) const { return std::exp((*bh_)(log_s(r * sqrt_s_))) / d_.lambda_s; }
  const TierDensities& densities() const { return d_; }

 private:
  static double log_s(double s) { return std::log(std::max(s, kCellTableMinS)); }

  TierDensities d_;
  double total_ = 0.0, sqrt_total_ = 0.0, sqrt_s_ = 0.0;
  std::shared_ptr<const NormalizedCellTables> tiers_;
  std::shared_ptr<const LogSpline> bh_;
};

}  // namespace movnet
