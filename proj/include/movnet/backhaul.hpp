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

// Backhaul quality of service: the law of the ideal per-bit delay an SBS
// offers an attached MBS, the demand delay implied by the MBS's cell area,
// and the probability that the former cannot sustain the latter.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "movnet/analytic.hpp"
#include "movnet/error.hpp"
#include "movnet/geometry.hpp"
#include "movnet/numerics.hpp"
#include "movnet/scenario.hpp"

namespace movnet {

struct BackhaulContext {
  SlotState st;
  RadioParams radio;
  DelaySolution delays;

  void validate() const {
    st.validate();
    radio.validate();
    if (!(st.lambda_m > 0.0)) throw ValidationError("lambda_m", "backhaul analysis needs MBSs in the slot");
    if (!(st.phi > 0.0)) throw ValidationError("phi", "phi must be positive when MBSs are present");
    if (!delays.converged) throw NumericsError("backhaul analysis needs a converged delay solution");
  }
};

inline constexpr int kBackhaulGridSize = 256;
inline constexpr double kBackhaulGridMinR = 0.1;

// Normalised Voronoi cell area is modelled as Gamma(7/2, rate 7/2).
inline constexpr double kCellAreaShape = 3.5;

// Scale a of the demand delay tau_d = a / A_normalised.
inline double demand_delay_scale(const SlotState& st, const RadioParams& radio) {
  if (radio.demand_delay_form == DemandDelayForm::per_user) return radio.target_delay_tau0_s / st.lambda_u;
  return radio.target_delay_tau0_s * (radio.rho_ms() * st.lambda_m + st.lambda_s) / st.lambda_u;
}

// Density a^{7/2} (343/15) sqrt(7/(2 pi)) t^{-9/2} exp(-7a/(2t)).
inline double demand_delay_pdf_scaled(double tau, double a) {
  if (!(tau > 0.0)) return 0.0;
  const double log_c = std::log(343.0 / 15.0) + 0.5 * std::log(7.0 / (2.0 * std::numbers::pi));
  return std::exp(log_c + 3.5 * std::log(a) - 4.5 * std::log(tau) - 3.5 * a / tau);
}

// P(tau_d <= t) = P(A >= a / t).
inline double demand_delay_cdf_scaled(double t, double a) {
  if (!(t > 0.0)) return 0.0;
  if (std::isinf(t)) return 1.0;
  return boost::math::gamma_q(kCellAreaShape, kCellAreaShape * a / t);
}

namespace detail {

// P(tau_M > util_s * tau_d) for tau_d with scale a, given the survival
// function of tau_M that equals 1 below g_lo and 0 above g_hi.
template <class Survival>
double violation_integral(Survival&& survival, double util_s, double a, double g_lo, double g_hi,
                          const QuadratureSettings& q) {
  if (!(util_s > 0.0)) return 1.0;
  const double u_lo = g_lo / util_s;
  const double u_hi = g_hi / util_s;
  double v = demand_delay_cdf_scaled(u_lo, a);
  if (u_hi > u_lo) {
    QuadratureSettings qq = q;
    qq.abs_tol = std::max(q.abs_tol, 1e-12);
    v += integrate_1d([&](double u) { return demand_delay_pdf_scaled(u, a) * survival(util_s * u); }, u_lo, u_hi,
                      qq);
  }
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace detail

class BackhaulModel {
 public:
  explicit BackhaulModel(BackhaulContext ctx, const QuadratureSettings& q = {})
      : ctx_(std::move(ctx)), q_(q), table_((ctx_.validate(), TierDensities::from_radio(
                                                                  ctx_.st.lambda_s, ctx_.st.lambda_m, ctx_.radio))) {
    r_trunc_ = q_.tail_cutoff_sigma / std::sqrt(std::numbers::pi * ctx_.st.lambda_s);
    const auto lr = detail::log_grid(kBackhaulGridMinR, r_trunc_, kBackhaulGridSize);
    r_grid_.resize(lr.size());
    g_grid_.resize(lr.size());
    for (std::size_t i = 0; i < lr.size(); ++i) {
      r_grid_[i] = std::exp(lr[i]);
      g_grid_[i] = g(r_grid_[i]);
      if (i > 0 && !(g_grid_[i] > g_grid_[i - 1]))
        throw NumericsError("backhaul delay g(r) is not increasing near r = " + std::to_string(r_grid_[i]) +
                            " m; inversion is undefined");
    }
  }

  const BackhaulContext& context() const { return ctx_; }

  double g(double r) const {
    if (!(r > 0.0)) throw NumericsError("bh_delay_g: distance must be positive");
    const auto& st = ctx_.st;
    const double num = st.lambda_m * table_.h_bh(r) + st.phi * st.lambda_u * table_.h_s(r);
    const double i = mean_interference(r, ctx_.delays.tau_bar_m, ctx_.delays.tau_bar_s, st, ctx_.radio);
    return num / capacity(r, ctx_.radio.power_static_w, i, ctx_.radio);
  }

  double g_min() const { return g_grid_.front(); }
  double g_max() const { return g_grid_.back(); }

  // Distance r with g(r) = tau, for tau inside the tabulated range.
  double inverse_g(double tau) const {
    if (!(tau >= g_grid_.front() && tau <= g_grid_.back()))
      throw RootError("g does not cross tau = " + std::to_string(tau) + " on the scanned range");
    const auto it = std::lower_bound(g_grid_.begin(), g_grid_.end(), tau);
    const std::size_t i = static_cast<std::size_t>(it - g_grid_.begin());
    if (g_grid_[i] == tau) return r_grid_[i];
    return find_root([&](double r) { return g(r) - tau; }, r_grid_[i - 1], r_grid_[i], 1e-12);
  }

  double serving_cdf(double r) const { return -std::expm1(-ctx_.st.lambda_s * std::numbers::pi * r * r); }

  double delay_cdf(double tau) const {
    if (!(tau > 0.0)) throw NumericsError("bh_delay_cdf: tau must be positive");
    if (tau < g_grid_.front()) return 0.0;
    if (tau >= g_grid_.back()) return serving_cdf(r_trunc_);
    return serving_cdf(inverse_g(tau));
  }

  double demand_scale() const { return demand_delay_scale(ctx_.st, ctx_.radio); }

  double violation_probability() const {
    return detail::violation_integral([&](double t) { return 1.0 - delay_cdf(t); }, ctx_.delays.util_s,
                                      demand_scale(), g_grid_.front(), g_grid_.back(), q_);
  }

  const std::vector<double>& r_grid() const { return r_grid_; }
  const std::vector<double>& g_grid() const { return g_grid_; }

 private:
  BackhaulContext ctx_;
  QuadratureSettings q_;
  CellAreaTable table_;
  double r_trunc_ = 0.0;
  std::vector<double> r_grid_, g_grid_;
};

inline double bh_delay_g(double r, const BackhaulModel& m) { return m.g(r); }
inline double bh_delay_cdf(double tau, const BackhaulModel& m) { return m.delay_cdf(tau); }

inline double demand_delay_pdf(double tau, const BackhaulContext& ctx) {
  return demand_delay_pdf_scaled(tau, demand_delay_scale(ctx.st, ctx.radio));
}

inline double violation_probability(const BackhaulContext& ctx, const QuadratureSettings& q = {}) {
  return BackhaulModel(ctx, q).violation_probability();
}

struct VarianceReport {
  double mean_area = 0.0;           // m^2
  double var_area = 0.0;            // m^4
  double var_count_poisson = 0.0;   // lambda_u * mean_area
  double var_count_area = 0.0;      // lambda_u^2 * var_area
  bool premise_holds = false;       // lambda_u < 1
  bool area_dominates = false;
};

inline VarianceReport variance_dominance_check(const BackhaulContext& ctx) {
  const double l = ctx.radio.rho_ms() * ctx.st.lambda_m + ctx.st.lambda_s;
  VarianceReport r;
  r.mean_area = 1.0 / l;
  r.var_area = 2.0 / 7.0 * r.mean_area * r.mean_area;
  r.var_count_poisson = ctx.st.lambda_u * r.mean_area;
  r.var_count_area = ctx.st.lambda_u * ctx.st.lambda_u * r.var_area;
  r.premise_holds = ctx.st.lambda_u < 1.0;
  r.area_dominates = r.var_count_area > r.var_count_poisson;
  return r;
}

}  // namespace movnet
