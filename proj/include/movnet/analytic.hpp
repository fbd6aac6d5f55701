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

// Delay engine: Shannon capacity, mean interference, the coupled fixed point
// for the Palm-expected per-bit delays of both tiers, and utilizations.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "movnet/error.hpp"
#include "movnet/geometry.hpp"
#include "movnet/numerics.hpp"
#include "movnet/scenario.hpp"

namespace movnet {

// Densities and WPS weight of one region in one slot.
struct SlotState {
  double lambda_u = 0.0;
  double lambda_m = 0.0;
  double lambda_s = 0.0;
  double phi = 1.0;

  void validate() const {
    if (!(lambda_u > 0.0) || !std::isfinite(lambda_u))
      throw ValidationError("lambda_u", "lambda_u must be positive");
    if (!(lambda_m >= 0.0) || !std::isfinite(lambda_m))
      throw ValidationError("lambda_m", "lambda_m must be nonnegative");
    if (!(lambda_s >= 0.0) || !std::isfinite(lambda_s))
      throw ValidationError("lambda_s", "lambda_s must be nonnegative");
    if (!(lambda_s > 0.0))
      throw ValidationError("lambda_s", "lambda_s must be positive (SBSs serve users and host MBS backhaul)");
    if (!(phi >= 0.0) || !std::isfinite(phi)) throw ValidationError("phi", "phi must be nonnegative");
  }

  // Fewer users than base stations leaves cells empty, which the delay model
  // does not describe. Advisory only.
  bool sparse_users() const { return lambda_u < lambda_m + lambda_s; }
};

struct DelaySolution {
  double tau_bar_m = 0.0;
  double tau_bar_s = 0.0;
  double util_m = 0.0;
  double util_s = 0.0;
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
  // False when the slot has no MBSs; tau_bar_m is then the delay a user
  // would see from a hypothetical MBS and takes no part in feasibility.
  bool mbs_present = true;
  bool sparse_users = false;

  bool qos_feasible() const { return util_s <= 1.0 && (!mbs_present || util_m <= 1.0); }
};

inline double capacity(double r, double p, double interference, const RadioParams& radio) {
  if (!(r > 0.0)) throw NumericsError("capacity: distance must be positive");
  if (std::isinf(interference)) return 0.0;
  const double sinr = p * std::pow(r, -radio.path_loss_alpha) / (radio.noise_power_w() + interference);
  return radio.channel_bandwidth_hz() * std::log1p(sinr) / std::numbers::ln2;
}

inline double mean_interference(double r, double tau_m, double tau_s, const SlotState& st,
                                const RadioParams& radio) {
  if (!(r > 0.0)) throw NumericsError("mean_interference: distance must be positive");
  const double alpha = radio.path_loss_alpha;
  if (!(alpha > 2.0)) throw ValidationError("radio.path_loss_alpha", "path_loss_alpha must exceed 2");
  const double load = radio.power_mobile_w * tau_m * st.lambda_m + radio.power_static_w * tau_s * st.lambda_s;
  if (load == 0.0) return 0.0;
  return 2.0 * std::numbers::pi * std::pow(r, 2.0 - alpha) /
         (radio.reuse_factor_k * (alpha - 2.0) * radio.target_delay_tau0_s) * load;
}

// x / (1 - e^-x): mean of a Poisson(x) count conditioned to be positive.
inline double truncated_poisson_mean(double x) {
  if (!(x >= 0.0)) throw NumericsError("truncated_poisson_mean: negative argument");
  if (x < 1e-8) return 1.0 + 0.5 * x;
  return x / -std::expm1(-x);
}

inline double utilization(double tau_bar, const RadioParams& radio) {
  if (!(tau_bar > 0.0)) throw NumericsError("utilization: tau_bar must be positive");
  return tau_bar / radio.target_delay_tau0_s;
}

// Utilization beyond which the delay iteration is declared divergent.
inline constexpr double kDelayDivergenceUtilization = 1e6;

namespace detail {

// Quadrature for the outer r-integrals; tighter than the fixed-point
// tolerance so that the iteration sees a smooth map.
inline QuadratureSettings delay_quadrature(const FixedPointSettings& fp, const QuadratureSettings& q) {
  QuadratureSettings out = q;
  out.rel_tol = std::min(q.rel_tol, 0.01 * fp.rel_tol);
  out.rel_tol = std::max(out.rel_tol, 1e-14);
  return out;
}

// Density of the serving distance: 2 pi L r exp(-pi L r^2).
inline double serving_kernel(double r, double eff) {
  return 2.0 * std::numbers::pi * eff * r * std::exp(-std::numbers::pi * eff * r * r);
}

}  // namespace detail

// Right-hand side of the coupled delay equations for fixed table and slot.
class DelayMap {
 public:
  DelayMap(const SlotState& st, const RadioParams& radio, const QuadratureSettings& q)
      : st_(st), radio_(radio), q_(q), table_(TierDensities::from_radio(st.lambda_s, st.lambda_m, radio)) {
    eff_ = table_.densities().effective();
    r_max_ = q.tail_cutoff_sigma / std::sqrt(std::numbers::pi * eff_);
  }

  double tau_m(double tau_m, double tau_s) const {
    auto f = [&](double r) {
      if (r <= 0.0) return 0.0;
      const double i = mean_interference(r, tau_m, tau_s, st_, radio_);
      const double c = capacity(r, radio_.power_mobile_w, i, radio_);
      return truncated_poisson_mean(st_.lambda_u * table_.h_m(r)) * detail::serving_kernel(r, eff_) / c;
    };
    return integrate_1d(f, 0.0, r_max_, q_);
  }

  double tau_s(double tau_m, double tau_s) const {
    const double bh = st_.lambda_m > 0.0 ? st_.lambda_m / st_.phi : 0.0;
    auto f = [&](double r) {
      if (r <= 0.0) return 0.0;
      const double i = mean_interference(r, tau_m, tau_s, st_, radio_);
      const double c = capacity(r, radio_.power_static_w, i, radio_);
      double load = truncated_poisson_mean(st_.lambda_u * table_.h_s(r));
      if (bh > 0.0) load += bh * table_.h_bh(r);
      return load * detail::serving_kernel(r, eff_) / c;
    };
    return integrate_1d(f, 0.0, r_max_, q_);
  }

  // Initial guess: mean load over zero-interference capacity at the mean
  // serving distance.
  std::vector<double> initial_guess() const {
    const double r = 0.5 / std::sqrt(eff_);
    const double bh = st_.lambda_m > 0.0 ? st_.lambda_m / st_.phi * table_.h_bh(r) : 0.0;
    return {truncated_poisson_mean(st_.lambda_u * table_.h_m(r)) / capacity(r, radio_.power_mobile_w, 0.0, radio_),
            (truncated_poisson_mean(st_.lambda_u * table_.h_s(r)) + bh) /
                capacity(r, radio_.power_static_w, 0.0, radio_)};
  }

  const CellAreaTable& table() const { return table_; }
  double r_max() const { return r_max_; }

 private:
  SlotState st_;
  RadioParams radio_;
  QuadratureSettings q_;
  CellAreaTable table_;
  double eff_ = 0.0;
  double r_max_ = 0.0;
};

inline DelaySolution solve_delays(const SlotState& st, const RadioParams& radio, const FixedPointSettings& fp = {},
                                  const QuadratureSettings& q = {}) {
  st.validate();
  radio.validate();
  fp.validate();
  q.validate();
  if (st.lambda_m > 0.0 && !(st.phi > 0.0))
    throw ValidationError("phi", "phi must be positive when MBSs are present");
  const DelayMap map(st, radio, detail::delay_quadrature(fp, q));
  const auto x0 = map.initial_guess();
  // Under overload the interference feedback has no finite fixed point and
  // the iterates grow geometrically.
  FixedPointSettings fps = fp;
  fps.divergence_bound = std::min(fp.divergence_bound, kDelayDivergenceUtilization * radio.target_delay_tau0_s);

  DelaySolution out;
  out.mbs_present = st.lambda_m > 0.0;
  out.sparse_users = st.sparse_users();
  FixedPointResult fr;
  if (out.mbs_present) {
    fr = solve_fixed_point(
        [&](std::span<const double> x) { return std::vector<double>{map.tau_m(x[0], x[1]), map.tau_s(x[0], x[1])}; },
        x0, fps);
    out.tau_bar_m = fr.x[0];
    out.tau_bar_s = fr.x[1];
  } else {
    // Interference depends on tau_m only through lambda_m, so the SBS
    // equation closes on its own.
    fr = solve_fixed_point([&](std::span<const double> x) { return std::vector<double>{map.tau_s(0.0, x[0])}; },
                           {x0[1]}, fps);
    out.tau_bar_s = fr.x[0];
    out.tau_bar_m = map.tau_m(0.0, out.tau_bar_s);
  }
  out.converged = fr.converged();
  out.residual = fr.residual;
  out.iterations = fr.iterations;
  out.residual_history = std::move(fr.residual_history);
  if (!(out.tau_bar_m > 0.0 && out.tau_bar_s > 0.0))
    throw NumericsError("delay fixed point left the positive orthant");
  out.util_m = utilization(out.tau_bar_m, radio);
  out.util_s = utilization(out.tau_bar_s, radio);
  return out;
}

// Per-bit delay of an SBS-only network, solved without the two-tier tables.
inline DelaySolution solve_single_tier(double lambda_u, double lambda_s, const RadioParams& radio,
                                       const FixedPointSettings& fp = {}, const QuadratureSettings& q = {}) {
  const SlotState st{lambda_u, 0.0, lambda_s, 1.0};
  st.validate();
  radio.validate();
  const auto bh = CellAreaCache::instance().backhaul();
  const double sqrt_l = std::sqrt(lambda_s);
  auto h = [&](double r) { return std::exp((*bh)(std::log(std::max(r * sqrt_l, kCellTableMinS)))) / lambda_s; };
  const QuadratureSettings qq = detail::delay_quadrature(fp, q);
  const double r_max = qq.tail_cutoff_sigma / std::sqrt(std::numbers::pi * lambda_s);
  const double p = radio.power_static_w;
  const double c_int = 2.0 * std::numbers::pi /
                       (radio.reuse_factor_k * (radio.path_loss_alpha - 2.0) * radio.target_delay_tau0_s) * p *
                       lambda_s;
  auto rhs = [&](double tau) {
    auto f = [&](double r) {
      if (r <= 0.0) return 0.0;
      const double i = c_int * tau * std::pow(r, 2.0 - radio.path_loss_alpha);
      return truncated_poisson_mean(lambda_u * h(r)) * detail::serving_kernel(r, lambda_s) / capacity(r, p, i, radio);
    };
    return integrate_1d(f, 0.0, r_max, qq);
  };
  const double r0 = 0.5 / sqrt_l;
  const double tau0 = truncated_poisson_mean(lambda_u * h(r0)) / capacity(r0, p, 0.0, radio);
  FixedPointSettings fps = fp;
  fps.divergence_bound = std::min(fp.divergence_bound, kDelayDivergenceUtilization * radio.target_delay_tau0_s);
  auto fr = solve_fixed_point([&](std::span<const double> x) { return std::vector<double>{rhs(x[0])}; }, {tau0}, fps);
  DelaySolution out;
  out.tau_bar_s = out.tau_bar_m = fr.x[0];
  out.mbs_present = false;
  out.sparse_users = st.sparse_users();
  out.converged = fr.converged();
  out.residual = fr.residual;
  out.iterations = fr.iterations;
  out.residual_history = std::move(fr.residual_history);
  out.util_s = out.util_m = utilization(fr.x[0], radio);
  return out;
}

}  // namespace movnet
