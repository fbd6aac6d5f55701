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

// Input data types for a deployment study and their JSON representation.
// All quantities are SI: metres, watts, seconds per bit, densities per m^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "movnet/error.hpp"

namespace movnet {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Thermal noise at 290 K, -174 dBm/Hz.
inline const double kThermalNoisePsd = std::pow(10.0, -174.0 / 10.0) * 1e-3;

// Scale of the MBS demand delay tau_d = a / A_normalised. `cell_area` uses
// a = tau0 (rho lambda_m + lambda_s) / lambda_u; `per_user` uses
// a = tau0 / lambda_u.
enum class DemandDelayForm { cell_area, per_user };

struct RadioParams {
  double bandwidth_hz = 10e6;
  int reuse_factor_k = 3;
  double path_loss_alpha = 3.0;
  double noise_psd_w_per_hz = kThermalNoisePsd;
  double power_static_w = 10.0;
  double power_mobile_w = 10.0;
  double target_delay_tau0_s = 1e-3;
  double violation_target_delta = 0.05;
  DemandDelayForm demand_delay_form = DemandDelayForm::cell_area;

  // Per-channel bandwidth B/k.
  double channel_bandwidth_hz() const { return bandwidth_hz / reuse_factor_k; }
  double noise_power_w() const { return noise_psd_w_per_hz * channel_bandwidth_hz(); }
  // Distance ratio at which an MBS matches the received power of an SBS.
  double rho_ms() const { return std::pow(power_mobile_w / power_static_w, 1.0 / path_loss_alpha); }

  void validate() const {
    if (!(bandwidth_hz > 0.0 && std::isfinite(bandwidth_hz)))
      throw ValidationError("radio.bandwidth_hz", "bandwidth_hz must be positive");
    if (reuse_factor_k < 1)
      throw ValidationError("radio.reuse_factor_k", "reuse_factor_k must be a positive integer");
    if (!(path_loss_alpha > 2.0) || !std::isfinite(path_loss_alpha))
      throw ValidationError("radio.path_loss_alpha", "path_loss_alpha must exceed 2");
    if (!(noise_psd_w_per_hz >= 0.0 && std::isfinite(noise_psd_w_per_hz)))
      throw ValidationError("radio.noise_psd_w_per_hz", "noise_psd_w_per_hz must be nonnegative");
    if (!(power_static_w > 0.0 && std::isfinite(power_static_w)))
      throw ValidationError("radio.power_static_w", "power_static_w must be positive");
    if (!(power_mobile_w > 0.0 && std::isfinite(power_mobile_w)))
      throw ValidationError("radio.power_mobile_w", "power_mobile_w must be positive");
    if (power_mobile_w > power_static_w)
      throw ValidationError("radio.power_mobile_w", "power_mobile_w must not exceed power_static_w");
    if (!(target_delay_tau0_s > 0.0 && std::isfinite(target_delay_tau0_s)))
      throw ValidationError("radio.target_delay_tau0_s", "target_delay_tau0_s must be positive");
    if (!(violation_target_delta >= 0.0 && violation_target_delta <= 1.0))
      throw ValidationError("radio.violation_target_delta", "violation_target_delta must lie in [0, 1]");
  }

  bool operator==(const RadioParams&) const = default;
};

struct Region {
  std::string name;
  double area_m2 = 0.0;
  std::vector<double> user_density_per_slot;

  bool operator==(const Region&) const = default;
};

struct Scenario {
  std::vector<Region> regions;
  int num_slots_J = 1;
  double mbs_relative_cost_mu = 1.0;
  RadioParams radio;

  std::size_t num_regions() const { return regions.size(); }
  double total_area() const {
    double a = 0.0;
    for (const auto& r : regions) a += r.area_m2;
    return a;
  }

  void validate() const {
    radio.validate();
    if (num_slots_J < 1) throw ValidationError("num_slots", "num_slots must be a positive integer");
    if (!(mbs_relative_cost_mu >= 0.0 && std::isfinite(mbs_relative_cost_mu)))
      throw ValidationError("mbs_relative_cost_mu", "mbs_relative_cost_mu must be nonnegative");
    if (regions.empty()) throw ValidationError("regions", "at least one region is required");
    for (std::size_t z = 0; z < regions.size(); ++z) {
      const auto& r = regions[z];
      const std::string path = "regions." + std::to_string(z);
      if (!(r.area_m2 > 0.0 && std::isfinite(r.area_m2)))
        throw ValidationError(path + ".area_m2", "area_m2 must be positive");
      if (r.user_density_per_slot.size() != static_cast<std::size_t>(num_slots_J))
        throw ValidationError(path + ".user_density_per_slot",
                              "user_density_per_slot must have num_slots entries");
      for (std::size_t j = 0; j < r.user_density_per_slot.size(); ++j) {
        const double d = r.user_density_per_slot[j];
        if (!(d > 0.0 && std::isfinite(d)))
          throw ValidationError(path + ".user_density_per_slot." + std::to_string(j),
                                "user densities must be positive");
      }
    }
  }

  bool operator==(const Scenario&) const = default;
};

// Decision variables of the deployment problem, indexed [region][slot].
struct NetworkConfiguration {
  std::vector<double> sbs_density;
  std::vector<std::vector<double>> mbs_density;
  std::vector<std::vector<double>> wps_weight_phi;

  static NetworkConfiguration zeros(std::size_t regions, std::size_t slots) {
    NetworkConfiguration c;
    c.sbs_density.assign(regions, 0.0);
    c.mbs_density.assign(regions, std::vector<double>(slots, 0.0));
    c.wps_weight_phi.assign(regions, std::vector<double>(slots, 1.0));
    return c;
  }

  bool operator==(const NetworkConfiguration&) const = default;
};

inline constexpr double kConservationRelTol = 1e-6;

// Per-slot MBS counts sum_z mbs_density[z][j] * E_z.
inline std::vector<double> mbs_slot_totals(const NetworkConfiguration& cfg, const Scenario& s) {
  std::vector<double> totals(static_cast<std::size_t>(s.num_slots_J), 0.0);
  for (std::size_t z = 0; z < s.regions.size(); ++z)
    for (std::size_t j = 0; j < totals.size(); ++j)
      totals[j] += cfg.mbs_density[z][j] * s.regions[z].area_m2;
  return totals;
}

// Largest relative deviation of a slot total from the across-slot mean.
inline double mbs_conservation_spread(const std::vector<double>& totals) {
  if (totals.empty()) return 0.0;
  const double mean = std::accumulate(totals.begin(), totals.end(), 0.0) / static_cast<double>(totals.size());
  const double hi = *std::max_element(totals.begin(), totals.end());
  const double lo = *std::min_element(totals.begin(), totals.end());
  if (hi == 0.0) return 0.0;
  return (hi - lo) / std::max(mean, hi * 1e-300);
}

inline void check_dimensions(const NetworkConfiguration& cfg, const Scenario& s) {
  const std::size_t Z = s.regions.size();
  const auto J = static_cast<std::size_t>(s.num_slots_J);
  if (cfg.sbs_density.size() != Z)
    throw ValidationError("network.sbs_density", "sbs_density must have one entry per region");
  if (cfg.mbs_density.size() != Z || cfg.wps_weight_phi.size() != Z)
    throw ValidationError("network", "mbs_density and wps_weight_phi must have one row per region");
  for (std::size_t z = 0; z < Z; ++z) {
    if (cfg.mbs_density[z].size() != J)
      throw ValidationError("network.mbs_density." + std::to_string(z), "row must have num_slots entries");
    if (cfg.wps_weight_phi[z].size() != J)
      throw ValidationError("network.wps_weight_phi." + std::to_string(z), "row must have num_slots entries");
  }
}

// Total MBS fleet M; the per-slot totals must agree to kConservationRelTol.
inline double total_mbs_count(const NetworkConfiguration& cfg, const Scenario& s) {
  check_dimensions(cfg, s);
  const auto totals = mbs_slot_totals(cfg, s);
  const double m = totals.front();
  const double scale = *std::max_element(totals.begin(), totals.end());
  for (std::size_t j = 1; j < totals.size(); ++j)
    if (std::abs(totals[j] - m) > kConservationRelTol * scale)
      throw ValidationError("network.mbs_density",
                            "per-slot MBS totals differ (slot 0: " + std::to_string(m) + ", slot " +
                                std::to_string(j) + ": " + std::to_string(totals[j]) + ")");
  return m;
}

inline void validate_configuration(const NetworkConfiguration& cfg, const Scenario& s) {
  check_dimensions(cfg, s);
  for (std::size_t z = 0; z < cfg.sbs_density.size(); ++z) {
    const std::string path = std::to_string(z);
    if (!(cfg.sbs_density[z] >= 0.0 && std::isfinite(cfg.sbs_density[z])))
      throw ValidationError("network.sbs_density." + path, "densities must be finite and nonnegative");
    for (std::size_t j = 0; j < cfg.mbs_density[z].size(); ++j) {
      if (!(cfg.mbs_density[z][j] >= 0.0 && std::isfinite(cfg.mbs_density[z][j])))
        throw ValidationError("network.mbs_density." + path, "densities must be finite and nonnegative");
      if (!(cfg.wps_weight_phi[z][j] >= 0.0 && std::isfinite(cfg.wps_weight_phi[z][j])))
        throw ValidationError("network.wps_weight_phi." + path, "weights must be finite and nonnegative");
    }
  }
  (void)total_mbs_count(cfg, s);
}

// Piecewise-constant daily profile: the J/2 slots centred on `peak_slot` sit at
// the peak level, the rest at the trough level, with peak/trough equal to
// `peak_to_trough` and the across-slot mean equal to `mean_density`.
inline std::vector<double> commuting_profile(int num_slots, double mean_density, double peak_to_trough,
                                             int peak_slot) {
  if (num_slots < 1) throw ValidationError("commuting.num_slots", "num_slots must be positive");
  if (!(mean_density > 0.0)) throw ValidationError("commuting.mean_density", "mean_density must be positive");
  if (!(peak_to_trough >= 1.0))
    throw ValidationError("commuting.peak_to_trough", "peak_to_trough must be at least 1");
  const int J = num_slots;
  std::vector<bool> is_peak(static_cast<std::size_t>(J), false);
  const int width = std::max(1, J / 2);
  const int start = peak_slot - (width - 1) / 2;
  for (int i = 0; i < width; ++i) is_peak[static_cast<std::size_t>(((start + i) % J + J) % J)] = true;
  const double n_peak = static_cast<double>(std::count(is_peak.begin(), is_peak.end(), true));
  const double n_trough = static_cast<double>(J) - n_peak;
  // n_peak * R * t + n_trough * t = J * mean
  const double trough = static_cast<double>(J) * mean_density / (n_peak * peak_to_trough + n_trough);
  std::vector<double> out(static_cast<std::size_t>(J));
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = is_peak[j] ? trough * peak_to_trough : trough;
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const RadioParams& r) {
  return json{{"bandwidth_hz", r.bandwidth_hz},
              {"reuse_factor_k", r.reuse_factor_k},
              {"path_loss_alpha", r.path_loss_alpha},
              {"noise_psd_w_per_hz", r.noise_psd_w_per_hz},
              {"power_static_w", r.power_static_w},
              {"power_mobile_w", r.power_mobile_w},
              {"target_delay_tau0_s", r.target_delay_tau0_s},
              {"violation_target_delta", r.violation_target_delta},
              {"demand_delay_form", r.demand_delay_form == DemandDelayForm::cell_area ? "cell_area" : "per_user"}};
}

namespace detail {

template <class T>
T get_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ValidationError(path + key, "missing field '" + path + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(path + key, "field '" + path + key + "' has the wrong type");
  }
}

template <class T>
T get_field_or(const json& j, const std::string& key, const std::string& path, T fallback) {
  return j.contains(key) ? get_field<T>(j, key, path) : fallback;
}

}  // namespace detail

inline RadioParams radio_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("radio", "radio must be an object");
  RadioParams r;
  const std::string p = "radio.";
  r.bandwidth_hz = detail::get_field_or(j, "bandwidth_hz", p, r.bandwidth_hz);
  r.reuse_factor_k = detail::get_field_or(j, "reuse_factor_k", p, r.reuse_factor_k);
  r.path_loss_alpha = detail::get_field_or(j, "path_loss_alpha", p, r.path_loss_alpha);
  if (j.contains("noise_psd_dbm_per_hz"))
    r.noise_psd_w_per_hz = std::pow(10.0, detail::get_field<double>(j, "noise_psd_dbm_per_hz", p) / 10.0) * 1e-3;
  r.noise_psd_w_per_hz = detail::get_field_or(j, "noise_psd_w_per_hz", p, r.noise_psd_w_per_hz);
  r.power_static_w = detail::get_field_or(j, "power_static_w", p, r.power_static_w);
  r.power_mobile_w = detail::get_field_or(j, "power_mobile_w", p, r.power_mobile_w);
  r.target_delay_tau0_s = detail::get_field_or(j, "target_delay_tau0_s", p, r.target_delay_tau0_s);
  r.violation_target_delta = detail::get_field_or(j, "violation_target_delta", p, r.violation_target_delta);
  const auto form = detail::get_field_or<std::string>(j, "demand_delay_form", p, "cell_area");
  if (form == "cell_area") {
    r.demand_delay_form = DemandDelayForm::cell_area;
  } else if (form == "per_user") {
    r.demand_delay_form = DemandDelayForm::per_user;
  } else {
    throw ValidationError(p + "demand_delay_form", "demand_delay_form must be 'cell_area' or 'per_user'");
  }
  return r;
}

inline json to_json(const Scenario& s) {
  json regions = json::array();
  for (const auto& r : s.regions)
    regions.push_back({{"name", r.name}, {"area_m2", r.area_m2}, {"user_density_per_slot", r.user_density_per_slot}});
  return json{{"schema_version", kSchemaVersion},
              {"num_slots", s.num_slots_J},
              {"mbs_relative_cost_mu", s.mbs_relative_cost_mu},
              {"radio", to_json(s.radio)},
              {"regions", regions}};
}

// Builds the residential/office pair from a "commuting" block.
inline std::vector<Region> commuting_regions(const json& c, int num_slots) {
  const std::string p = "commuting.";
  const double total_area = detail::get_field<double>(c, "total_area_m2", p);
  const double gamma = detail::get_field_or(c, "area_ratio_gamma", p, 1.0);
  const double mean = detail::get_field<double>(c, "mean_density", p);
  const double ratio = detail::get_field_or(c, "peak_to_trough", p, 1.0);
  const int peak = detail::get_field_or(c, "residential_peak_slot", p, 0);
  if (!(total_area > 0.0)) throw ValidationError("commuting.total_area_m2", "total_area_m2 must be positive");
  if (!(gamma > 0.0)) throw ValidationError("commuting.area_ratio_gamma", "area_ratio_gamma must be positive");
  Region residential{"residential", total_area / (1.0 + gamma),
                     commuting_profile(num_slots, mean, ratio, peak)};
  Region office{"office", total_area * gamma / (1.0 + gamma),
                commuting_profile(num_slots, mean, ratio, peak + num_slots / 2)};
  return {residential, office};
}

inline Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("", "scenario must be a JSON object");
  const int version = detail::get_field_or(j, "schema_version", "", kSchemaVersion);
  if (version != kSchemaVersion)
    throw ValidationError("schema_version", "unsupported schema_version " + std::to_string(version));
  Scenario s;
  s.num_slots_J = detail::get_field_or(j, "num_slots", "", 1);
  s.mbs_relative_cost_mu = detail::get_field_or(j, "mbs_relative_cost_mu", "", 1.0);
  if (j.contains("radio")) s.radio = radio_from_json(j.at("radio"));
  if (j.contains("commuting")) {
    s.regions = commuting_regions(j.at("commuting"), s.num_slots_J);
  } else {
    if (!j.contains("regions") || !j.at("regions").is_array())
      throw ValidationError("regions", "regions must be an array");
    const auto& arr = j.at("regions");
    for (std::size_t z = 0; z < arr.size(); ++z) {
      const std::string p = "regions." + std::to_string(z) + ".";
      Region r;
      r.name = detail::get_field_or<std::string>(arr[z], "name", p, "region" + std::to_string(z));
      r.area_m2 = detail::get_field<double>(arr[z], "area_m2", p);
      r.user_density_per_slot = detail::get_field<std::vector<double>>(arr[z], "user_density_per_slot", p);
      s.regions.push_back(std::move(r));
    }
  }
  s.validate();
  return s;
}

inline json to_json(const NetworkConfiguration& c) {
  return json{{"sbs_density", c.sbs_density},
              {"mbs_density", c.mbs_density},
              {"wps_weight_phi", c.wps_weight_phi}};
}

inline NetworkConfiguration configuration_from_json(const json& j, const Scenario& s) {
  NetworkConfiguration c;
  const std::string p = "network.";
  c.sbs_density = detail::get_field<std::vector<double>>(j, "sbs_density", p);
  c.mbs_density = detail::get_field<std::vector<std::vector<double>>>(j, "mbs_density", p);
  c.wps_weight_phi = detail::get_field<std::vector<std::vector<double>>>(j, "wps_weight_phi", p);
  validate_configuration(c, s);
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("", "scenario not found: " + path);
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError("", "cannot parse " + path + ": " + e.what());
  }
}

inline Scenario load_scenario(const std::string& path) { return scenario_from_json(read_json_file(path)); }

inline void save_scenario(const std::string& path, const Scenario& s) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << to_json(s).dump(2) << '\n';
}

}  // namespace movnet
