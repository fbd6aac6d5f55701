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
#include <filesystem>
#include <functional>
#include <random>
#include <numeric>
#include <string>

#include "movnet/scenario.hpp"

namespace movnet {
namespace {

const std::string kScenarios = std::string(MOVNET_SOURCE_DIR) + "/scenarios/";

json minimal_doc() {
  return json::parse(R"({
    "schema_version": 1,
    "num_slots": 1,
    "regions": [{"name": "a", "area_m2": 1e6, "user_density_per_slot": [1e-2]}]
  })");
}

std::string expect_validation_field(const json& doc) {
  try {
    (void)scenario_from_json(doc);
  } catch (const ValidationError& e) {
    return e.field();
  }
  ADD_FAILURE() << "expected a validation error";
  return {};
}

TEST(RadioParams, DefaultsUseThermalNoise) {
  RadioParams r;
  EXPECT_NEAR(r.noise_psd_w_per_hz, 3.981071705534973e-21, 1e-33);
  EXPECT_DOUBLE_EQ(r.channel_bandwidth_hz(), 10e6 / 3.0);
  EXPECT_DOUBLE_EQ(r.noise_power_w(), r.noise_psd_w_per_hz * 10e6 / 3.0);
  EXPECT_NO_THROW(r.validate());
}

TEST(RadioParams, RhoIsPowerRatioRoot) {
  RadioParams r;
  r.power_static_w = 8.0;
  r.power_mobile_w = 1.0;
  r.path_loss_alpha = 3.0;
  EXPECT_NEAR(r.rho_ms(), 0.5, 1e-15);
  r.power_mobile_w = 8.0;
  EXPECT_DOUBLE_EQ(r.rho_ms(), 1.0);
}

TEST(RadioParams, RejectsAlphaAtTwo) {
  RadioParams r;
  r.path_loss_alpha = 2.0;
  try {
    r.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "radio.path_loss_alpha");
    EXPECT_NE(std::string(e.what()).find("path_loss_alpha must exceed 2"), std::string::npos);
  }
}

TEST(RadioParams, RejectsMobileAboveStaticPower) {
  RadioParams r;
  r.power_mobile_w = 11.0;
  EXPECT_THROW(r.validate(), ValidationError);
}

TEST(RadioParams, RejectsOutOfRangeFields) {
  for (auto mutate : std::vector<std::function<void(RadioParams&)>>{
           [](RadioParams& r) { r.bandwidth_hz = 0.0; }, [](RadioParams& r) { r.reuse_factor_k = 0; },
           [](RadioParams& r) { r.noise_psd_w_per_hz = -1.0; }, [](RadioParams& r) { r.power_static_w = 0.0; },
           [](RadioParams& r) { r.target_delay_tau0_s = 0.0; },
           [](RadioParams& r) { r.violation_target_delta = 1.5; }}) {
    RadioParams r;
    mutate(r);
    EXPECT_THROW(r.validate(), ValidationError);
  }
}

TEST(LoadScenario, MinimalSingleRegion) {
  const Scenario s = scenario_from_json(minimal_doc());
  EXPECT_EQ(s.regions.size(), 1u);
  EXPECT_EQ(s.num_slots_J, 1);
  EXPECT_DOUBLE_EQ(s.regions[0].area_m2, 1e6);
  EXPECT_DOUBLE_EQ(s.regions[0].user_density_per_slot[0], 1e-2);
  EXPECT_DOUBLE_EQ(s.mbs_relative_cost_mu, 1.0);
}

TEST(LoadScenario, AlphaTwoNamesField) {
  json doc = minimal_doc();
  doc["radio"] = {{"path_loss_alpha", 2.0}};
  EXPECT_EQ(expect_validation_field(doc), "radio.path_loss_alpha");
}

TEST(LoadScenario, ErrorsNameOffendingField) {
  json doc = minimal_doc();
  doc["regions"][0]["user_density_per_slot"] = {1e-2, 2e-2};
  EXPECT_EQ(expect_validation_field(doc), "regions.0.user_density_per_slot");
  doc = minimal_doc();
  doc["regions"][0]["area_m2"] = -1.0;
  EXPECT_EQ(expect_validation_field(doc), "regions.0.area_m2");
  doc = minimal_doc();
  doc["regions"][0]["user_density_per_slot"] = {0.0};
  EXPECT_EQ(expect_validation_field(doc), "regions.0.user_density_per_slot.0");
  doc = minimal_doc();
  doc["regions"][0].erase("area_m2");
  EXPECT_EQ(expect_validation_field(doc), "regions.0.area_m2");
  doc = minimal_doc();
  doc["schema_version"] = 7;
  EXPECT_EQ(expect_validation_field(doc), "schema_version");
  doc = minimal_doc();
  doc["radio"] = {{"demand_delay_form", "mystery"}};
  EXPECT_EQ(expect_validation_field(doc), "radio.demand_delay_form");
}

TEST(LoadScenario, NoiseInDbm) {
  json doc = minimal_doc();
  doc["radio"] = {{"noise_psd_dbm_per_hz", -174.0}};
  EXPECT_NEAR(scenario_from_json(doc).radio.noise_psd_w_per_hz, kThermalNoisePsd, 1e-35);
}

TEST(LoadScenario, MissingFile) {
  try {
    (void)load_scenario(kScenarios + "does_not_exist.json");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("scenario not found"), std::string::npos);
  }
}

TEST(LoadScenario, CommutingFixture) {
  const Scenario s = load_scenario(kScenarios + "commuting.json");
  ASSERT_EQ(s.regions.size(), 2u);
  EXPECT_EQ(s.num_slots_J, 24);
  EXPECT_EQ(s.regions[0].name, "residential");
  EXPECT_EQ(s.regions[1].name, "office");
}

TEST(LoadScenario, ShippedFixturesParse) {
  for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW((void)load_scenario(entry.path().string())) << entry.path();
  }
}

TEST(SaveScenario, RoundTrip) {
  Scenario s = scenario_from_json(minimal_doc());
  s.num_slots_J = 2;
  s.regions = {{"x", 2.5e6, {1e-3, 4e-3}}, {"y", 1e5, {2e-2, 3e-2}}};
  s.mbs_relative_cost_mu = 0.25;
  s.radio.power_mobile_w = 2.0;
  s.radio.noise_psd_w_per_hz = 1.8e-8;
  s.radio.demand_delay_form = DemandDelayForm::per_user;
  const auto path = std::filesystem::temp_directory_path() / "movnet_roundtrip.json";
  save_scenario(path.string(), s);
  const Scenario back = load_scenario(path.string());
  EXPECT_EQ(back, s);
  std::filesystem::remove(path);
}

TEST(MbsCount, ZeroConfiguration) {
  const Scenario s = scenario_from_json(minimal_doc());
  const auto cfg = NetworkConfiguration::zeros(1, 1);
  EXPECT_DOUBLE_EQ(total_mbs_count(cfg, s), 0.0);
}

TEST(MbsCount, ArithmeticIdentity) {
  const Scenario s = scenario_from_json(minimal_doc());
  auto cfg = NetworkConfiguration::zeros(1, 1);
  cfg.mbs_density[0][0] = 1e-4;
  EXPECT_NEAR(total_mbs_count(cfg, s), 100.0, 1e-9);
}

TEST(MbsCount, UnequalSlotTotalsRejected) {
  Scenario s;
  s.num_slots_J = 2;
  s.regions = {{"a", 1e6, {1e-2, 1e-2}}, {"b", 1e6, {1e-2, 1e-2}}};
  auto cfg = NetworkConfiguration::zeros(2, 2);
  cfg.mbs_density = {{5e-5, 5e-5}, {5e-5, 5.02e-5}};
  EXPECT_THROW((void)total_mbs_count(cfg, s), ValidationError);
  cfg.mbs_density = {{6e-5, 4e-5}, {4e-5, 6e-5}};
  EXPECT_NEAR(total_mbs_count(cfg, s), 100.0, 1e-9);
}

TEST(Configuration, AcceptedConfigurationsConserveMbs) {
  Scenario s;
  s.num_slots_J = 3;
  s.regions = {{"a", 1e6, {1e-2, 1e-2, 1e-2}}, {"b", 3e6, {1e-2, 1e-2, 1e-2}}};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1e-4);
  int accepted = 0;
  for (int t = 0; t < 200; ++t) {
    auto cfg = NetworkConfiguration::zeros(2, 3);
    cfg.sbs_density = {1e-4, 1e-4};
    for (auto& row : cfg.mbs_density)
      for (auto& v : row) v = u(rng);
    if (t % 2 == 0) {
      // Make region b absorb the slack so totals match.
      for (std::size_t j = 0; j < 3; ++j) cfg.mbs_density[1][j] = (3e2 - cfg.mbs_density[0][j] * 1e6) / 3e6;
    }
    try {
      validate_configuration(cfg, s);
      ++accepted;
      const auto totals = mbs_slot_totals(cfg, s);
      EXPECT_LE(mbs_conservation_spread(totals), kConservationRelTol);
    } catch (const ValidationError&) {
    }
  }
  EXPECT_EQ(accepted, 100);
}

TEST(Configuration, DimensionMismatch) {
  const Scenario s = scenario_from_json(minimal_doc());
  auto cfg = NetworkConfiguration::zeros(2, 1);
  EXPECT_THROW(check_dimensions(cfg, s), ValidationError);
  cfg = NetworkConfiguration::zeros(1, 1);
  cfg.sbs_density[0] = -1.0;
  EXPECT_THROW(validate_configuration(cfg, s), ValidationError);
}

TEST(Commuting, ProfilePreservesMeanAndRatio) {
  const auto p = commuting_profile(24, 1e-2, 10.0, 0);
  const double mean = std::accumulate(p.begin(), p.end(), 0.0) / 24.0;
  EXPECT_NEAR(mean, 1e-2, 1e-15);
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  EXPECT_NEAR(*hi / *lo, 10.0, 1e-12);
  EXPECT_DOUBLE_EQ(p[0], *hi);
}

TEST(Commuting, FlatProfileIsConstant) {
  for (double v : commuting_profile(5, 3e-3, 1.0, 2)) EXPECT_DOUBLE_EQ(v, 3e-3);
}

TEST(Commuting, RegionsAreAntiPhase) {
  const json c{{"total_area_m2", 2e6}, {"area_ratio_gamma", 3.0}, {"mean_density", 1e-2},
               {"peak_to_trough", 4.0}, {"residential_peak_slot", 0}};
  const auto regions = commuting_regions(c, 8);
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_NEAR(regions[0].area_m2 + regions[1].area_m2, 2e6, 1e-6);
  EXPECT_NEAR(regions[1].area_m2 / regions[0].area_m2, 3.0, 1e-12);
  for (std::size_t j = 0; j < 8; ++j)
    EXPECT_DOUBLE_EQ(regions[0].user_density_per_slot[j], regions[1].user_density_per_slot[(j + 4) % 8]);
  EXPECT_GT(regions[0].user_density_per_slot[0], regions[1].user_density_per_slot[0]);
}

TEST(Commuting, RejectsRatioBelowOne) { EXPECT_THROW((void)commuting_profile(4, 1e-2, 0.5, 0), ValidationError); }

}  // namespace
}  // namespace movnet
