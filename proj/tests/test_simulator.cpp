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

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "movnet/simulator.hpp"
#include "support/oracles.hpp"

namespace movnet {
namespace {

RadioParams fixture_radio() {
  RadioParams r;
  r.noise_psd_w_per_hz = 1.8e-8;
  return r;
}

TEST(Torus, DistanceWrapsAround) {
  EXPECT_DOUBLE_EQ(torus_distance({1.0, 1.0}, {99.0, 1.0}, 100.0), 2.0);
  EXPECT_DOUBLE_EQ(torus_distance({1.0, 1.0}, {99.0, 99.0}, 100.0), std::sqrt(8.0));
  EXPECT_DOUBLE_EQ(torus_distance({10.0, 20.0}, {40.0, 60.0}, 100.0), 50.0);
  EXPECT_LE(torus_distance({0.0, 0.0}, {50.0, 50.0}, 100.0), 50.0 * std::sqrt(2.0));
}

TEST(Ppp, ZeroIntensityIsEmpty) {
  std::mt19937_64 rng(1);
  EXPECT_TRUE(sample_ppp(0.0, 100.0, rng).empty());
  EXPECT_THROW(sample_ppp(-1.0, 100.0, rng), ValidationError);
}

TEST(Ppp, CountsArePoisson) {
  // Pearson chi-square of 500 window counts against Poisson(20).
  std::mt19937_64 rng(3);
  const double mean = 20.0;
  std::vector<int> hist(41, 0);
  const int n = 500;
  for (int i = 0; i < n; ++i) {
    const auto pts = sample_ppp(mean / 100.0, 10.0, rng);
    ++hist[std::min<std::size_t>(pts.size(), 40)];
  }
  // Bins: <=13, 14..26 individually, >=27.
  auto pmf = [&](int k) { return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0)); };
  std::vector<double> obs, expct;
  double lo_o = 0, lo_e = 0;
  for (int k = 0; k <= 13; ++k) {
    lo_o += hist[k];
    lo_e += pmf(k);
  }
  obs.push_back(lo_o);
  expct.push_back(lo_e * n);
  double cum = lo_e;
  for (int k = 14; k <= 26; ++k) {
    obs.push_back(hist[k]);
    expct.push_back(pmf(k) * n);
    cum += pmf(k);
  }
  double hi_o = 0;
  for (int k = 27; k <= 40; ++k) hi_o += hist[k];
  obs.push_back(hi_o);
  expct.push_back((1.0 - cum) * n);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) chi2 += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
  const boost::math::chi_squared dist(static_cast<double>(obs.size() - 1));
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.999));
}

TEST(Ppp, DisjointQuadrantsUncorrelated) {
  std::mt19937_64 rng(9);
  const int n = 2000;
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const auto pts = sample_ppp(0.1, 20.0, rng);
    double a = 0, b = 0;
    for (const auto& p : pts) {
      if (p.x < 10.0 && p.y < 10.0) ++a;
      if (p.x >= 10.0 && p.y >= 10.0) ++b;
    }
    sx += a;
    sy += b;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  const double cov = sxy / n - sx / n * sy / n;
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(sx / n, 10.0, 0.3);
}

TEST(Association, MatchesBruteForce) {
  std::mt19937_64 rng(4);
  RadioParams radio = fixture_radio();
  radio.power_mobile_w = 2.0;
  const double side = 500.0;
  const auto sbs = sample_ppp(2e-4, side, rng);
  const auto mbs = sample_ppp(3e-4, side, rng);
  const auto users = sample_ppp(5e-3, side, rng);
  const auto a = associate(users, sbs, mbs, radio, side);
  const double rho = std::cbrt(2.0 / 10.0);
  for (std::size_t u = 0; u < users.size(); ++u) {
    double best = 1e300;
    int best_i = -1;
    Tier tier = Tier::static_bs;
    for (std::size_t i = 0; i < sbs.size(); ++i) {
      const double d = torus_distance(users[u], sbs[i], side);
      if (d < best) {
        best = d;
        best_i = static_cast<int>(i);
      }
    }
    for (std::size_t i = 0; i < mbs.size(); ++i) {
      const double d = torus_distance(users[u], mbs[i], side) / rho;
      if (d < best) {
        best = d;
        best_i = static_cast<int>(i);
        tier = Tier::mobile_bs;
      }
    }
    ASSERT_EQ(a.tier[u], tier) << u;
    ASSERT_EQ(a.bs[u], best_i) << u;
    EXPECT_NEAR(a.equivalent_distance[u], best, 1e-9);
  }
}

TEST(Association, EquivalentDistanceLaw) {
  // One user per independent layout keeps the samples i.i.d.
  RadioParams radio = fixture_radio();
  radio.power_mobile_w = 1.25;  // rho = 0.5
  const SlotState st{5e-3, 2e-4, 1e-4, 1.0};
  const double side = 500.0;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, side);
  std::vector<double> r;
  std::size_t nm = 0;
  const int n = 6000;
  for (int i = 0; i < n; ++i) {
    const auto sbs = sample_ppp(st.lambda_s, side, rng);
    const auto mbs = sample_ppp(st.lambda_m, side, rng);
    if (sbs.empty() && mbs.empty()) continue;
    const auto a = associate({{u(rng), u(rng)}}, sbs, mbs, radio, side);
    r.push_back(a.equivalent_distance[0]);
    nm += a.tier[0] == Tier::mobile_bs;
  }
  const double lam = st.lambda_s + 0.25 * st.lambda_m;
  const double ks = oracle::ks_distance(r, [&](double x) { return 1.0 - std::exp(-std::numbers::pi * lam * x * x); });
  EXPECT_LT(ks, oracle::ks_critical_001(r.size()));
  const double share = static_cast<double>(nm) / static_cast<double>(r.size());
  EXPECT_NEAR(share, 0.25 * st.lambda_m / lam, 4.0 * std::sqrt(share * (1.0 - share) / static_cast<double>(r.size())));
}

TEST(MeasureLayout, SingleCellClosedForm) {
  RadioParams radio = fixture_radio();
  Layout l;
  l.side = 1000.0;
  l.sbs = {{500.0, 500.0}};
  l.users = {{510.0, 500.0}, {500.0, 540.0}, {300.0, 300.0}};
  SimSettings sim;
  sim.include_far_field = false;
  sim.utilization_coupling_iters = 3;
  std::mt19937_64 rng(1);
  const SlotState st{3e-6, 0.0, 1e-6, 0.0};
  const auto res = measure_layout(l, st, radio, sim, rng);
  ASSERT_EQ(res.users.size(), 3u);
  double sum = 0.0;
  for (std::size_t u = 0; u < 3; ++u) {
    const double d = torus_distance(l.users[u], l.sbs[0], l.side);
    const double want = 3.0 / capacity(d, radio.power_static_w, 0.0, radio);
    EXPECT_NEAR(res.users[u].delay / want, 1.0, 1e-12);
    EXPECT_EQ(res.users[u].interference, 0.0);
    sum += want;
  }
  EXPECT_NEAR(res.mean_tau_s / (sum / 3.0), 1.0, 1e-12);
  EXPECT_EQ(res.samples_m, 0);
}

TEST(MeasureLayout, BackhaulLoadCountsHostedMbs) {
  RadioParams radio = fixture_radio();
  Layout l;
  l.side = 1000.0;
  l.sbs = {{500.0, 500.0}};
  l.mbs = {{600.0, 500.0}, {500.0, 650.0}};
  l.users = {{505.0, 500.0}, {601.0, 500.0}, {602.0, 500.0}};
  SimSettings sim;
  sim.include_far_field = false;
  sim.utilization_coupling_iters = 1;
  std::mt19937_64 rng(1);
  const SlotState st{3e-6, 2e-6, 1e-6, 0.5};
  const auto res = measure_layout(l, st, radio, sim, rng);
  ASSERT_EQ(res.mbs.size(), 2u);
  EXPECT_EQ(res.mbs[0].own_users, 2);
  EXPECT_EQ(res.mbs[0].mbs_on_host, 2);
  EXPECT_EQ(res.mbs[0].users_on_host, 1);
  EXPECT_TRUE(res.mbs[0].eligible);
  EXPECT_FALSE(res.mbs[1].eligible);
  EXPECT_EQ(res.mbs_eligible, 1);
  // SBS user delay: (M + phi n) / (phi C).
  const double i0 = res.users[0].interference;
  EXPECT_NEAR(res.users[0].delay / ((2.0 + 0.5) / (0.5 * capacity(5.0, radio.power_static_w, i0, radio))), 1.0,
              1e-12);
}

TEST(MeasureLayout, MeanSbsCellAreaMatchesWeightedDensity) {
  RadioParams radio = fixture_radio();
  radio.power_mobile_w = 1.25;
  const SlotState st{0.05, 2e-4, 1e-4, 1.0};
  std::mt19937_64 rng(2);
  const Layout l = sample_layout(st, 2000.0, rng);
  const auto a = associate(l.users, l.sbs, l.mbs, radio, l.side);
  std::size_t ns = 0;
  for (auto t : a.tier) ns += t == Tier::static_bs;
  const double mean_area = static_cast<double>(ns) / st.lambda_u / static_cast<double>(l.sbs.size());
  EXPECT_NEAR(mean_area * (st.lambda_s + 0.25 * st.lambda_m), 1.0, 0.03);
}

TEST(MeasureSlot, DeterministicForSeed) {
  const SlotState st{1e-2, 3.39e-4, 3.39e-4, 1.0};
  SimSettings sim;
  sim.window_side_m = 800.0;
  sim.replications = 3;
  sim.rng_seed = 42;
  const auto a = measure_slot(st, fixture_radio(), sim);
  const auto b = measure_slot(st, fixture_radio(), sim);
  EXPECT_EQ(a.mean_delay_s, b.mean_delay_s);
  EXPECT_EQ(a.mean_delay_m, b.mean_delay_m);
  EXPECT_EQ(a.empirical_violation, b.empirical_violation);
  sim.rng_seed = 43;
  EXPECT_NE(measure_slot(st, fixture_radio(), sim).mean_delay_s, a.mean_delay_s);
  sim.rng_seed = 42;
  sim.jobs = 3;
  EXPECT_EQ(measure_slot(st, fixture_radio(), sim).mean_delay_s, a.mean_delay_s);
}

TEST(MeasureSlot, SingleReplicationWarnsAndHasNoInterval) {
  const SlotState st{1e-2, 3.39e-4, 3.39e-4, 1.0};
  SimSettings sim;
  sim.window_side_m = 600.0;
  sim.replications = 1;
  const auto r = measure_slot(st, fixture_radio(), sim);
  EXPECT_FALSE(r.ci95_s.valid());
  bool warned = false;
  for (const auto& w : r.warnings) warned |= w.find("replications") != std::string::npos;
  EXPECT_TRUE(warned);
}

TEST(MeasureSlot, BernoulliModeRuns) {
  const SlotState st{1e-2, 3.39e-4, 3.39e-4, 1.0};
  SimSettings sim;
  sim.window_side_m = 600.0;
  sim.replications = 2;
  sim.mode = InterferenceMode::bernoulli;
  const auto r = measure_slot(st, fixture_radio(), sim);
  EXPECT_GT(r.mean_delay_s, 0.0);
  EXPECT_GT(r.mean_delay_m, 0.0);
}

TEST(TInterval, KnownValues) {
  const auto ci = t_interval({1.0, 2.0, 3.0, 4.0});
  // mean 2.5, s = 1.29099, t(3, 0.975) = 3.18245
  EXPECT_NEAR(ci.lo, 2.5 - 3.182446305 * 1.290994449 / 2.0, 1e-8);
  EXPECT_NEAR(ci.hi, 2.5 + 3.182446305 * 1.290994449 / 2.0, 1e-8);
  EXPECT_FALSE(t_interval({1.0}).valid());
}

TEST(Campaign, SmallRunAgreesRoughly) {
  const SlotState st{1e-2, 3.39e-4, 3.39e-4, 1.0};
  SimSettings sim;
  sim.window_side_m = 1500.0;
  sim.replications = 4;
  const auto rows = run_campaign({st}, fixture_radio(), sim);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].sim.mean_delay_s / rows[0].analytic.tau_bar_s, 1.0, 0.15);
  EXPECT_NEAR(rows[0].sim.mean_delay_m / rows[0].analytic.tau_bar_m, 1.0, 0.15);
  EXPECT_GT(rows[0].sim.mbs_samples, 0);
  EXPECT_THROW(run_campaign({}, fixture_radio(), sim), ValidationError);
}

}  // namespace
}  // namespace movnet
