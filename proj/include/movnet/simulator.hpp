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

// Monte-Carlo validation engine. Both base-station tiers and the users are
// Poisson processes on a square torus; users attach to the strongest BS,
// MBSs attach to the nearest SBS for backhaul, and per-bit delays follow the
// processor-sharing model with utilization-thinned interference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "movnet/analytic.hpp"
#include "movnet/backhaul.hpp"
#include "movnet/error.hpp"
#include "movnet/parallel.hpp"
#include "movnet/scenario.hpp"

namespace movnet {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class InterferenceMode { expected, bernoulli };

struct SimSettings {
  double window_side_m = 2000.0;
  int replications = 30;
  std::uint64_t rng_seed = 1;
  int utilization_coupling_iters = 10;
  InterferenceMode mode = InterferenceMode::expected;
  // Users whose delay is evaluated per replication; every user still counts
  // toward cell loads.
  int max_user_samples = 4000;
  // Adds the mean interference of BSs beyond half the window side.
  bool include_far_field = true;
  // Keeps per-user and per-MBS samples in the report.
  bool keep_samples = false;
  int jobs = 1;

  void validate() const {
    if (!(window_side_m > 0.0) || !std::isfinite(window_side_m))
      throw ValidationError("window_side_m", "window_side_m must be positive");
    if (replications < 1) throw ValidationError("replications", "replications must be positive");
    if (utilization_coupling_iters < 1)
      throw ValidationError("utilization_coupling_iters", "utilization_coupling_iters must be positive");
    if (max_user_samples < 1) throw ValidationError("max_user_samples", "max_user_samples must be positive");
    if (jobs < 1) throw ValidationError("jobs", "jobs must be positive");
  }
};

// Minimum-image distance on a torus of the given side.
inline double torus_distance(const Point& a, const Point& b, double side) {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  dx = std::min(dx, side - dx);
  dy = std::min(dy, side - dy);
  return std::hypot(dx, dy);
}

template <class Rng>
std::vector<Point> sample_ppp(double intensity, double side, Rng& rng) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity)) throw ValidationError("intensity", "intensity must be >= 0");
  if (!(side > 0.0)) throw ValidationError("window_side_m", "window side must be positive");
  std::vector<Point> pts;
  if (intensity == 0.0) return pts;
  std::poisson_distribution<long long> count(intensity * side * side);
  const long long n = count(rng);
  std::uniform_real_distribution<double> u(0.0, side);
  pts.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const double x = u(rng);
    pts.push_back({x, u(rng)});
  }
  return pts;
}

// Uniform bucket grid on the torus for nearest-neighbour queries.
class TorusGrid {
 public:
  TorusGrid(const std::vector<Point>& pts, double side) : pts_(&pts), side_(side) {
    n_ = std::max<long>(1, std::min<long>(2048, static_cast<long>(std::sqrt(static_cast<double>(pts.size())))));
    cell_ = side / static_cast<double>(n_);
    buckets_.assign(static_cast<std::size_t>(n_ * n_), {});
    for (std::size_t i = 0; i < pts.size(); ++i) buckets_[bucket(pts[i])].push_back(static_cast<int>(i));
  }

  // Index of the nearest point and its distance; index -1 when empty.
  std::pair<int, double> nearest(const Point& q) const {
    if (pts_->empty()) return {-1, std::numeric_limits<double>::infinity()};
    const long cx = coord(q.x), cy = coord(q.y);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (long k = 0;; ++k) {
      if (2 * k + 1 > n_ + 2) break;  // every bucket visited
      for (long dx = -k; dx <= k; ++dx) {
        for (long dy = -k; dy <= k; ++dy) {
          if (std::max(std::abs(dx), std::abs(dy)) != k) continue;
          const long bx = ((cx + dx) % n_ + n_) % n_;
          const long by = ((cy + dy) % n_ + n_) % n_;
          for (int i : buckets_[static_cast<std::size_t>(bx * n_ + by)]) {
            const double d = torus_distance(q, (*pts_)[static_cast<std::size_t>(i)], side_);
            if (d < best_d || (d == best_d && i < best)) {
              best_d = d;
              best = i;
            }
          }
        }
      }
      if (best >= 0 && best_d <= static_cast<double>(k) * cell_) break;
    }
    return {best, best_d};
  }

 private:
  long coord(double v) const {
    long c = static_cast<long>(std::floor(v / cell_));
    return std::clamp(c, 0L, n_ - 1);
  }
  std::size_t bucket(const Point& p) const { return static_cast<std::size_t>(coord(p.x) * n_ + coord(p.y)); }

  const std::vector<Point>* pts_;
  double side_;
  long n_ = 1;
  double cell_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

enum class Tier : std::uint8_t { static_bs, mobile_bs };

struct Assignment {
  std::vector<Tier> tier;
  std::vector<int> bs;
  std::vector<double> distance;             // to the serving BS
  std::vector<double> equivalent_distance;  // MBS distances divided by rho_ms
};

// Strongest-power association: nearest BS after scaling MBS distances by
// 1/rho_ms.
inline Assignment associate(const std::vector<Point>& users, const std::vector<Point>& sbs,
                            const std::vector<Point>& mbs, const RadioParams& radio, double side) {
  if (sbs.empty() && mbs.empty()) throw SimulationError("association needs at least one base station");
  const double rho = radio.rho_ms();
  const TorusGrid gs(sbs, side), gm(mbs, side);
  Assignment a;
  a.tier.resize(users.size());
  a.bs.resize(users.size());
  a.distance.resize(users.size());
  a.equivalent_distance.resize(users.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    const auto [is, ds] = gs.nearest(users[u]);
    const auto [im, dm] = gm.nearest(users[u]);
    if (im >= 0 && dm / rho < ds) {
      a.tier[u] = Tier::mobile_bs;
      a.bs[u] = im;
      a.distance[u] = dm;
      a.equivalent_distance[u] = dm / rho;
    } else {
      a.tier[u] = Tier::static_bs;
      a.bs[u] = is;
      a.distance[u] = ds;
      a.equivalent_distance[u] = ds;
    }
  }
  return a;
}

struct Layout {
  double side = 0.0;
  std::vector<Point> sbs, mbs, users;
};

template <class Rng>
Layout sample_layout(const SlotState& st, double side, Rng& rng) {
  Layout l;
  l.side = side;
  l.sbs = sample_ppp(st.lambda_s, side, rng);
  l.mbs = sample_ppp(st.lambda_m, side, rng);
  l.users = sample_ppp(st.lambda_u, side, rng);
  return l;
}

struct UserSample {
  Tier tier = Tier::static_bs;
  double distance = 0.0;
  double equivalent_distance = 0.0;
  double field_s = 0.0;  // sum of P_s d^-alpha over interfering SBSs, full activity
  double field_m = 0.0;
  double interference = 0.0;
  int users_in_cell = 0;
  double delay = 0.0;
};

struct MbsSample {
  double distance = 0.0;  // to the backhaul SBS
  int mbs_on_host = 0;
  int users_on_host = 0;
  int own_users = 0;
  double interference = 0.0;
  double backhaul_delay = 0.0;  // ideal per-bit delay of the backhaul link
  bool eligible = false;        // has at least one user
  bool violated = false;
};

struct ReplicationResult {
  double mean_tau_m = std::numeric_limits<double>::quiet_NaN();
  double mean_tau_s = std::numeric_limits<double>::quiet_NaN();
  long samples_m = 0;
  long samples_s = 0;
  long mbs_eligible = 0;
  long mbs_violations = 0;
  double util_m = 1.0;
  double util_s = 1.0;
  double coupling_residual = 0.0;
  std::vector<UserSample> users;
  std::vector<MbsSample> mbs;
  std::vector<int> users_per_sbs;
  std::vector<int> users_per_mbs;
};

namespace detail {

struct FieldPair {
  double s = 0.0;
  double m = 0.0;
};

// Full-activity received power at p from every BS within half the side,
// skipping one excluded BS per tier.
inline FieldPair raw_fields(const Point& p, const Layout& l, const RadioParams& radio, int skip_s, int skip_m) {
  const double half = 0.5 * l.side;
  const double alpha = radio.path_loss_alpha;
  FieldPair f;
  for (std::size_t i = 0; i < l.sbs.size(); ++i) {
    if (static_cast<int>(i) == skip_s) continue;
    const double d = torus_distance(p, l.sbs[i], l.side);
    if (d > 0.0 && d <= half) f.s += radio.power_static_w * std::pow(d, -alpha);
  }
  for (std::size_t i = 0; i < l.mbs.size(); ++i) {
    if (static_cast<int>(i) == skip_m) continue;
    const double d = torus_distance(p, l.mbs[i], l.side);
    if (d > 0.0 && d <= half) f.m += radio.power_mobile_w * std::pow(d, -alpha);
  }
  return f;
}

// Mean full-activity power from a tier beyond half the side.
inline double far_field(double density, double power, double side, double alpha) {
  return 2.0 * std::numbers::pi * density * power * std::pow(0.5 * side, 2.0 - alpha) / (alpha - 2.0);
}

template <class Rng>
FieldPair bernoulli_fields(const Point& p, const Layout& l, const RadioParams& radio, int skip_s, int skip_m,
                           const std::vector<char>& on_s, const std::vector<char>& on_m) {
  const double half = 0.5 * l.side;
  const double alpha = radio.path_loss_alpha;
  FieldPair f;
  for (std::size_t i = 0; i < l.sbs.size(); ++i) {
    if (static_cast<int>(i) == skip_s || !on_s[i]) continue;
    const double d = torus_distance(p, l.sbs[i], l.side);
    if (d > 0.0 && d <= half) f.s += radio.power_static_w * std::pow(d, -alpha);
  }
  for (std::size_t i = 0; i < l.mbs.size(); ++i) {
    if (static_cast<int>(i) == skip_m || !on_m[i]) continue;
    const double d = torus_distance(p, l.mbs[i], l.side);
    if (d > 0.0 && d <= half) f.m += radio.power_mobile_w * std::pow(d, -alpha);
  }
  return f;
}

}  // namespace detail

// Delays for one realised layout. The rng drives Bernoulli activity only.
template <class Rng>
ReplicationResult measure_layout(const Layout& l, const SlotState& st, const RadioParams& radio,
                                 const SimSettings& sim, Rng& rng) {
  if (l.sbs.empty() && l.mbs.empty()) throw SimulationError("layout has no base stations");
  if (!l.mbs.empty() && l.sbs.empty()) throw SimulationError("MBSs need at least one SBS for backhaul");
  if (st.lambda_m > 0.0 && !(st.phi > 0.0)) throw ValidationError("phi", "phi must be positive with MBSs");
  const double phi = st.phi > 0.0 ? st.phi : 1.0;
  const double k = radio.reuse_factor_k;
  const double tau0 = radio.target_delay_tau0_s;
  const double alpha = radio.path_loss_alpha;
  const double noise = radio.noise_power_w();

  ReplicationResult out;
  const Assignment a = associate(l.users, l.sbs, l.mbs, radio, l.side);
  out.users_per_sbs.assign(l.sbs.size(), 0);
  out.users_per_mbs.assign(l.mbs.size(), 0);
  for (std::size_t u = 0; u < l.users.size(); ++u) {
    auto& cnt = a.tier[u] == Tier::static_bs ? out.users_per_sbs : out.users_per_mbs;
    ++cnt[static_cast<std::size_t>(a.bs[u])];
  }

  // Backhaul attachment.
  const TorusGrid gs(l.sbs, l.side);
  std::vector<int> host(l.mbs.size(), -1);
  std::vector<double> host_dist(l.mbs.size(), 0.0);
  std::vector<int> mbs_per_sbs(l.sbs.size(), 0);
  for (std::size_t i = 0; i < l.mbs.size(); ++i) {
    const auto [h, d] = gs.nearest(l.mbs[i]);
    host[i] = h;
    host_dist[i] = d;
    ++mbs_per_sbs[static_cast<std::size_t>(h)];
  }

  const double tail_s = sim.include_far_field ? detail::far_field(st.lambda_s, radio.power_static_w, l.side, alpha) : 0.0;
  const double tail_m = sim.include_far_field ? detail::far_field(st.lambda_m, radio.power_mobile_w, l.side, alpha) : 0.0;

  const std::size_t n_samples = std::min<std::size_t>(l.users.size(), static_cast<std::size_t>(sim.max_user_samples));
  out.users.resize(n_samples);
  for (std::size_t u = 0; u < n_samples; ++u) {
    auto& s = out.users[u];
    s.tier = a.tier[u];
    s.distance = a.distance[u];
    s.equivalent_distance = a.equivalent_distance[u];
    const int b = a.bs[u];
    const bool is_s = s.tier == Tier::static_bs;
    const auto f = detail::raw_fields(l.users[u], l, radio, is_s ? b : -1, is_s ? -1 : b);
    s.field_s = f.s + tail_s;
    s.field_m = f.m + tail_m;
    s.users_in_cell = is_s ? out.users_per_sbs[static_cast<std::size_t>(b)] : out.users_per_mbs[static_cast<std::size_t>(b)];
  }
  std::vector<detail::FieldPair> mbs_fields(l.mbs.size());
  for (std::size_t i = 0; i < l.mbs.size(); ++i) {
    const auto f = detail::raw_fields(l.mbs[i], l, radio, host[i], static_cast<int>(i));
    mbs_fields[i] = {f.s + tail_s, f.m + tail_m};
  }

  auto user_delay = [&](const UserSample& s, double interference, std::size_t u) {
    const int b = a.bs[u];
    if (s.tier == Tier::static_bs) {
      const double load = mbs_per_sbs[static_cast<std::size_t>(b)] + phi * s.users_in_cell;
      return load / (phi * capacity(s.distance, radio.power_static_w, interference, radio));
    }
    return s.users_in_cell / capacity(s.distance, radio.power_mobile_w, interference, radio);
  };
  (void)noise;

  std::vector<char> on_s, on_m;
  auto draw_activity = [&](double us, double um) {
    std::bernoulli_distribution bs(std::clamp(us / k, 0.0, 1.0)), bm(std::clamp(um / k, 0.0, 1.0));
    on_s.resize(l.sbs.size());
    on_m.resize(l.mbs.size());
    for (auto& v : on_s) v = bs(rng) ? 1 : 0;
    for (auto& v : on_m) v = bm(rng) ? 1 : 0;
  };
  auto interference_at = [&](const Point& p, int skip_s, int skip_m, double field_s, double field_m, double us,
                             double um) {
    if (sim.mode == InterferenceMode::expected) return (us * field_s + um * field_m) / k;
    const auto f = detail::bernoulli_fields<Rng>(p, l, radio, skip_s, skip_m, on_s, on_m);
    return f.s + f.m + (us * tail_s + um * tail_m) / k;
  };

  double us = 1.0, um = 1.0;
  for (int it = 0; it < sim.utilization_coupling_iters; ++it) {
    if (sim.mode == InterferenceMode::bernoulli) draw_activity(us, um);
    double sum_s = 0.0, sum_m = 0.0;
    long ns = 0, nm = 0;
    for (std::size_t u = 0; u < n_samples; ++u) {
      auto& s = out.users[u];
      const bool is_s = s.tier == Tier::static_bs;
      s.interference = interference_at(l.users[u], is_s ? a.bs[u] : -1, is_s ? -1 : a.bs[u], s.field_s, s.field_m, us, um);
      s.delay = user_delay(s, s.interference, u);
      if (is_s) {
        sum_s += s.delay;
        ++ns;
      } else {
        sum_m += s.delay;
        ++nm;
      }
    }
    out.samples_s = ns;
    out.samples_m = nm;
    out.mean_tau_s = ns > 0 ? sum_s / static_cast<double>(ns) : std::numeric_limits<double>::quiet_NaN();
    out.mean_tau_m = nm > 0 ? sum_m / static_cast<double>(nm) : std::numeric_limits<double>::quiet_NaN();
    const double new_us = ns > 0 ? out.mean_tau_s / tau0 : us;
    const double new_um = nm > 0 ? out.mean_tau_m / tau0 : um;
    out.coupling_residual = std::max(std::abs(new_us - us) / std::max(us, 1e-300), std::abs(new_um - um) / std::max(um, 1e-300));
    // The last round's delays were measured at (us, um); report those.
    if (it + 1 < sim.utilization_coupling_iters) {
      us = new_us;
      um = new_um;
    }
  }
  out.util_s = us;
  out.util_m = um;

  out.mbs.resize(l.mbs.size());
  for (std::size_t i = 0; i < l.mbs.size(); ++i) {
    auto& m = out.mbs[i];
    const auto h = static_cast<std::size_t>(host[i]);
    m.distance = host_dist[i];
    m.mbs_on_host = mbs_per_sbs[h];
    m.users_on_host = out.users_per_sbs[h];
    m.own_users = out.users_per_mbs[i];
    m.interference = interference_at(l.mbs[i], host[i], static_cast<int>(i), mbs_fields[i].s, mbs_fields[i].m, us, um);
    m.backhaul_delay =
        (m.mbs_on_host + phi * m.users_on_host) / capacity(m.distance, radio.power_static_w, m.interference, radio);
    m.eligible = m.own_users > 0;
    if (m.eligible) {
      m.violated = m.backhaul_delay * m.own_users > us * tau0;
      ++out.mbs_eligible;
      if (m.violated) ++out.mbs_violations;
    }
  }
  return out;
}

struct ConfidenceInterval {
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  bool valid() const { return std::isfinite(lo) && std::isfinite(hi); }
  bool contains(double v) const { return valid() && v >= lo && v <= hi; }
};

// Student-t interval for the mean of independent replication means.
inline ConfidenceInterval t_interval(const std::vector<double>& xs, double level = 0.95) {
  ConfidenceInterval ci;
  if (xs.size() < 2) return ci;
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - level)));
  ci.lo = mean - t * se;
  ci.hi = mean + t * se;
  return ci;
}

struct SimulationReport {
  double mean_delay_m = std::numeric_limits<double>::quiet_NaN();
  double mean_delay_s = std::numeric_limits<double>::quiet_NaN();
  ConfidenceInterval ci95_m, ci95_s;
  double empirical_violation = std::numeric_limits<double>::quiet_NaN();
  long samples_m = 0;
  long samples_s = 0;
  long mbs_samples = 0;
  double max_coupling_residual = 0.0;
  std::vector<ReplicationResult> per_replication;
  std::vector<std::string> warnings;
};

inline std::uint64_t replication_seed(std::uint64_t master, int rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(rep)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline SimulationReport measure_slot(const SlotState& st, const RadioParams& radio, const SimSettings& sim) {
  st.validate();
  radio.validate();
  sim.validate();
  SimulationReport rep;
  const double area = sim.window_side_m * sim.window_side_m;
  if (st.lambda_s * area < 200.0) rep.warnings.push_back("expected SBS count below 200; edge bias grows");
  if (st.lambda_m > 0.0 && st.lambda_m * area < 200.0)
    rep.warnings.push_back("expected MBS count below 200; edge bias grows");
  if (sim.replications < 2) rep.warnings.push_back("fewer than 2 replications; confidence intervals are undefined");

  rep.per_replication.resize(static_cast<std::size_t>(sim.replications));
  parallel_for(sim.replications, sim.jobs, [&](int r) {
    std::mt19937_64 rng(replication_seed(sim.rng_seed, r));
    Layout l = sample_layout(st, sim.window_side_m, rng);
    if (l.sbs.empty()) throw SimulationError("replication " + std::to_string(r) + " drew no SBS");
    auto res = measure_layout(l, st, radio, sim, rng);
    if (!sim.keep_samples) {
      res.users.clear();
      res.users.shrink_to_fit();
      res.mbs.clear();
      res.mbs.shrink_to_fit();
      res.users_per_sbs.clear();
      res.users_per_mbs.clear();
    }
    rep.per_replication[static_cast<std::size_t>(r)] = std::move(res);
  });

  std::vector<double> ms, ss;
  long viol = 0;
  for (const auto& r : rep.per_replication) {
    if (r.samples_m > 0) ms.push_back(r.mean_tau_m);
    if (r.samples_s > 0) ss.push_back(r.mean_tau_s);
    rep.samples_m += r.samples_m;
    rep.samples_s += r.samples_s;
    rep.mbs_samples += r.mbs_eligible;
    viol += r.mbs_violations;
    rep.max_coupling_residual = std::max(rep.max_coupling_residual, r.coupling_residual);
  }
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  rep.mean_delay_m = mean(ms);
  rep.mean_delay_s = mean(ss);
  rep.ci95_m = t_interval(ms);
  rep.ci95_s = t_interval(ss);
  if (rep.mbs_samples > 0) rep.empirical_violation = static_cast<double>(viol) / static_cast<double>(rep.mbs_samples);
  if (rep.max_coupling_residual > 1e-3)
    rep.warnings.push_back("utilization coupling residual " + std::to_string(rep.max_coupling_residual));
  return rep;
}

struct CampaignRow {
  SlotState st;
  SimulationReport sim;
  DelaySolution analytic;
  double analytic_violation = std::numeric_limits<double>::quiet_NaN();
  bool m_in_ci = false;
  bool s_in_ci = false;
};

inline std::vector<CampaignRow> run_campaign(const std::vector<SlotState>& setups, const RadioParams& radio,
                                             const SimSettings& sim, const FixedPointSettings& fp = {},
                                             const QuadratureSettings& q = {}) {
  if (setups.empty()) throw ValidationError("setups", "campaign needs at least one setup");
  std::vector<CampaignRow> rows;
  for (const auto& st : setups) {
    CampaignRow row;
    row.st = st;
    row.analytic = solve_delays(st, radio, fp, q);
    if (st.lambda_m > 0.0 && row.analytic.converged)
      row.analytic_violation = violation_probability({st, radio, row.analytic}, q);
    row.sim = measure_slot(st, radio, sim);
    row.m_in_ci = st.lambda_m > 0.0 ? row.sim.ci95_m.contains(row.analytic.tau_bar_m) : true;
    row.s_in_ci = row.sim.ci95_s.contains(row.analytic.tau_bar_s);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace movnet
