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

// Deployment-cost minimization over SBS densities, per-slot MBS densities and
// WPS weights: the penalized fitness and the three-step reuse heuristic
// (SBS-only bounds, per-region solutions, coupled refinement).

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "movnet/analytic.hpp"
#include "movnet/backhaul.hpp"
#include "movnet/error.hpp"
#include "movnet/metaheuristic.hpp"
#include "movnet/scenario.hpp"

namespace movnet {

inline constexpr double kNonConvergencePenalty = 1e6;

struct PenaltyWeights {
  double w_tau_m = 150.0;
  double w_tau_s = 100.0;
  double w_violation = 1000.0;
  double w_conservation = 1000.0;
  // The objective enters the fitness divided by this scale (BS count).
  double objective_scale = 1.0;

  void validate() const {
    for (double w : {w_tau_m, w_tau_s, w_violation, w_conservation})
      if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("penalty", "penalty weights must be nonnegative");
    if (!(objective_scale > 0.0)) throw ValidationError("objective_scale", "objective_scale must be positive");
  }
};

// Solver tolerances used inside fitness evaluations.
struct AnalyticSettings {
  FixedPointSettings fp{1e-6, 500, 1.0};
  QuadratureSettings q{1e-8, 1e-300, 4000, 6.0};
};

struct CellResult {
  DelaySolution delays;
  double violation = 0.0;
  bool converged = false;
  std::string error;
};

inline CellResult evaluate_cell(const SlotState& st, const RadioParams& radio, const AnalyticSettings& a) {
  CellResult c;
  try {
    c.delays = solve_delays(st, radio, a.fp, a.q);
    c.converged = c.delays.converged;
    if (c.converged && st.lambda_m > 0.0) c.violation = violation_probability({st, radio, c.delays}, a.q);
  } catch (const Error& e) {
    c.converged = false;
    c.error = e.what();
  }
  return c;
}

struct FitnessBreakdown {
  double cost = 0.0;  // mu M + sum_z lambda_s E_z, in BS counts
  double mbs_fleet = 0.0;
  double penalty_tau_m = 0.0;
  double penalty_tau_s = 0.0;
  double penalty_violation = 0.0;
  double penalty_conservation = 0.0;
  double penalty_nonconvergence = 0.0;
  double fitness = 0.0;
  bool feasible = false;
  std::vector<std::vector<CellResult>> cells;
};

namespace detail {

// Penalties of one cell; returns true when the cell meets every constraint.
inline bool add_cell_penalties(const CellResult& c, const SlotState& st, const RadioParams& radio,
                               const PenaltyWeights& w, FitnessBreakdown& b) {
  if (!c.converged) {
    b.penalty_nonconvergence += kNonConvergencePenalty;
    return false;
  }
  bool ok = true;
  if (st.lambda_m > 0.0) {
    const double em = std::max(0.0, c.delays.util_m - 1.0);
    b.penalty_tau_m += w.w_tau_m * em;
    const double ev = std::max(0.0, c.violation - radio.violation_target_delta);
    b.penalty_violation += w.w_violation * ev;
    ok = ok && em == 0.0 && ev == 0.0;
  }
  const double es = std::max(0.0, c.delays.util_s - 1.0);
  b.penalty_tau_s += w.w_tau_s * es;
  return ok && es == 0.0;
}

using CellKey = std::tuple<double, double, double, double>;

}  // namespace detail

// Full breakdown of the penalized objective. Cells with identical slot states
// are solved once.
inline FitnessBreakdown evaluate_configuration(const NetworkConfiguration& cfg, const Scenario& s,
                                               const PenaltyWeights& w, const AnalyticSettings& a = {}) {
  check_dimensions(cfg, s);
  w.validate();
  FitnessBreakdown b;
  const auto totals = mbs_slot_totals(cfg, s);
  b.mbs_fleet = std::accumulate(totals.begin(), totals.end(), 0.0) / static_cast<double>(totals.size());
  b.cost = s.mbs_relative_cost_mu * b.mbs_fleet;
  for (std::size_t z = 0; z < s.regions.size(); ++z) b.cost += cfg.sbs_density[z] * s.regions[z].area_m2;
  const double spread = mbs_conservation_spread(totals);
  b.penalty_conservation = w.w_conservation * spread;
  bool feasible = spread <= kConservationRelTol;

  std::map<detail::CellKey, CellResult> memo;
  b.cells.resize(s.regions.size());
  for (std::size_t z = 0; z < s.regions.size(); ++z) {
    for (int j = 0; j < s.num_slots_J; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const SlotState st{s.regions[z].user_density_per_slot[jj], cfg.mbs_density[z][jj], cfg.sbs_density[z],
                         cfg.wps_weight_phi[z][jj]};
      // phi is irrelevant without MBSs.
      const detail::CellKey key{st.lambda_u, st.lambda_m, st.lambda_s, st.lambda_m > 0.0 ? st.phi : 0.0};
      auto it = memo.find(key);
      if (it == memo.end()) it = memo.emplace(key, evaluate_cell(st, s.radio, a)).first;
      feasible = detail::add_cell_penalties(it->second, st, s.radio, w, b) && feasible;
      b.cells[z].push_back(it->second);
    }
  }
  b.fitness = b.cost / w.objective_scale + b.penalty_tau_m + b.penalty_tau_s + b.penalty_violation +
              b.penalty_conservation + b.penalty_nonconvergence;
  b.feasible = feasible;
  return b;
}

inline double penalized_fitness(const NetworkConfiguration& cfg, const Scenario& s, const PenaltyWeights& w,
                                 const AnalyticSettings& a = {}) {
  return evaluate_configuration(cfg, s, w, a).fitness;
}

struct OptimizerSettings {
  MetaheuristicSettings meta;
  PenaltyWeights weights;
  AnalyticSettings analytic;
  // Upper end of the SBS-only search, as a multiple of the peak user density.
  double density_ceiling_factor = 4.0;
  // Upper end of the MBS search, as a multiple of the SBS-only bound.
  double mbs_ceiling_factor = 4.0;
  double phi_min = 1e-3;
  double phi_max = 1e2;
  // Normalizes the objective by the all-static cost so the penalty weights
  // act on an objective of order one.
  bool auto_objective_scale = true;
  // Bisection on SBS densities toward the feasibility boundary.
  bool polish = true;

  void validate() const {
    meta.validate();
    weights.validate();
    if (!(density_ceiling_factor > 0.0))
      throw ValidationError("optimizer.density_ceiling_factor", "density_ceiling_factor must be positive");
    if (!(mbs_ceiling_factor >= 0.0))
      throw ValidationError("optimizer.mbs_ceiling_factor", "mbs_ceiling_factor must be nonnegative");
    if (!(phi_min > 0.0 && phi_max >= phi_min))
      throw ValidationError("optimizer.phi_min", "need 0 < phi_min <= phi_max");
  }
};

struct StepTraceRow {
  int step = 0;
  int region = -1;  // -1 for whole-scenario searches
  TraceRow row;
};

struct StaticBounds {
  std::vector<double> lambda_only_static;
  std::vector<MinimizeResult> runs;
};

struct RegionSolution {
  double lambda_s = 0.0;
  double lambda_m = 0.0;  // constant over slots inside one region
  std::vector<double> phi;
  double fitness = 0.0;
  bool feasible = false;
  MinimizeResult run;
};

struct OptimizationResult {
  NetworkConfiguration config;
  double cost = 0.0;
  double fitness = 0.0;
  bool feasible = false;
  std::vector<std::vector<DelaySolution>> per_slot_solutions;
  std::vector<std::vector<double>> violation_grid;
  double reuse_fraction = 0.0;
  // Saving in raw BS count, ignoring the MBS cost weight.
  double count_reuse_fraction = 0.0;
  double objective_scale = 1.0;
  double fitness_step1 = 0.0;
  double fitness_step2 = 0.0;
  // Final fitness after the best-of comparison.
  double fitness_step3 = 0.0;
  // Fitness of the coupled search output alone.
  double fitness_step3_search = 0.0;
  std::string selected;  // which candidate won the final comparison
  std::vector<double> lambda_only_static;
  double static_cost = 0.0;
  std::vector<StepTraceRow> trace;
};

namespace detail {

inline Scenario single_region(const Scenario& s, std::size_t z) {
  Scenario r = s;
  r.regions = {s.regions[z]};
  return r;
}

inline double log_map(double u, double lo, double hi) { return lo * std::pow(hi / lo, std::clamp(u, 0.0, 1.0)); }
inline double log_unmap(double x, double lo, double hi) {
  return hi > lo ? std::clamp(std::log(x / lo) / std::log(hi / lo), 0.0, 1.0) : 0.0;
}

// Smallest x in [lo, hi] with pred(x) true, assuming pred is monotone and
// pred(hi) holds. Bisection in log space to relative width rel.
template <class Pred>
double bisect_feasible(Pred&& pred, double lo, double hi, double rel = 1e-6) {
  if (pred(lo)) return lo;
  while (hi / lo - 1.0 > rel) {
    const double mid = std::sqrt(lo * hi);
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

inline void append_trace(std::vector<StepTraceRow>& out, int step, int region, const MinimizeResult& r) {
  for (const auto& row : r.trace) out.push_back({step, region, row});
}

inline NetworkConfiguration static_configuration(const Scenario& s, const std::vector<double>& lambda_s) {
  auto cfg = NetworkConfiguration::zeros(s.regions.size(), static_cast<std::size_t>(s.num_slots_J));
  cfg.sbs_density = lambda_s;
  return cfg;
}

}  // namespace detail

// Step 1: per region, the smallest SBS-only density meeting every slot.
inline StaticBounds step1_static_bounds(const Scenario& s, const OptimizerSettings& o,
                                        std::vector<StepTraceRow>* trace = nullptr) {
  s.validate();
  o.validate();
  StaticBounds out;
  for (std::size_t z = 0; z < s.regions.size(); ++z) {
    const Scenario sz = detail::single_region(s, z);
    const auto& users = sz.regions[0].user_density_per_slot;
    const double ceiling = o.density_ceiling_factor * *std::max_element(users.begin(), users.end());
    const double floor = ceiling * 1e-6;
    PenaltyWeights w = o.weights;
    w.objective_scale = sz.regions[0].area_m2 * ceiling;
    auto eval = [&](double lambda_s) {
      return evaluate_configuration(detail::static_configuration(sz, {lambda_s}), sz, w, o.analytic);
    };
    auto feasible = [&](double lambda_s) { return eval(lambda_s).feasible; };
    if (!feasible(ceiling))
      throw OptimizerError("region '" + sz.regions[0].name + "': no feasible SBS-only density below " +
                           std::to_string(ceiling) + " /m^2");

    // Worst-slot SBS delay must not increase with density on a coarse grid.
    double prev = std::numeric_limits<double>::infinity();
    double last_infeasible = floor;
    for (int g = 0; g < 8; ++g) {
      const double lam = detail::log_map(g / 7.0, floor, ceiling);
      const auto b = eval(lam);
      double worst = 0.0;
      for (const auto& c : b.cells[0])
        worst = std::max(worst, c.converged ? c.delays.tau_bar_s : std::numeric_limits<double>::infinity());
      if (std::isfinite(worst) && std::isfinite(prev) && worst > prev * (1.0 + 1e-9))
        throw OptimizerError("region '" + sz.regions[0].name +
                             "': SBS delay is not monotone in SBS density; bisection is unsafe");
      prev = worst;
      if (!b.feasible) last_infeasible = lam;
    }

    MetaheuristicSettings ms = o.meta;
    ms.rng_seed = o.meta.rng_seed + 1000003ULL * (z + 1);
    const Objective f = [&](const std::vector<double>& u) {
      const auto b = eval(detail::log_map(u[0], floor, ceiling));
      return Evaluation{b.fitness, b.feasible};
    };
    auto run = metaheuristic_minimize(f, {0.0}, {1.0}, ms);
    double best = detail::log_map(run.x[0], floor, ceiling);
    run.x = {best};
    if (o.polish) {
      const double hi = feasible(best) ? best : ceiling;
      const double lo = std::min(last_infeasible, hi);
      best = detail::bisect_feasible(feasible, lo, hi);
    } else if (!run.feasible) {
      best = ceiling;
    }
    if (trace) detail::append_trace(*trace, 1, static_cast<int>(z), run);
    out.lambda_only_static.push_back(best);
    out.runs.push_back(std::move(run));
  }
  return out;
}

// Step 2: each region on its own. Conservation inside a single region holds
// the MBS density constant across slots; SBS density stays at or below the
// SBS-only bound.
inline std::vector<RegionSolution> step2_per_region(const Scenario& s, const StaticBounds& bounds,
                                                    const OptimizerSettings& o, double objective_scale,
                                                    std::vector<StepTraceRow>* trace = nullptr) {
  o.validate();
  if (bounds.lambda_only_static.size() != s.regions.size())
    throw OptimizerError("step-1 bounds do not match the scenario");
  const int J = s.num_slots_J;
  std::vector<RegionSolution> out;
  for (std::size_t z = 0; z < s.regions.size(); ++z) {
    const Scenario sz = detail::single_region(s, z);
    const double ls_hi = bounds.lambda_only_static[z];
    const double ls_lo = 0.01 * ls_hi;
    const double lm_hi = o.mbs_ceiling_factor * ls_hi;
    PenaltyWeights w = o.weights;
    w.objective_scale = objective_scale;

    auto decode = [&](const std::vector<double>& u) {
      auto cfg = NetworkConfiguration::zeros(1, static_cast<std::size_t>(J));
      cfg.sbs_density[0] = ls_lo + u[0] * (ls_hi - ls_lo);
      const double lm = u[1] * lm_hi;
      for (int j = 0; j < J; ++j) {
        cfg.mbs_density[0][static_cast<std::size_t>(j)] = lm;
        cfg.wps_weight_phi[0][static_cast<std::size_t>(j)] =
            detail::log_map(u[2 + static_cast<std::size_t>(j)], o.phi_min, o.phi_max);
      }
      return cfg;
    };
    const Objective f = [&](const std::vector<double>& u) {
      const auto b = evaluate_configuration(decode(u), sz, w, o.analytic);
      return Evaluation{b.fitness, b.feasible};
    };
    const std::size_t dim = 2 + static_cast<std::size_t>(J);
    std::vector<double> seed(dim, detail::log_unmap(1.0, o.phi_min, o.phi_max));
    seed[0] = 1.0;
    seed[1] = 0.0;
    MetaheuristicSettings ms = o.meta;
    ms.rng_seed = o.meta.rng_seed + 2000003ULL * (z + 1);
    auto run = metaheuristic_minimize(f, std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0), ms, {seed});

    auto cfg = decode(run.x);
    auto best = evaluate_configuration(cfg, sz, w, o.analytic);
    if (o.polish && cfg.mbs_density[0][0] > 0.0) {
      auto with_ls = [&](double ls) {
        auto c = cfg;
        c.sbs_density[0] = ls;
        return c;
      };
      auto feasible = [&](double ls) { return evaluate_configuration(with_ls(ls), sz, w, o.analytic).feasible; };
      if (feasible(ls_hi)) {
        const auto c = with_ls(detail::bisect_feasible(feasible, ls_lo, ls_hi));
        const auto b = evaluate_configuration(c, sz, w, o.analytic);
        if (b.fitness < best.fitness) {
          cfg = c;
          best = b;
        }
      }
    }
    RegionSolution r;
    r.lambda_s = cfg.sbs_density[0];
    r.lambda_m = cfg.mbs_density[0][0];
    r.phi = cfg.wps_weight_phi[0];
    r.fitness = best.fitness;
    r.feasible = best.feasible;
    if (trace) detail::append_trace(*trace, 2, static_cast<int>(z), run);
    r.run = std::move(run);
    out.push_back(std::move(r));
  }
  return out;
}

inline NetworkConfiguration combine_region_solutions(const Scenario& s, const std::vector<RegionSolution>& sol) {
  auto cfg = NetworkConfiguration::zeros(s.regions.size(), static_cast<std::size_t>(s.num_slots_J));
  for (std::size_t z = 0; z < sol.size(); ++z) {
    cfg.sbs_density[z] = sol[z].lambda_s;
    std::fill(cfg.mbs_density[z].begin(), cfg.mbs_density[z].end(), sol[z].lambda_m);
    cfg.wps_weight_phi[z] = sol[z].phi;
  }
  return cfg;
}

// Rescales each slot's MBS densities so every slot total equals the
// across-slot mean, clipped to [0, cap[z]].
inline void project_conservation(NetworkConfiguration& cfg, const Scenario& s, const std::vector<double>& cap) {
  const auto totals = mbs_slot_totals(cfg, s);
  const double target = std::accumulate(totals.begin(), totals.end(), 0.0) / static_cast<double>(totals.size());
  for (std::size_t j = 0; j < totals.size(); ++j) {
    if (totals[j] > 0.0) {
      const double f = target / totals[j];
      for (std::size_t z = 0; z < cfg.mbs_density.size(); ++z)
        cfg.mbs_density[z][j] = std::min(cap[z], cfg.mbs_density[z][j] * f);
    } else if (target > 0.0) {
      double cap_total = 0.0;
      for (std::size_t z = 0; z < cap.size(); ++z) cap_total += cap[z] * s.regions[z].area_m2;
      for (std::size_t z = 0; z < cap.size(); ++z)
        cfg.mbs_density[z][j] = cap_total > 0.0 ? std::min(cap[z], cap[z] * target / cap_total) : 0.0;
    }
  }
}

// Step 3: the coupled problem over the reduced box around the step-2 point.
inline MinimizeResult step3_coupled(const Scenario& s, const std::vector<RegionSolution>& step2,
                                    const OptimizerSettings& o, double objective_scale,
                                    NetworkConfiguration* best_cfg, std::vector<StepTraceRow>* trace = nullptr) {
  o.validate();
  const std::size_t Z = s.regions.size();
  const auto J = static_cast<std::size_t>(s.num_slots_J);
  std::vector<double> cap(Z), ls_lo(Z), ls_hi(Z);
  for (std::size_t z = 0; z < Z; ++z) {
    cap[z] = step2[z].lambda_m;
    const double delta = step2[z].lambda_m;  // min over slots of a slot-constant density
    ls_lo[z] = step2[z].lambda_s;
    ls_hi[z] = step2[z].lambda_s + delta;
  }
  PenaltyWeights w = o.weights;
  w.objective_scale = objective_scale;
  const std::size_t per = 1 + 2 * J;
  auto decode = [&](const std::vector<double>& u) {
    auto cfg = NetworkConfiguration::zeros(Z, J);
    for (std::size_t z = 0; z < Z; ++z) {
      const double* v = &u[z * per];
      cfg.sbs_density[z] = ls_lo[z] + v[0] * (ls_hi[z] - ls_lo[z]);
      for (std::size_t j = 0; j < J; ++j) {
        cfg.mbs_density[z][j] = v[1 + j] * cap[z];
        cfg.wps_weight_phi[z][j] = detail::log_map(v[1 + J + j], o.phi_min, o.phi_max);
      }
    }
    project_conservation(cfg, s, cap);
    return cfg;
  };
  std::vector<double> seed(Z * per);
  for (std::size_t z = 0; z < Z; ++z) {
    seed[z * per] = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      seed[z * per + 1 + j] = cap[z] > 0.0 ? 1.0 : 0.0;
      seed[z * per + 1 + J + j] = detail::log_unmap(step2[z].phi[j], o.phi_min, o.phi_max);
    }
  }
  const Objective f = [&](const std::vector<double>& u) {
    const auto b = evaluate_configuration(decode(u), s, w, o.analytic);
    return Evaluation{b.fitness, b.feasible};
  };
  MetaheuristicSettings ms = o.meta;
  ms.rng_seed = o.meta.rng_seed + 3000017ULL;
  auto run = metaheuristic_minimize(f, std::vector<double>(seed.size(), 0.0), std::vector<double>(seed.size(), 1.0),
                                    ms, {seed});
  auto cfg = decode(run.x);
  auto best = evaluate_configuration(cfg, s, w, o.analytic);
  if (o.polish) {
    // SBS densities do not enter conservation, so each region is polished
    // on its own cells.
    for (std::size_t z = 0; z < Z; ++z) {
      if (!(ls_hi[z] > ls_lo[z])) continue;
      const Scenario sz = detail::single_region(s, z);
      auto region_cfg = [&](double ls) {
        auto c = NetworkConfiguration::zeros(1, J);
        c.sbs_density[0] = ls;
        c.mbs_density[0] = cfg.mbs_density[z];
        c.wps_weight_phi[0] = cfg.wps_weight_phi[z];
        return c;
      };
      PenaltyWeights wz = w;
      wz.w_conservation = 0.0;
      auto feasible = [&](double ls) { return evaluate_configuration(region_cfg(ls), sz, wz, o.analytic).feasible; };
      if (!feasible(ls_hi[z])) continue;
      auto c = cfg;
      c.sbs_density[z] = detail::bisect_feasible(feasible, ls_lo[z], ls_hi[z]);
      const auto b = evaluate_configuration(c, s, w, o.analytic);
      if (b.fitness < best.fitness) {
        cfg = c;
        best = b;
      }
    }
  }
  run.fitness = best.fitness;
  run.feasible = best.feasible;
  if (best_cfg) *best_cfg = cfg;
  if (trace) detail::append_trace(*trace, 3, -1, run);
  return run;
}

inline OptimizationResult optimize_deployment(const Scenario& s, const OptimizerSettings& o = {}) {
  s.validate();
  o.validate();
  OptimizationResult res;
  StaticBounds bounds;
  try {
    bounds = step1_static_bounds(s, o, &res.trace);
  } catch (const Error& e) {
    throw OptimizerError(std::string("step 1: ") + e.what());
  }
  res.lambda_only_static = bounds.lambda_only_static;
  const auto static_cfg = detail::static_configuration(s, bounds.lambda_only_static);
  for (std::size_t z = 0; z < s.regions.size(); ++z)
    res.static_cost += bounds.lambda_only_static[z] * s.regions[z].area_m2;
  res.objective_scale = o.auto_objective_scale ? res.static_cost : o.weights.objective_scale;
  PenaltyWeights w = o.weights;
  w.objective_scale = res.objective_scale;

  const auto static_eval = evaluate_configuration(static_cfg, s, w, o.analytic);
  res.fitness_step1 = static_eval.fitness;

  std::vector<RegionSolution> step2;
  try {
    step2 = step2_per_region(s, bounds, o, res.objective_scale, &res.trace);
  } catch (const Error& e) {
    throw OptimizerError(std::string("step 2: ") + e.what());
  }
  const auto step2_cfg = combine_region_solutions(s, step2);
  const auto step2_eval = evaluate_configuration(step2_cfg, s, w, o.analytic);
  res.fitness_step2 = step2_eval.fitness;

  NetworkConfiguration step3_cfg;
  try {
    (void)step3_coupled(s, step2, o, res.objective_scale, &step3_cfg, &res.trace);
  } catch (const Error& e) {
    throw OptimizerError(std::string("step 3: ") + e.what());
  }
  auto step3_eval = evaluate_configuration(step3_cfg, s, w, o.analytic);
  res.fitness_step3_search = step3_eval.fitness;

  // Keep the incumbent if the coupled search did not improve on it.
  NetworkConfiguration final_cfg = step3_cfg;
  FitnessBreakdown final_eval = step3_eval;
  res.selected = "step3";
  if (step2_eval.fitness < final_eval.fitness) {
    final_cfg = step2_cfg;
    final_eval = step2_eval;
    res.selected = "step2";
  }
  if (static_eval.fitness < final_eval.fitness) {
    final_cfg = static_cfg;
    final_eval = static_eval;
    res.selected = "step1";
  }
  res.fitness_step3 = final_eval.fitness;
  res.config = final_cfg;
  res.cost = final_eval.cost;
  res.fitness = final_eval.fitness;
  res.feasible = final_eval.feasible;
  for (const auto& row : final_eval.cells) {
    std::vector<DelaySolution> d;
    std::vector<double> v;
    for (const auto& c : row) {
      d.push_back(c.delays);
      v.push_back(c.violation);
    }
    res.per_slot_solutions.push_back(std::move(d));
    res.violation_grid.push_back(std::move(v));
  }
  res.reuse_fraction = res.static_cost > 0.0 ? std::clamp(1.0 - res.cost / res.static_cost, 0.0, 1.0) : 0.0;
  double count = final_eval.mbs_fleet;
  for (std::size_t z = 0; z < s.regions.size(); ++z) count += final_cfg.sbs_density[z] * s.regions[z].area_m2;
  res.count_reuse_fraction = res.static_cost > 0.0 ? 1.0 - count / res.static_cost : 0.0;
  return res;
}

// MBS fleet as a fraction of the total BS count.
inline double mbs_share(const NetworkConfiguration& cfg, const Scenario& s) {
  const auto totals = mbs_slot_totals(cfg, s);
  const double m = std::accumulate(totals.begin(), totals.end(), 0.0) / static_cast<double>(totals.size());
  double n = m;
  for (std::size_t z = 0; z < s.regions.size(); ++z) n += cfg.sbs_density[z] * s.regions[z].area_m2;
  return n > 0.0 ? m / n : 0.0;
}

// Reads the optional "optimizer" block of a scenario file.
inline OptimizerSettings optimizer_settings_from_json(const json& j) {
  OptimizerSettings o;
  if (!j.is_object()) throw ValidationError("optimizer", "optimizer must be an object");
  const std::string p = "optimizer.";
  using detail::get_field_or;
  o.meta.population = get_field_or(j, "population", p, o.meta.population);
  o.meta.stall_window = get_field_or(j, "stall_window", p, o.meta.stall_window);
  o.meta.stall_tol = get_field_or(j, "stall_tol", p, o.meta.stall_tol);
  o.meta.max_iters = get_field_or(j, "max_iters", p, o.meta.max_iters);
  o.meta.rng_seed = get_field_or<std::uint64_t>(j, "rng_seed", p, o.meta.rng_seed);
  const auto algo = get_field_or<std::string>(j, "algorithm", p, "hippopotamus");
  if (algo == "hippopotamus") {
    o.meta.algorithm = Algorithm::hippopotamus;
  } else if (algo == "genetic") {
    o.meta.algorithm = Algorithm::genetic;
  } else {
    throw ValidationError(p + "algorithm", "algorithm must be 'hippopotamus' or 'genetic'");
  }
  o.weights.w_tau_m = get_field_or(j, "w_tau_m", p, o.weights.w_tau_m);
  o.weights.w_tau_s = get_field_or(j, "w_tau_s", p, o.weights.w_tau_s);
  o.weights.w_violation = get_field_or(j, "w_violation", p, o.weights.w_violation);
  o.weights.w_conservation = get_field_or(j, "w_conservation", p, o.weights.w_conservation);
  o.density_ceiling_factor = get_field_or(j, "density_ceiling_factor", p, o.density_ceiling_factor);
  o.mbs_ceiling_factor = get_field_or(j, "mbs_ceiling_factor", p, o.mbs_ceiling_factor);
  o.phi_min = get_field_or(j, "phi_min", p, o.phi_min);
  o.phi_max = get_field_or(j, "phi_max", p, o.phi_max);
  o.auto_objective_scale = get_field_or(j, "auto_objective_scale", p, o.auto_objective_scale);
  o.polish = get_field_or(j, "polish", p, o.polish);
  o.analytic.fp.rel_tol = get_field_or(j, "fixed_point_rel_tol", p, o.analytic.fp.rel_tol);
  o.analytic.q.rel_tol = get_field_or(j, "quadrature_rel_tol", p, o.analytic.q.rel_tol);
  o.validate();
  return o;
}

}  // namespace movnet
