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

// Command-line front end: evaluate, simulate, optimize and sweep. Every
// output file carries the manifest hash and seed.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "movnet/analytic.hpp"
#include "movnet/backhaul.hpp"
#include "movnet/error.hpp"
#include "movnet/optimizer.hpp"
#include "movnet/parallel.hpp"
#include "movnet/scenario.hpp"
#include "movnet/simulator.hpp"

namespace movnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Path-loss exponents below this value make interference sums slow to
// converge; evaluate flags them in its summary.
inline constexpr double kNearDivergentAlpha = 2.2;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunManifest {
  std::string command;
  std::string scenario_path;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::pair<std::string, std::vector<std::string>>> grid;
  std::optional<int> replications;
  std::optional<std::string> mode;
  std::string task = "optimize";
  int jobs = 1;
};

inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::string manifest_hash(const RunManifest& m, const json& doc) {
  json j{{"command", m.command}, {"scenario", doc}, {"seed", m.seed}, {"overrides", m.overrides},
         {"grid", m.grid},       {"task", m.task}};
  if (m.replications) j["replications"] = *m.replications;
  if (m.mode) j["mode"] = *m.mode;
  return hex64(fnv1a(j.dump()));
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

inline std::pair<std::string, std::string> split_assignment(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + kv + "'");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

// Keys a block may gain through an override even when the file omits them.
inline const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"", {"num_slots", "mbs_relative_cost_mu"}},
      {"radio",
       {"bandwidth_hz", "reuse_factor_k", "path_loss_alpha", "noise_psd_w_per_hz", "noise_psd_dbm_per_hz",
        "power_static_w", "power_mobile_w", "target_delay_tau0_s", "violation_target_delta", "demand_delay_form"}},
      {"commuting", {"total_area_m2", "area_ratio_gamma", "mean_density", "peak_to_trough", "residential_peak_slot"}},
      {"optimizer",
       {"population", "stall_window", "stall_tol", "max_iters", "rng_seed", "algorithm", "w_tau_m", "w_tau_s",
        "w_violation", "w_conservation", "density_ceiling_factor", "mbs_ceiling_factor", "phi_min", "phi_max",
        "auto_objective_scale", "polish", "fixed_point_rel_tol", "quadrature_rel_tol"}},
      {"simulator",
       {"window_side_m", "replications", "utilization_coupling_iters", "mode", "max_user_samples",
        "include_far_field"}}};
  return keys;
}

inline json parse_value(const std::string& v) {
  try {
    return json::parse(v);
  } catch (const json::parse_error&) {
    return json(v);
  }
}

}  // namespace detail

// Sets a dotted key path (array indices as numbers) in a scenario document.
// The target must exist, or be a known key of an existing block.
inline void apply_override(json& doc, const std::string& key, const std::string& value) {
  const auto parts = detail::split(key, '.');
  json* node = &doc;
  std::string parent;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const auto& p = parts[i];
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(p);
      } catch (const std::exception&) {
        throw ValidationError(key, "unknown override key '" + key + "'");
      }
      if (idx >= node->size()) throw ValidationError(key, "unknown override key '" + key + "'");
      node = &(*node)[idx];
    } else if (node->is_object() && node->contains(p)) {
      node = &(*node)[p];
    } else {
      throw ValidationError(key, "unknown override key '" + key + "'");
    }
    parent = parent.empty() ? p : parent + "." + p;
  }
  const auto& leaf = parts.back();
  if (node->is_array()) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(leaf);
    } catch (const std::exception&) {
      throw ValidationError(key, "unknown override key '" + key + "'");
    }
    if (idx >= node->size()) throw ValidationError(key, "unknown override key '" + key + "'");
    (*node)[idx] = detail::parse_value(value);
    return;
  }
  if (!node->is_object()) throw ValidationError(key, "unknown override key '" + key + "'");
  if (!node->contains(leaf)) {
    const auto& known = detail::known_keys();
    const auto it = known.find(parent);
    if (it == known.end() || std::find(it->second.begin(), it->second.end(), leaf) == it->second.end())
      throw ValidationError(key, "unknown override key '" + key + "'");
  }
  (*node)[leaf] = detail::parse_value(value);
}

inline SimSettings sim_settings_from_json(const json& j) {
  SimSettings s;
  if (!j.is_object()) throw ValidationError("simulator", "simulator must be an object");
  const std::string p = "simulator.";
  using movnet::detail::get_field_or;
  s.window_side_m = get_field_or(j, "window_side_m", p, s.window_side_m);
  s.replications = get_field_or(j, "replications", p, s.replications);
  s.utilization_coupling_iters = get_field_or(j, "utilization_coupling_iters", p, s.utilization_coupling_iters);
  s.max_user_samples = get_field_or(j, "max_user_samples", p, s.max_user_samples);
  s.include_far_field = get_field_or(j, "include_far_field", p, s.include_far_field);
  const auto mode = get_field_or<std::string>(j, "mode", p, "expected");
  if (mode == "expected") {
    s.mode = InterferenceMode::expected;
  } else if (mode == "bernoulli") {
    s.mode = InterferenceMode::bernoulli;
  } else {
    throw ValidationError(p + "mode", "mode must be 'expected' or 'bernoulli'");
  }
  return s;
}

// A scenario document after overrides, with its parsed forms.
struct Study {
  json doc;
  Scenario scenario;
  std::optional<NetworkConfiguration> network;
  std::string manifest;
};

inline json load_document(const RunManifest& m) {
  if (m.scenario_path.empty()) throw UsageError("--scenario is required");
  if (!std::filesystem::exists(m.scenario_path)) throw UsageError("scenario not found: " + m.scenario_path);
  json doc = read_json_file(m.scenario_path);
  try {
    for (const auto& [k, v] : m.overrides) apply_override(doc, k, v);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  return doc;
}

inline Study make_study(const RunManifest& m, json doc) {
  Study st;
  st.scenario = scenario_from_json(doc);
  if (doc.contains("network")) st.network = configuration_from_json(doc.at("network"), st.scenario);
  st.manifest = manifest_hash(m, doc);
  st.doc = std::move(doc);
  return st;
}

inline std::string csv_provenance(const Study& st, const RunManifest& m) {
  return "# manifest=" + st.manifest + " seed=" + std::to_string(m.seed) + "\n";
}

inline void stamp(json& j, const Study& st, const RunManifest& m) {
  j["manifest"] = st.manifest;
  j["seed"] = m.seed;
  j["command"] = m.command;
}

inline std::filesystem::path prepare_output(const RunManifest& m) {
  std::filesystem::path out(m.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (!std::filesystem::is_directory(out)) throw UsageError("output directory not writable: " + m.output_dir);
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
  if (!os) throw Error("cannot write " + path.string());
}

inline std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

inline std::vector<std::string> scenario_warnings(const Scenario& s) {
  std::vector<std::string> w;
  if (s.radio.path_loss_alpha < kNearDivergentAlpha)
    w.push_back("path_loss_alpha " + fmt(s.radio.path_loss_alpha) + " is near 2; interference is near divergence");
  return w;
}

inline SlotState cell_state(const Scenario& s, const NetworkConfiguration& cfg, std::size_t z, std::size_t j) {
  return {s.regions[z].user_density_per_slot[j], cfg.mbs_density[z][j], cfg.sbs_density[z],
          cfg.wps_weight_phi[z][j]};
}

struct CellRow {
  std::size_t region = 0;
  std::size_t slot = 0;
  SlotState st;
  DelaySolution d;
  double violation = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
};

inline std::vector<CellRow> evaluate_cells(const Scenario& s, const NetworkConfiguration& cfg) {
  check_dimensions(cfg, s);
  validate_configuration(cfg, s);
  std::vector<CellRow> rows;
  for (std::size_t z = 0; z < s.regions.size(); ++z) {
    for (std::size_t j = 0; j < static_cast<std::size_t>(s.num_slots_J); ++j) {
      CellRow r;
      r.region = z;
      r.slot = j;
      r.st = cell_state(s, cfg, z, j);
      r.d = solve_delays(r.st, s.radio);
      if (r.st.lambda_m > 0.0 && r.d.converged) r.violation = violation_probability({r.st, s.radio, r.d});
      const bool v_ok = !(r.st.lambda_m > 0.0) || r.violation <= s.radio.violation_target_delta;
      r.feasible = r.d.converged && r.d.qos_feasible() && v_ok;
      rows.push_back(r);
    }
  }
  return rows;
}

inline const char* kDelaysHeader =
    "region,slot,lambda_u,lambda_m,lambda_s,phi,tau_bar_m,tau_bar_s,util_m,util_s,violation,feasible,converged\n";

inline int cmd_evaluate(const RunManifest& m, std::ostream& err) {
  const Study st = make_study(m, load_document(m));
  if (!st.network) throw ValidationError("network", "evaluate needs a 'network' block in the scenario");
  const auto out = prepare_output(m);
  const auto rows = evaluate_cells(st.scenario, *st.network);
  auto warnings = scenario_warnings(st.scenario);
  std::ostringstream csv;
  csv << csv_provenance(st, m) << kDelaysHeader;
  json cells = json::array();
  bool all_feasible = true;
  for (const auto& r : rows) {
    const auto& name = st.scenario.regions[r.region].name;
    csv << name << ',' << r.slot << ',' << fmt(r.st.lambda_u) << ',' << fmt(r.st.lambda_m) << ','
        << fmt(r.st.lambda_s) << ',' << fmt(r.st.phi) << ',' << fmt(r.d.tau_bar_m) << ',' << fmt(r.d.tau_bar_s)
        << ',' << fmt(r.d.util_m) << ',' << fmt(r.d.util_s) << ',' << fmt(r.violation) << ','
        << (r.feasible ? "true" : "false") << ',' << (r.d.converged ? "true" : "false") << '\n';
    all_feasible = all_feasible && r.feasible;
    if (r.d.sparse_users)
      warnings.push_back("region " + name + " slot " + std::to_string(r.slot) +
                         ": fewer users than BSs; the truncated-Poisson load factor applies");
    cells.push_back({{"region", name},
                     {"slot", r.slot},
                     {"tau_bar_m", r.d.tau_bar_m},
                     {"tau_bar_s", r.d.tau_bar_s},
                     {"violation", std::isfinite(r.violation) ? json(r.violation) : json(nullptr)},
                     {"feasible", r.feasible},
                     {"iterations", r.d.iterations},
                     {"residual", r.d.residual}});
  }
  write_text(out / "delays.csv", csv.str());
  json summary{{"cells", cells},
               {"all_feasible", all_feasible},
               {"near_divergent_interference", st.scenario.radio.path_loss_alpha < kNearDivergentAlpha},
               {"warnings", warnings}};
  stamp(summary, st, m);
  write_text(out / "summary.json", summary.dump(2) + "\n");
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return kExitOk;
}

inline const char* kSimHeader =
    "region,slot,replications,analytic_tau_m,sim_tau_m,ci95_m_lo,ci95_m_hi,m_within_ci,analytic_tau_s,sim_tau_s,"
    "ci95_s_lo,ci95_s_hi,s_within_ci,analytic_violation,empirical_violation,mbs_samples\n";

inline int cmd_simulate(const RunManifest& m, std::ostream& err) {
  const Study st = make_study(m, load_document(m));
  if (!st.network) throw ValidationError("network", "simulate needs a 'network' block in the scenario");
  SimSettings sim = st.doc.contains("simulator") ? sim_settings_from_json(st.doc.at("simulator")) : SimSettings{};
  if (m.replications) sim.replications = *m.replications;
  if (m.mode) {
    if (*m.mode == "expected") {
      sim.mode = InterferenceMode::expected;
    } else if (*m.mode == "bernoulli") {
      sim.mode = InterferenceMode::bernoulli;
    } else {
      throw UsageError("--mode must be 'expected' or 'bernoulli'");
    }
  }
  sim.jobs = m.jobs;
  sim.validate();
  const auto out = prepare_output(m);
  const auto cells = evaluate_cells(st.scenario, *st.network);
  auto warnings = scenario_warnings(st.scenario);
  std::ostringstream csv;
  csv << csv_provenance(st, m) << kSimHeader;
  auto flag = [](const ConfidenceInterval& ci, double v) -> std::string {
    if (!ci.valid()) return "";
    return ci.contains(v) ? "true" : "false";
  };
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    SimSettings cs = sim;
    cs.rng_seed = replication_seed(m.seed, static_cast<int>(c));
    const auto rep = measure_slot(cell.st, st.scenario.radio, cs);
    const auto& name = st.scenario.regions[cell.region].name;
    for (const auto& w : rep.warnings) warnings.push_back(name + " slot " + std::to_string(cell.slot) + ": " + w);
    const bool has_m = cell.st.lambda_m > 0.0;
    csv << name << ',' << cell.slot << ',' << cs.replications << ',' << (has_m ? fmt(cell.d.tau_bar_m) : "")
        << ',' << fmt(rep.mean_delay_m) << ',' << fmt(rep.ci95_m.lo) << ',' << fmt(rep.ci95_m.hi) << ','
        << (has_m ? flag(rep.ci95_m, cell.d.tau_bar_m) : "") << ',' << fmt(cell.d.tau_bar_s) << ','
        << fmt(rep.mean_delay_s) << ',' << fmt(rep.ci95_s.lo) << ',' << fmt(rep.ci95_s.hi) << ','
        << flag(rep.ci95_s, cell.d.tau_bar_s) << ',' << fmt(cell.violation) << ',' << fmt(rep.empirical_violation)
        << ',' << rep.mbs_samples << '\n';
  }
  write_text(out / "sim_report.csv", csv.str());
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return kExitOk;
}

inline OptimizerSettings optimizer_settings(const Study& st, const RunManifest& m) {
  OptimizerSettings o =
      st.doc.contains("optimizer") ? optimizer_settings_from_json(st.doc.at("optimizer")) : OptimizerSettings{};
  o.meta.rng_seed = m.seed;
  return o;
}

inline json optimization_summary(const OptimizationResult& r, const Scenario& s) {
  json cells = json::array();
  for (std::size_t z = 0; z < r.per_slot_solutions.size(); ++z) {
    for (std::size_t j = 0; j < r.per_slot_solutions[z].size(); ++j) {
      const auto& d = r.per_slot_solutions[z][j];
      const double v = r.violation_grid[z][j];
      const bool has_m = r.config.mbs_density[z][j] > 0.0;
      cells.push_back({{"region", s.regions[z].name},
                       {"slot", j},
                       {"tau_bar_m", d.tau_bar_m},
                       {"tau_bar_s", d.tau_bar_s},
                       {"violation", v},
                       {"feasible", d.converged && d.qos_feasible() &&
                                        (!has_m || v <= s.radio.violation_target_delta)}});
    }
  }
  return json{{"cost", r.cost},
              {"fitness", r.fitness},
              {"feasible", r.feasible},
              {"reuse_fraction", r.reuse_fraction},
              {"count_reuse_fraction", r.count_reuse_fraction},
              {"mbs_share", mbs_share(r.config, s)},
              {"static_cost", r.static_cost},
              {"lambda_only_static", r.lambda_only_static},
              {"fitness_step1", r.fitness_step1},
              {"fitness_step2", r.fitness_step2},
              {"fitness_step3", r.fitness_step3},
              {"fitness_step3_search", r.fitness_step3_search},
              {"selected", r.selected},
              {"objective_scale", r.objective_scale},
              {"cells", cells}};
}

inline int cmd_optimize(const RunManifest& m, std::ostream& err) {
  const Study st = make_study(m, load_document(m));
  auto o = optimizer_settings(st, m);
  o.meta.jobs = m.jobs;
  const auto out = prepare_output(m);
  const auto r = optimize_deployment(st.scenario, o);
  json cfg = to_json(r.config);
  stamp(cfg, st, m);
  write_text(out / "config.json", cfg.dump(2) + "\n");
  std::ostringstream csv;
  csv << csv_provenance(st, m) << "step,region,iteration,best_fitness,feasible_count\n";
  for (const auto& t : r.trace)
    csv << t.step << ',' << (t.region < 0 ? std::string() : st.scenario.regions[static_cast<std::size_t>(t.region)].name)
        << ',' << t.row.iteration << ',' << fmt(t.row.best_fitness) << ',' << t.row.feasible_count << '\n';
  write_text(out / "trace.csv", csv.str());
  json summary = optimization_summary(r, st.scenario);
  auto warnings = scenario_warnings(st.scenario);
  summary["warnings"] = warnings;
  stamp(summary, st, m);
  write_text(out / "summary.json", summary.dump(2) + "\n");
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return kExitOk;
}

// One long-format measurement.
struct SweepRecord {
  std::string region;
  std::string slot;
  std::string metric;
  double value = 0.0;
};

inline std::vector<SweepRecord> sweep_point(const RunManifest& m, const Study& st) {
  std::vector<SweepRecord> rec;
  const auto& s = st.scenario;
  if (m.task == "evaluate") {
    if (!st.network) throw ValidationError("network", "evaluate sweeps need a 'network' block");
    for (const auto& c : evaluate_cells(s, *st.network)) {
      const auto& name = s.regions[c.region].name;
      const auto slot = std::to_string(c.slot);
      rec.push_back({name, slot, "tau_bar_m", c.d.tau_bar_m});
      rec.push_back({name, slot, "tau_bar_s", c.d.tau_bar_s});
      rec.push_back({name, slot, "violation", c.violation});
      rec.push_back({name, slot, "feasible", c.feasible ? 1.0 : 0.0});
    }
    return rec;
  }
  auto o = optimizer_settings(st, m);
  const auto r = optimize_deployment(s, o);
  rec.push_back({"", "", "cost", r.cost});
  rec.push_back({"", "", "reuse_fraction", r.reuse_fraction});
  rec.push_back({"", "", "count_reuse_fraction", r.count_reuse_fraction});
  rec.push_back({"", "", "mbs_share", mbs_share(r.config, s)});
  rec.push_back({"", "", "feasible", r.feasible ? 1.0 : 0.0});
  for (std::size_t z = 0; z < s.regions.size(); ++z) {
    const auto& name = s.regions[z].name;
    rec.push_back({name, "", "lambda_s", r.config.sbs_density[z]});
    rec.push_back({name, "", "lambda_only_static", r.lambda_only_static[z]});
    for (std::size_t j = 0; j < r.config.mbs_density[z].size(); ++j)
      rec.push_back({name, std::to_string(j), "lambda_m", r.config.mbs_density[z][j]});
  }
  return rec;
}

inline int cmd_sweep(const RunManifest& m, std::ostream& err) {
  if (m.grid.empty()) throw UsageError("empty sweep grid: pass at least one --grid key=v1,v2,...");
  for (const auto& [k, vs] : m.grid)
    if (vs.empty()) throw UsageError("empty sweep grid for key '" + k + "'");
  if (m.task != "evaluate" && m.task != "optimize") throw UsageError("--task must be 'evaluate' or 'optimize'");
  const json base = load_document(m);
  const Study base_study = make_study(m, base);

  // Cross product, last key fastest.
  std::vector<std::vector<std::size_t>> points{{}};
  for (const auto& g : m.grid) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& p : points) {
      for (std::size_t i = 0; i < g.second.size(); ++i) {
        auto q = p;
        q.push_back(i);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  std::vector<Study> studies;
  for (const auto& p : points) {
    json doc = base;
    try {
      for (std::size_t k = 0; k < m.grid.size(); ++k) apply_override(doc, m.grid[k].first, m.grid[k].second[p[k]]);
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    studies.push_back(make_study(m, std::move(doc)));
  }
  const auto out = prepare_output(m);
  std::vector<std::vector<SweepRecord>> results(points.size());
  parallel_for(static_cast<int>(points.size()), m.jobs,
               [&](int i) { results[static_cast<std::size_t>(i)] = sweep_point(m, studies[static_cast<std::size_t>(i)]); });

  std::ostringstream csv;
  csv << csv_provenance(base_study, m) << "point";
  for (const auto& g : m.grid) csv << ',' << g.first;
  csv << ",region,slot,metric,value\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (const auto& r : results[i]) {
      csv << i;
      for (std::size_t k = 0; k < m.grid.size(); ++k) csv << ',' << m.grid[k].second[points[i][k]];
      csv << ',' << r.region << ',' << r.slot << ',' << r.metric << ',' << fmt(r.value) << '\n';
    }
  }
  write_text(out / "sweep.csv", csv.str());
  for (const auto& w : scenario_warnings(base_study.scenario)) err << "warning: " << w << '\n';
  return kExitOk;
}

inline int run(const RunManifest& m, std::ostream& err) {
  try {
    if (m.jobs < 1) throw UsageError("--jobs must be positive");
    if (m.command == "evaluate") return cmd_evaluate(m, err);
    if (m.command == "simulate") return cmd_simulate(m, err);
    if (m.command == "optimize") return cmd_optimize(m, err);
    if (m.command == "sweep") return cmd_sweep(m, err);
    throw UsageError("unknown command '" + m.command + "'");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

inline int main(int argc, char** argv) {
  CLI::App app{"movnet: mixed static and moving base station planning"};
  app.require_subcommand(1);
  RunManifest m;
  std::vector<std::string> sets, grids;
  int replications = 0;
  std::string mode;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", m.scenario_path, "Scenario JSON file")->required();
    sub->add_option("--out", m.output_dir, "Output directory");
    sub->add_option("--seed", m.seed, "Master seed");
    sub->add_option("--jobs", m.jobs, "Worker threads");
    sub->add_option("--set", sets, "Override key=value (repeatable)");
  };
  auto* ev = app.add_subcommand("evaluate", "Analytic delays and violation probabilities");
  common(ev);
  auto* si = app.add_subcommand("simulate", "Monte-Carlo check of the analytic model");
  common(si);
  si->add_option("--replications", replications, "Independent replications");
  si->add_option("--mode", mode, "Interference mode")->check(CLI::IsMember({"expected", "bernoulli"}));
  auto* op = app.add_subcommand("optimize", "Deployment-cost minimization");
  common(op);
  auto* sw = app.add_subcommand("sweep", "Cross-product parameter sweep");
  common(sw);
  sw->add_option("--grid", grids, "Sweep axis key=v1,v2,... (repeatable)");
  sw->add_option("--task", m.task, "evaluate or optimize")->check(CLI::IsMember({"evaluate", "optimize"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  try {
    for (const auto& s : sets) m.overrides.push_back(detail::split_assignment(s));
    for (const auto& g : grids) {
      auto [k, v] = detail::split_assignment(g);
      std::vector<std::string> values;
      for (auto& x : detail::split(v, ','))
        if (!x.empty()) values.push_back(x);
      m.grid.emplace_back(k, std::move(values));
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  m.command = app.get_subcommands().front()->get_name();
  if (replications > 0) m.replications = replications;
  if (!mode.empty()) m.mode = mode;
  return run(m, std::cerr);
}

}  // namespace movnet::cli
