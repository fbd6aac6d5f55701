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

// Box-constrained population metaheuristics. The search runs in the unit
// cube; callers see their own coordinates. Candidates of each phase are drawn
// before any of them is evaluated, so results depend only on the seed and not
// on the number of worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "movnet/error.hpp"
#include "movnet/parallel.hpp"

namespace movnet {

enum class Algorithm { hippopotamus, genetic };

struct MetaheuristicSettings {
  int population = 70;
  int stall_window = 30;
  double stall_tol = 1e-8;
  int max_iters = 200;
  std::uint64_t rng_seed = 1;
  Algorithm algorithm = Algorithm::hippopotamus;
  int jobs = 1;

  void validate() const {
    if (population < 4) throw ValidationError("optimizer.population", "population must be at least 4");
    if (stall_window < 1) throw ValidationError("optimizer.stall_window", "stall_window must be positive");
    if (!(stall_tol > 0.0)) throw ValidationError("optimizer.stall_tol", "stall_tol must be positive");
    if (max_iters < 1) throw ValidationError("optimizer.max_iters", "max_iters must be positive");
    if (jobs < 1) throw ValidationError("optimizer.jobs", "jobs must be positive");
  }
};

struct Evaluation {
  double fitness = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

struct TraceRow {
  int iteration = 0;
  double best_fitness = 0.0;
  int feasible_count = 0;
};

struct MinimizeResult {
  std::vector<double> x;
  double fitness = std::numeric_limits<double>::infinity();
  bool feasible = false;
  int iterations = 0;
  long evaluations = 0;
  bool stalled = false;
  std::vector<TraceRow> trace;
};

using Objective = std::function<Evaluation(const std::vector<double>&)>;

namespace detail {

class UnitBox {
 public:
  UnitBox(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.empty() || lo_.size() != hi_.size()) throw OptimizerError("bounds must be nonempty and of equal length");
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]) || lo_[i] > hi_[i])
        throw OptimizerError("degenerate bounds in dimension " + std::to_string(i));
  }
  std::size_t dim() const { return lo_.size(); }
  std::vector<double> to_user(const std::vector<double>& u) const {
    std::vector<double> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) x[i] = lo_[i] + std::clamp(u[i], 0.0, 1.0) * (hi_[i] - lo_[i]);
    return x;
  }
  std::vector<double> to_unit(const std::vector<double>& x) const {
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double w = hi_[i] - lo_[i];
      u[i] = w > 0.0 ? std::clamp((x[i] - lo_[i]) / w, 0.0, 1.0) : 0.0;
    }
    return u;
  }

 private:
  std::vector<double> lo_, hi_;
};

struct Agent {
  std::vector<double> u;
  Evaluation e;
};

inline bool better(const Evaluation& a, const Evaluation& b) { return a.fitness < b.fitness; }

inline void clip(std::vector<double>& u) {
  for (double& v : u) v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.5;
}

class Search {
 public:
  Search(const Objective& f, const UnitBox& box, const MetaheuristicSettings& ms)
      : f_(f), box_(box), ms_(ms), rng_(ms.rng_seed) {}

  std::vector<Evaluation> evaluate(const std::vector<std::vector<double>>& us) {
    std::vector<Evaluation> out(us.size());
    parallel_for(static_cast<int>(us.size()), ms_.jobs, [&](int i) {
      Evaluation e = f_(box_.to_user(us[static_cast<std::size_t>(i)]));
      if (std::isnan(e.fitness)) e.fitness = std::numeric_limits<double>::infinity();
      out[static_cast<std::size_t>(i)] = e;
    });
    evaluations_ += static_cast<long>(us.size());
    return out;
  }

  std::vector<Agent> initial_population(const std::vector<std::vector<double>>& seeds) {
    std::vector<std::vector<double>> us;
    for (const auto& s : seeds) {
      if (us.size() >= static_cast<std::size_t>(ms_.population)) break;
      if (s.size() != box_.dim()) throw OptimizerError("seed point has the wrong dimension");
      us.push_back(box_.to_unit(s));
    }
    while (us.size() < static_cast<std::size_t>(ms_.population)) us.push_back(uniform_vec());
    const auto es = evaluate(us);
    std::vector<Agent> pop(us.size());
    for (std::size_t i = 0; i < us.size(); ++i) pop[i] = {us[i], es[i]};
    return pop;
  }

  std::vector<double> uniform_vec() {
    std::vector<double> v(box_.dim());
    for (double& x : v) x = unif(rng_);
    return v;
  }
  double uniform() { return unif(rng_); }
  double normal() { return gauss(rng_); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  std::mt19937_64& rng() { return rng_; }
  long evaluations() const { return evaluations_; }
  std::size_t dim() const { return box_.dim(); }

 private:
  const Objective& f_;
  const UnitBox& box_;
  const MetaheuristicSettings& ms_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unif{0.0, 1.0};
  std::normal_distribution<double> gauss{0.0, 1.0};
  long evaluations_ = 0;
};

inline const Agent& best_of(const std::vector<Agent>& pop) {
  return *std::min_element(pop.begin(), pop.end(), [](const Agent& a, const Agent& b) { return better(a.e, b.e); });
}

inline int feasible_count(const std::vector<Agent>& pop) {
  return static_cast<int>(std::count_if(pop.begin(), pop.end(), [](const Agent& a) { return a.e.feasible; }));
}

// Stops when the best fitness improved by less than stall_tol per iteration,
// averaged over the last stall_window iterations.
inline bool stalled(const std::vector<TraceRow>& trace, const MetaheuristicSettings& ms) {
  const auto w = static_cast<std::size_t>(ms.stall_window);
  if (trace.size() <= w) return false;
  const double past = trace[trace.size() - 1 - w].best_fitness;
  const double now = trace.back().best_fitness;
  if (!std::isfinite(past) || !std::isfinite(now)) return false;
  return (past - now) / static_cast<double>(w) < ms.stall_tol;
}

// Mantegna's algorithm for a Levy-stable step with index 1.5.
inline double levy_step(Search& s) {
  constexpr double beta = 1.5;
  const double sigma = std::pow(std::tgamma(1.0 + beta) * std::sin(std::numbers::pi * beta / 2.0) /
                                    (std::tgamma((1.0 + beta) / 2.0) * beta * std::pow(2.0, (beta - 1.0) / 2.0)),
                                1.0 / beta);
  const double u = s.normal() * sigma;
  const double v = s.normal();
  return u / std::pow(std::max(std::abs(v), 1e-12), 1.0 / beta);
}

inline void greedy_replace(std::vector<Agent>& pop, const std::vector<int>& who,
                           const std::vector<std::vector<double>>& cand, const std::vector<Evaluation>& es) {
  for (std::size_t k = 0; k < who.size(); ++k) {
    auto& a = pop[static_cast<std::size_t>(who[k])];
    if (better(es[k], a.e)) a = {cand[k], es[k]};
  }
}

// One generation of the hippopotamus scheme: river/pond position update
// toward the dominant agent, defence against a random predator, and a
// shrinking local escape step.
inline void hippo_generation(Search& s, std::vector<Agent>& pop, int t, int t_max) {
  const int n = static_cast<int>(pop.size());
  const std::size_t d = s.dim();
  const int half = n / 2;

  // Phase 1: position update.
  {
    const std::vector<double> dom = best_of(pop).u;
    std::vector<int> who(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> cand(static_cast<std::size_t>(n));
    const double temp = std::exp(-static_cast<double>(t) / static_cast<double>(t_max));
    for (int i = 0; i < n; ++i) {
      const auto& x = pop[static_cast<std::size_t>(i)].u;
      std::vector<double> c(d);
      if (i < half) {
        const double i1 = 1.0 + s.pick(2);
        for (std::size_t k = 0; k < d; ++k) c[k] = x[k] + s.uniform() * (dom[k] - i1 * x[k]);
      } else {
        // Mean of a random group of agents.
        const int g = 1 + s.pick(n);
        std::vector<double> mg(d, 0.0);
        for (int m = 0; m < g; ++m) {
          const auto& y = pop[static_cast<std::size_t>(s.pick(n))].u;
          for (std::size_t k = 0; k < d; ++k) mg[k] += y[k] / g;
        }
        const int form = s.pick(5);
        const double i2 = 1.0 + s.pick(2);
        const double q = static_cast<double>(s.pick(2));
        const double scalar = s.uniform();
        auto h = [&](std::size_t) {
          switch (form) {
            case 0: return i2 * s.uniform() + (1.0 - q);
            case 1: return 2.0 * s.uniform() - 1.0;
            case 2: return s.uniform();
            case 3: return i2 * s.uniform() + q;
            default: return scalar;
          }
        };
        if (temp > 0.6) {
          for (std::size_t k = 0; k < d; ++k) c[k] = x[k] + h(k) * (dom[k] - i2 * mg[k]);
        } else if (s.uniform() > 0.5) {
          for (std::size_t k = 0; k < d; ++k) c[k] = x[k] + h(k) * (mg[k] - dom[k]);
        } else {
          c = s.uniform_vec();
        }
      }
      clip(c);
      who[static_cast<std::size_t>(i)] = i;
      cand[static_cast<std::size_t>(i)] = std::move(c);
    }
    greedy_replace(pop, who, cand, s.evaluate(cand));
  }

  // Phase 2: defence. Predators are drawn for the second half of the herd.
  {
    std::vector<int> who;
    std::vector<std::vector<double>> predators;
    for (int i = half; i < n; ++i) {
      who.push_back(i);
      predators.push_back(s.uniform_vec());
    }
    const auto pe = s.evaluate(predators);
    std::vector<std::vector<double>> cand(who.size());
    for (std::size_t m = 0; m < who.size(); ++m) {
      const auto& x = pop[static_cast<std::size_t>(who[m])].u;
      const auto& p = predators[m];
      const double b = 2.0 + 2.0 * s.uniform();
      const double c = 1.0 + 0.5 * s.uniform();
      const double dd = 2.0 + s.uniform();
      const double g = 2.0 * s.uniform() - 1.0;
      const double factor = b / (c - dd * std::cos(2.0 * std::numbers::pi * g));
      std::vector<double> y(d);
      const bool predator_better = better(pe[m], pop[static_cast<std::size_t>(who[m])].e);
      for (std::size_t k = 0; k < d; ++k) {
        const double dist = std::abs(p[k] - x[k]);
        const double rl = 0.05 * levy_step(s);
        if (predator_better) {
          // Charge toward the predator's (better) location.
          y[k] = p[k] + rl * p[k] + 0.01 * factor * (p[k] - x[k]) / (dist + 1e-3);
        } else {
          // Retreat from the predator, more strongly when it is close.
          y[k] = x[k] + rl + 0.05 * factor * (x[k] - p[k]) / (2.0 * dist + s.uniform() + 1e-3);
        }
      }
      clip(y);
      cand[m] = std::move(y);
    }
    greedy_replace(pop, who, cand, s.evaluate(cand));
  }

  // Phase 3: escape into a local neighbourhood that shrinks as 1/t.
  {
    std::vector<int> who(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> cand(static_cast<std::size_t>(n));
    const double radius = 1.0 / static_cast<double>(t);
    for (int i = 0; i < n; ++i) {
      const auto& x = pop[static_cast<std::size_t>(i)].u;
      const int form = s.pick(3);
      const double scalar = 0.5 + 0.25 * s.normal();
      std::vector<double> c(d);
      for (std::size_t k = 0; k < d; ++k) {
        const double step = form == 0 ? s.uniform() : (form == 1 ? scalar : 0.5 + 0.5 * (2.0 * s.uniform() - 1.0));
        c[k] = x[k] + s.uniform() * radius * (step - 0.5);
      }
      clip(c);
      who[static_cast<std::size_t>(i)] = i;
      cand[static_cast<std::size_t>(i)] = std::move(c);
    }
    greedy_replace(pop, who, cand, s.evaluate(cand));
  }
}

// Real-coded generational GA: tournament selection, blend crossover,
// Gaussian mutation and two elites.
inline void genetic_generation(Search& s, std::vector<Agent>& pop, int t, int t_max) {
  const int n = static_cast<int>(pop.size());
  const std::size_t d = s.dim();
  std::sort(pop.begin(), pop.end(), [](const Agent& a, const Agent& b) { return better(a.e, b.e); });
  auto tournament = [&]() -> const Agent& {
    int best = s.pick(n);
    for (int r = 0; r < 2; ++r) {
      const int c = s.pick(n);
      if (better(pop[static_cast<std::size_t>(c)].e, pop[static_cast<std::size_t>(best)].e)) best = c;
    }
    return pop[static_cast<std::size_t>(best)];
  };
  const double sigma = 0.1 * (1.0 - static_cast<double>(t) / t_max) + 0.01;
  std::vector<std::vector<double>> kids;
  for (int i = 2; i < n; ++i) {
    const auto& a = tournament().u;
    const auto& b = tournament().u;
    std::vector<double> c(d);
    for (std::size_t k = 0; k < d; ++k) {
      const double w = -0.5 + 2.0 * s.uniform();
      c[k] = a[k] + w * (b[k] - a[k]);
      if (s.uniform() < 1.0 / static_cast<double>(d)) c[k] += sigma * s.normal();
    }
    clip(c);
    kids.push_back(std::move(c));
  }
  const auto es = s.evaluate(kids);
  for (std::size_t i = 0; i < kids.size(); ++i) pop[i + 2] = {kids[i], es[i]};
}

}  // namespace detail

inline MinimizeResult metaheuristic_minimize(const Objective& f, const std::vector<double>& lo,
                                             const std::vector<double>& hi, const MetaheuristicSettings& ms,
                                             const std::vector<std::vector<double>>& seeds = {}) {
  ms.validate();
  const detail::UnitBox box(lo, hi);
  detail::Search s(f, box, ms);
  auto pop = s.initial_population(seeds);
  MinimizeResult out;
  for (int t = 1; t <= ms.max_iters; ++t) {
    if (ms.algorithm == Algorithm::hippopotamus) {
      detail::hippo_generation(s, pop, t, ms.max_iters);
    } else {
      detail::genetic_generation(s, pop, t, ms.max_iters);
    }
    out.trace.push_back({t, detail::best_of(pop).e.fitness, detail::feasible_count(pop)});
    out.iterations = t;
    if (detail::stalled(out.trace, ms)) {
      out.stalled = true;
      break;
    }
  }
  const auto& best = detail::best_of(pop);
  out.x = box.to_user(best.u);
  out.fitness = best.e.fitness;
  out.feasible = best.e.feasible;
  out.evaluations = s.evaluations();
  return out;
}

// Convenience overload for plain scalar objectives.
template <class F>
  requires std::is_invocable_r_v<double, F, const std::vector<double>&>
MinimizeResult metaheuristic_minimize(F&& f, const std::vector<double>& lo, const std::vector<double>& hi,
                                      const MetaheuristicSettings& ms,
                                      const std::vector<std::vector<double>>& seeds = {}) {
  const Objective obj = [&](const std::vector<double>& x) { return Evaluation{f(x), true}; };
  return metaheuristic_minimize(obj, lo, hi, ms, seeds);
}

}  // namespace movnet
