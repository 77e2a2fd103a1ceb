#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <tuple>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecppo/balancer.hpp"
#include "mecppo/report.hpp"
#include "mecppo/scenario.hpp"
#include "mecppo/server_solver.hpp"

// Comparison methods: fixed offload ratios, channel-gain association with
// fixed or workload-proportional bandwidth, exhaustive search over
// associations and a bandwidth grid, and a genetic search.
namespace mecppo::baselines {

namespace detail {

inline SolutionReport assemble(const Scenario& sc,
                               const std::vector<Group>& groups,
                               const std::vector<double>& bandwidth,
                               const std::vector<ServerSolution>& sols,
                               std::string method) {
  SolutionReport r;
  r.method = std::move(method);
  r.access = sc.access_mode;
  r.server_of_ue.assign(sc.ues.size(), -1);
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (int u : groups[i]) r.server_of_ue[u] = static_cast<int>(i);
  r.bandwidth = bandwidth;
  r.d_off_by_ue.assign(sc.ues.size(), 0.0);
  r.s_by_ue.assign(sc.ues.size(), 0.0);
  std::vector<double> t;
  for (const auto& sol : sols) {
    for (std::size_t pos = 0; pos < sol.order.size(); ++pos) {
      int u = sol.order[pos];
      auto dec = make_offload_decision(sc.ues[u].program, sol.d_off[pos]);
      r.d_off_by_ue[u] = dec.d_off;
      r.s_by_ue[u] = dec.s;
    }
    r.schedules.push_back(sol.schedule);
    t.push_back(sol.schedule.t_ttl);
  }
  r.makespan = *std::max_element(t.begin(), t.end());
  r.phi = spread(t);
  r.feasible = std::isfinite(r.makespan);
  return r;
}

inline std::vector<ServerSolution> optimize_all(const Scenario& sc,
                                                const std::vector<Group>& gs,
                                                const std::vector<double>& w,
                                                const SolverOptions& opt) {
  std::vector<ServerSolution> sols(gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i)
    sols[i] = optimize_server(sc, static_cast<int>(i), gs[i], w[i], opt);
  return sols;
}

}  // namespace detail

// Fixed-ratio split: the energy bound may push the offload above the ratio.
// No partition descent; upload times are still minimized per phase.
inline SolutionReport run_fixed_ratio(const Scenario& sc, double ratio,
                                      std::string method = {},
                                      bool upload_program = true) {
  auto a = Assignment::from_association(sc, init_association(sc));
  a.bandwidth = init_bandwidth(a.groups, sc.total_bandwidth);
  std::vector<double> d(sc.ues.size());
  for (std::size_t n = 0; n < sc.ues.size(); ++n) {
    const auto& ue = sc.ues[n];
    d[n] = std::min(ue.program.data_size,
                    std::max(ratio * ue.program.data_size,
                             min_offload_bound(ue)));
  }
  std::vector<ServerSolution> sols(a.groups.size());
  for (std::size_t i = 0; i < a.groups.size(); ++i)
    sols[i] = evaluate_server(sc, static_cast<int>(i), a.groups[i],
                              a.bandwidth[i], d, upload_program);
  if (method.empty()) {
    method = ratio == 0 ? "zpo" : ratio == 1 ? "fpo" : "hpo";
  }
  return detail::assemble(sc, a.groups, a.bandwidth, sols, std::move(method));
}

inline SolutionReport run_preinstalled(const Scenario& sc) {
  return run_fixed_ratio(sc, 1.0, "preinstalled", /*upload_program=*/false);
}

// Channel-gain association without migration. Fixed variant splits the
// bandwidth equally; variable variant reweights it once, in proportion to
// each server's optimized compute workload, and re-optimizes.
inline SolutionReport run_cg(const Scenario& sc, bool variable_bandwidth,
                             const SolverOptions& opt = {}) {
  auto a = Assignment::from_association(sc, init_association(sc));
  a.bandwidth.assign(sc.servers.size(),
                     sc.total_bandwidth /
                         static_cast<double>(sc.servers.size()));
  auto sols = detail::optimize_all(sc, a.groups, a.bandwidth, opt);
  if (!variable_bandwidth)
    return detail::assemble(sc, a.groups, a.bandwidth, sols, "cg_fba");

  std::vector<double> workload(sc.servers.size(), 0.0);  // cycles
  double total = 0;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    for (std::size_t pos = 0; pos < sols[i].order.size(); ++pos)
      workload[i] +=
          sc.ues[sols[i].order[pos]].program.intensity * sols[i].d_off[pos];
    total += workload[i];
  }
  if (total > 0)
    for (std::size_t i = 0; i < sc.servers.size(); ++i)
      a.bandwidth[i] = sc.total_bandwidth * workload[i] / total;
  sols = detail::optimize_all(sc, a.groups, a.bandwidth, opt);
  return detail::assemble(sc, a.groups, a.bandwidth, sols, "cg_vba");
}

namespace detail {

// Makespan cache for enumerative methods: a server's subproblem depends only
// on its UE set and bandwidth.
class ServerCache {
 public:
  ServerCache(const Scenario& sc, const SolverOptions& opt)
      : sc_(sc), opt_(opt) {}

  const ServerSolution& solve(int server, const Group& group, double w) {
    std::uint64_t mask = 0;
    for (int u : group) mask |= std::uint64_t{1} << u;
    auto key = std::make_tuple(server, mask, w);
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, optimize_server(sc_, server, group, w, opt_))
               .first;
    return it->second;
  }

 private:
  const Scenario& sc_;
  SolverOptions opt_;
  std::map<std::tuple<int, std::uint64_t, double>, ServerSolution> cache_;
};

// All compositions of `total` into `parts` nonnegative integers.
inline void compositions(int total, int parts,
                         const std::function<void(const std::vector<int>&)>& f,
                         std::vector<int>& acc) {
  if (parts == 1) {
    acc.push_back(total);
    f(acc);
    acc.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    acc.push_back(v);
    compositions(total - v, parts - 1, f, acc);
    acc.pop_back();
  }
}

}  // namespace detail

// Every association times every point of a simplex bandwidth grid with
// `grid` levels per degree of freedom; the returned optimum is certified
// over that grid only.
inline SolutionReport exhaustive_search(const Scenario& sc,
                                        const SolverOptions& opt = {},
                                        int grid = 21) {
  const auto servers = sc.servers.size();
  const auto ues = sc.ues.size();
  double combos = std::pow(static_cast<double>(servers),
                           static_cast<double>(ues));
  if (combos > 1e6)
    throw std::domain_error("exhaustive_search: instance too large");
  if (ues > 63)
    throw std::domain_error("exhaustive_search: too many UEs for bitmask");
  if (grid < 2) throw std::invalid_argument("exhaustive_search: grid < 2");

  detail::ServerCache cache(sc, opt);

  std::vector<std::vector<int>> w_grids;  // integer simplex points
  {
    std::vector<int> acc;
    detail::compositions(grid - 1, static_cast<int>(servers),
                         [&](const std::vector<int>& c) {
                           w_grids.push_back(c);
                         },
                         acc);
  }

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<Group> best_groups;
  std::vector<double> best_w;
  std::vector<ServerSolution> best_sols;

  std::vector<int> assoc(ues, 0);
  bool done = false;
  while (!done) {
    std::vector<Group> groups(servers);
    for (std::size_t n = 0; n < ues; ++n)
      groups[assoc[n]].push_back(static_cast<int>(n));

    for (const auto& steps : w_grids) {
      std::vector<double> w(servers);
      for (std::size_t i = 0; i < servers; ++i)
        w[i] = sc.total_bandwidth * steps[i] / (grid - 1);
      double val = 0;
      std::vector<ServerSolution> sols(servers);
      for (std::size_t i = 0; i < servers && val < best_val; ++i) {
        sols[i] = cache.solve(static_cast<int>(i), groups[i], w[i]);
        val = std::max(val, sols[i].schedule.t_ttl);
      }
      if (val < best_val) {
        best_val = val;
        best_groups = groups;
        best_w = w;
        best_sols = sols;
      }
    }
    // next association in base-`servers`
    done = true;
    for (std::size_t n = 0; n < ues; ++n) {
      if (++assoc[n] < static_cast<int>(servers)) {
        done = false;
        break;
      }
      assoc[n] = 0;
    }
  }
  auto r = detail::assemble(sc, best_groups, best_w, best_sols, "es");
  return r;
}

// Genetic search over association vectors; the bandwidth follows the
// group-size proportional rule, so fitness is a function of the association
// alone. Tournament selection, one-point crossover, per-gene mutation,
// single-elite survival.
inline SolutionReport genetic_search(const Scenario& sc, int population,
                                     int iterations, std::uint64_t seed,
                                     const SolverOptions& opt = {}) {
  if (population < 2)
    throw std::invalid_argument("genetic_search: population < 2");
  if (sc.ues.size() > 63)
    throw std::domain_error("genetic_search: too many UEs for bitmask");
  const auto servers = static_cast<int>(sc.servers.size());
  const auto ues = sc.ues.size();
  Rng rng(seed);
  detail::ServerCache cache(sc, opt);

  auto fitness = [&](const std::vector<int>& assoc,
                     std::vector<Group>* out_groups = nullptr,
                     std::vector<double>* out_w = nullptr,
                     std::vector<ServerSolution>* out_sols = nullptr) {
    std::vector<Group> groups(servers);
    for (std::size_t n = 0; n < ues; ++n)
      groups[assoc[n]].push_back(static_cast<int>(n));
    auto w = init_bandwidth(groups, sc.total_bandwidth);
    double val = 0;
    std::vector<ServerSolution> sols(servers);
    for (int i = 0; i < servers; ++i) {
      sols[i] = cache.solve(i, groups[i], w[i]);
      val = std::max(val, sols[i].schedule.t_ttl);
    }
    if (out_groups) *out_groups = std::move(groups);
    if (out_w) *out_w = std::move(w);
    if (out_sols) *out_sols = std::move(sols);
    return val;
  };

  std::vector<std::vector<int>> pop(population, std::vector<int>(ues));
  for (auto& ind : pop)
    for (auto& g : ind)
      g = static_cast<int>(rng.uniform01() * servers) % servers;
  pop[0] = init_association(sc);  // seed the search with the gain heuristic

  std::vector<double> fit(population);
  for (int i = 0; i < population; ++i) fit[i] = fitness(pop[i]);

  auto best_idx = [&]() {
    return static_cast<int>(std::min_element(fit.begin(), fit.end()) -
                            fit.begin());
  };
  std::vector<int> best = pop[best_idx()];
  double best_fit = fit[best_idx()];

  auto pick = [&]() {  // binary tournament
    int a = static_cast<int>(rng.uniform01() * population) % population;
    int b = static_cast<int>(rng.uniform01() * population) % population;
    return fit[a] <= fit[b] ? a : b;
  };

  for (int it = 0; it < iterations; ++it) {
    std::vector<std::vector<int>> next;
    next.push_back(best);  // elite
    while (static_cast<int>(next.size()) < population) {
      const auto& pa = pop[pick()];
      const auto& pb = pop[pick()];
      std::vector<int> child(ues);
      auto cut = static_cast<std::size_t>(rng.uniform01() * ues) % ues;
      for (std::size_t n = 0; n < ues; ++n)
        child[n] = n <= cut ? pa[n] : pb[n];
      for (std::size_t n = 0; n < ues; ++n)
        if (rng.uniform01() < 1.0 / static_cast<double>(ues))
          child[n] = static_cast<int>(rng.uniform01() * servers) % servers;
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    for (int i = 0; i < population; ++i) fit[i] = fitness(pop[i]);
    int bi = best_idx();
    if (fit[bi] < best_fit) {
      best_fit = fit[bi];
      best = pop[bi];
    }
  }

  std::vector<Group> groups;
  std::vector<double> w;
  std::vector<ServerSolution> sols;
  fitness(best, &groups, &w, &sols);
  auto r = detail::assemble(sc, groups, w, sols, "ga");
  r.iterations = iterations;
  return r;
}

struct MethodSpec {
  std::string tag = "ppo";  // ppo|fpo|hpo|zpo|cg_fba|cg_vba|es|ga|preinstalled
  int ga_population = 20;
  int ga_iterations = 500;
  int es_grid = 21;
  BalanceOptions balance;
};

inline SolutionReport run_method(const Scenario& sc, const MethodSpec& m,
                                 std::uint64_t seed = 0) {
  if (m.tag == "ppo") {
    auto r = balance(sc, m.balance);
    r.method = "ppo";
    return r;
  }
  if (m.tag == "fpo") return run_fixed_ratio(sc, 1.0);
  if (m.tag == "hpo") return run_fixed_ratio(sc, 0.5);
  if (m.tag == "zpo") return run_fixed_ratio(sc, 0.0);
  if (m.tag == "preinstalled") return run_preinstalled(sc);
  if (m.tag == "cg_fba") return run_cg(sc, false, m.balance.solver);
  if (m.tag == "cg_vba") return run_cg(sc, true, m.balance.solver);
  if (m.tag == "es") return exhaustive_search(sc, m.balance.solver, m.es_grid);
  if (m.tag == "ga")
    return genetic_search(sc, m.ga_population, m.ga_iterations, seed,
                          m.balance.solver);
  throw std::invalid_argument("run_method: unknown tag " + m.tag);
}

}  // namespace mecppo::baselines
