#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mecppo/report.hpp"
#include "mecppo/scenario.hpp"
#include "mecppo/server_solver.hpp"

// Load balancer: channel-gain association and proportional bandwidth to
// start, then one-UE migrations between the slowest and fastest servers;
// when migration stops paying, bandwidth transfers with halving backtracks.
namespace mecppo {

struct Assignment {
  std::vector<int> server_of_ue;
  std::vector<Group> groups;        // per server
  std::vector<double> bandwidth;    // Hz, per server

  static Assignment from_association(const Scenario& sc,
                                     std::vector<int> assoc) {
    Assignment a;
    a.server_of_ue = std::move(assoc);
    a.groups.resize(sc.servers.size());
    for (std::size_t n = 0; n < a.server_of_ue.size(); ++n)
      a.groups[a.server_of_ue[n]].push_back(static_cast<int>(n));
    a.bandwidth.assign(sc.servers.size(), 0.0);
    return a;
  }
};

// Each UE joins the server with the strongest channel; ties go to the
// lowest server index.
inline std::vector<int> init_association(const Scenario& sc) {
  std::vector<int> assoc(sc.ues.size(), 0);
  for (std::size_t n = 0; n < sc.ues.size(); ++n) {
    int best = 0;
    for (std::size_t i = 1; i < sc.servers.size(); ++i)
      if (sc.gains[i][n] > sc.gains[best][n]) best = static_cast<int>(i);
    assoc[n] = best;
  }
  return assoc;
}

// Bandwidth proportional to group size; empty servers hold zero.
inline std::vector<double> init_bandwidth(const std::vector<Group>& groups,
                                          double total) {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  if (n == 0) throw std::invalid_argument("init_bandwidth: no UEs");
  std::vector<double> w(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i)
    w[i] = total * static_cast<double>(groups[i].size()) /
           static_cast<double>(n);
  return w;
}

inline double spread(std::span<const double> t_ttl) {
  if (t_ttl.empty()) throw std::invalid_argument("spread: no servers");
  auto [lo, hi] = std::minmax_element(t_ttl.begin(), t_ttl.end());
  return *hi - *lo;
}

// UE of the slowest server with the best channel to the fastest; none when
// the slowest server would be emptied.
inline std::optional<int> select_migration_ue(const Scenario& sc,
                                              const Assignment& a,
                                              int i_slow, int i_fast) {
  const auto& g = a.groups[i_slow];
  if (g.size() <= 1) return std::nullopt;
  int best = g.front();
  for (int u : g)
    if (sc.gains[i_fast][u] > sc.gains[i_fast][best]) best = u;
  return best;
}

// Slowest server receives, fastest donates.
inline void transfer_bandwidth(std::vector<double>& w, int i_slow, int i_fast,
                               double amount) {
  if (!(amount > 0 && amount < w[i_fast]))
    throw std::invalid_argument("transfer_bandwidth: amount out of range");
  w[i_slow] += amount;
  w[i_fast] -= amount;
}

struct BalanceEvent {
  int round = 0;
  std::string action;  // "migrate" | "bandwidth" | "skip-migrate"
  bool accepted = false;
  int i_slow = -1;
  int i_fast = -1;
  int ue = -1;             // migrations only
  double w_bar = 0;        // bandwidth transfers only
  double makespan_before = 0;
  double makespan_after = 0;   // of the candidate, accepted or not
  double t_fast_after = 0;     // donor completion time after the candidate
  double phi_after = 0;
};

using BalanceObserver = std::function<void(const BalanceEvent&)>;

struct BalanceOptions {
  double epsilon = 5.0;    // s, acceptable spread
  int max_rounds = 100;
  double w_min = 1e3;      // Hz, transfer-size floor
  SolverOptions solver;
};

namespace detail {

struct BalanceState {
  Assignment a;
  std::vector<ServerSolution> sols;
  double makespan = 0;
  double phi = 0;

  void refresh_summary() {
    std::vector<double> t;
    for (const auto& s : sols) t.push_back(s.schedule.t_ttl);
    makespan = *std::max_element(t.begin(), t.end());
    phi = spread(t);
  }
  int slowest() const {
    int best = 0;
    for (std::size_t i = 1; i < sols.size(); ++i)
      if (sols[i].schedule.t_ttl > sols[best].schedule.t_ttl)
        best = static_cast<int>(i);
    return best;
  }
  int fastest() const {
    int best = 0;
    for (std::size_t i = 1; i < sols.size(); ++i)
      if (sols[i].schedule.t_ttl < sols[best].schedule.t_ttl)
        best = static_cast<int>(i);
    return best;
  }
};

inline void resolve_server(const Scenario& sc, BalanceState& st, int i,
                           const SolverOptions& opt,
                           const std::vector<double>* warm = nullptr) {
  st.sols[i] = optimize_server(sc, i, st.a.groups[i], st.a.bandwidth[i], opt,
                               warm);
}

inline SolutionReport state_report(const Scenario& sc,
                                   const BalanceState& st) {
  SolutionReport r;
  r.access = sc.access_mode;
  r.makespan = st.makespan;
  r.phi = st.phi;
  r.server_of_ue = st.a.server_of_ue;
  r.bandwidth = st.a.bandwidth;
  r.d_off_by_ue.assign(sc.ues.size(), 0.0);
  r.s_by_ue.assign(sc.ues.size(), 0.0);
  for (const auto& sol : st.sols)
    for (std::size_t pos = 0; pos < sol.order.size(); ++pos) {
      int u = sol.order[pos];
      auto dec = make_offload_decision(sc.ues[u].program, sol.d_off[pos]);
      r.d_off_by_ue[u] = dec.d_off;
      r.s_by_ue[u] = dec.s;
    }
  for (const auto& sol : st.sols) r.schedules.push_back(sol.schedule);
  r.feasible = std::isfinite(st.makespan);
  return r;
}

}  // namespace detail

inline SolutionReport balance(const Scenario& sc,
                              const BalanceOptions& opt = {},
                              const BalanceObserver& observer = {}) {
  detail::BalanceState st;
  st.a = Assignment::from_association(sc, init_association(sc));
  st.a.bandwidth = init_bandwidth(st.a.groups, sc.total_bandwidth);
  st.sols.resize(sc.servers.size());
  for (std::size_t i = 0; i < sc.servers.size(); ++i)
    detail::resolve_server(sc, st, static_cast<int>(i), opt.solver);
  st.refresh_summary();

  detail::BalanceState best = st;
  int rounds = 0;

  enum class Mode { migrate, bandwidth };
  Mode mode = Mode::migrate;
  double w_bar = 0;  // set on entering bandwidth mode

  auto emit = [&](BalanceEvent e) {
    if (observer) observer(e);
  };
  auto track_best = [&]() {
    if (st.makespan < best.makespan) best = st;
  };

  if (st.phi > opt.epsilon && sc.servers.size() > 1) {
    for (rounds = 1; rounds <= opt.max_rounds; ++rounds) {
      int i_slow = st.slowest();
      int i_fast = st.fastest();
      if (mode == Mode::migrate) {
        auto ue = select_migration_ue(sc, st.a, i_slow, i_fast);
        if (!ue) {
          // Singleton slowest server: go straight to bandwidth transfer.
          mode = Mode::bandwidth;
          w_bar = st.a.bandwidth[i_fast] /
                  (static_cast<double>(st.a.groups[i_fast].size()) + 1);
          BalanceEvent e;
          e.round = rounds;
          e.action = "skip-migrate";
          e.i_slow = i_slow;
          e.i_fast = i_fast;
          e.makespan_before = st.makespan;
          e.makespan_after = st.makespan;
          e.phi_after = st.phi;
          emit(e);
          continue;
        }
        detail::BalanceState cand = st;
        auto& gs = cand.a.groups[i_slow];
        gs.erase(std::find(gs.begin(), gs.end(), *ue));
        cand.a.groups[i_fast].push_back(*ue);
        cand.a.server_of_ue[*ue] = i_fast;
        // Re-spread bandwidth proportionally to the new group sizes so the
        // receiving server always has usable spectrum (an emptied server
        // would otherwise trap the search); the bandwidth phase re-tunes
        // the split afterwards.
        cand.a.bandwidth = init_bandwidth(cand.a.groups, sc.total_bandwidth);
        for (std::size_t i = 0; i < sc.servers.size(); ++i) {
          int ii = static_cast<int>(i);
          if (ii != i_slow && ii != i_fast &&
              cand.a.bandwidth[i] == st.a.bandwidth[i])
            continue;
          detail::resolve_server(sc, cand, ii, opt.solver,
                                 &st.sols[i].d_off);
        }
        cand.refresh_summary();

        BalanceEvent e;
        e.round = rounds;
        e.action = "migrate";
        e.i_slow = i_slow;
        e.i_fast = i_fast;
        e.ue = *ue;
        e.makespan_before = st.makespan;
        e.makespan_after = cand.makespan;
        e.t_fast_after = cand.sols[i_fast].schedule.t_ttl;
        e.phi_after = cand.phi;
        e.accepted = cand.makespan < st.makespan;
        emit(e);

        if (e.accepted) {
          st = std::move(cand);
          track_best();
          if (st.phi <= opt.epsilon) break;
        } else {
          // Migration exhausted: candidate reverted, switch to bandwidth.
          mode = Mode::bandwidth;
          w_bar = st.a.bandwidth[i_fast] /
                  (static_cast<double>(st.a.groups[i_fast].size()) + 1);
        }
      } else {
        if (!(w_bar > 0)) {
          w_bar = st.a.bandwidth[i_fast] /
                  (static_cast<double>(st.a.groups[i_fast].size()) + 1);
        }
        while (w_bar >= st.a.bandwidth[i_fast] && w_bar >= opt.w_min)
          w_bar *= 0.5;
        if (w_bar < opt.w_min) break;

        detail::BalanceState cand = st;
        transfer_bandwidth(cand.a.bandwidth, i_slow, i_fast, w_bar);
        detail::resolve_server(sc, cand, i_slow, opt.solver,
                               &st.sols[i_slow].d_off);
        detail::resolve_server(sc, cand, i_fast, opt.solver,
                               &st.sols[i_fast].d_off);
        cand.refresh_summary();

        BalanceEvent e;
        e.round = rounds;
        e.action = "bandwidth";
        e.i_slow = i_slow;
        e.i_fast = i_fast;
        e.w_bar = w_bar;
        e.makespan_before = st.makespan;
        e.makespan_after = cand.makespan;
        e.t_fast_after = cand.sols[i_fast].schedule.t_ttl;
        e.phi_after = cand.phi;
        e.accepted = cand.makespan < st.makespan;
        emit(e);

        if (e.accepted) {
          st = std::move(cand);
          track_best();
          if (st.phi <= opt.epsilon) break;
          mode = Mode::migrate;  // effective transfer: resume migrations
          w_bar = 0;
        } else {
          w_bar *= 0.5;  // too large a slice hurt the donor: halve and retry
          if (w_bar < opt.w_min) break;
        }
      }
    }
  }

  auto report = detail::state_report(sc, best);
  report.method = "balanced";
  report.iterations = std::min(rounds, opt.max_rounds);
  return report;
}

}  // namespace mecppo
