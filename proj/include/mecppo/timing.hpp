#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include "mecppo/scenario.hpp"

// Workflow timing model: phase 1 (local compute || program upload),
// phase 2 (intermediate-result upload), phase 3 (remote execution).
// Result return is neglected.
namespace mecppo {

using Group = std::vector<int>;  // UE indices hosted by one server

struct OffloadDecision {
  double d_off = 0;  // bits
  double s = 0;      // intermediate-result bits
};

// No offloaded part means no intermediate transfer; otherwise the linear
// intermediate model applies.
inline OffloadDecision make_offload_decision(const ProgramSpec& p,
                                             double d_off) {
  OffloadDecision d;
  d.d_off = d_off;
  d.s = d_off > 0 ? p.k * d_off + p.b : 0;
  return d;
}

struct ServerSchedule {
  double t_lc = 0;
  double t_pm = 0;
  double t_ir = 0;
  double t_srv = 0;
  double t_ttl = 0;
  std::vector<double> program_powers;       // W, by decode-order position
  std::vector<double> intermediate_powers;  // W, by decode-order position
};

inline double local_compute_time(const UEProfile& ue, double d_off) {
  if (d_off < 0 || d_off > ue.program.data_size * (1 + 1e-12))
    throw std::invalid_argument("local_compute_time: d_off out of range");
  double remaining = std::max(ue.program.data_size - d_off, 0.0);
  return ue.program.intensity * remaining / ue.compute_speed;
}

// Max local time over a server's group; an empty group takes zero time.
inline double group_local_time(const Scenario& sc, const Group& group,
                               std::span<const double> d_off_by_ue) {
  double t = 0;
  for (int n : group)
    t = std::max(t, local_compute_time(sc.ues[n], d_off_by_ue[n]));
  return t;
}

inline double server_exec_time(const Scenario& sc, const Group& group,
                               std::span<const double> d_off_by_ue,
                               double v_srv) {
  if (!(v_srv > 0)) throw std::invalid_argument("server_exec_time: v_srv <= 0");
  double cycles = 0;
  for (int n : group) cycles += sc.ues[n].program.intensity * d_off_by_ue[n];
  return cycles / v_srv;
}

inline double server_total_time(double t_lc, double t_pm, double t_ir,
                                double t_srv) {
  return std::max(t_lc, t_pm) + t_ir + t_srv;
}

inline double system_makespan(std::span<const ServerSchedule> schedules) {
  if (schedules.empty())
    throw std::invalid_argument("system_makespan: no schedules");
  double m = 0;
  for (const auto& s : schedules) m = std::max(m, s.t_ttl);
  return m;
}

// Smallest offload size that keeps local-computing energy within budget:
// rho * F * (D - d_off) / v <= E  =>  d_off >= D - E v / (rho F).
inline double min_offload_bound(const UEProfile& ue) {
  double slack = ue.energy_budget * ue.compute_speed /
                 (ue.compute_power_draw * ue.program.intensity);
  return std::max(0.0, ue.program.data_size - slack);
}

inline double local_compute_energy(const UEProfile& ue, double d_off) {
  return ue.compute_power_draw * local_compute_time(ue, d_off);
}

}  // namespace mecppo
