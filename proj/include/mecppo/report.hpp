#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "mecppo/scenario.hpp"
#include "mecppo/timing.hpp"

namespace mecppo {

// Final output of any solution method over one scenario: association,
// bandwidth split, per-UE partition, and per-server timing breakdown.
struct SolutionReport {
  std::string method;
  AccessMode access = AccessMode::noma;
  double makespan = std::numeric_limits<double>::infinity();
  double phi = 0;  // spread between slowest and fastest server
  std::vector<int> server_of_ue;
  std::vector<double> bandwidth;     // Hz, per server
  std::vector<double> d_off_by_ue;   // bits
  std::vector<double> s_by_ue;       // bits
  std::vector<ServerSchedule> schedules;
  int iterations = 0;
  bool feasible = true;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["method"] = method;
    j["access"] = to_string(access);
    j["makespan_s"] = makespan;
    j["phi_s"] = phi;
    j["server_of_ue"] = server_of_ue;
    j["bandwidth_hz"] = bandwidth;
    j["d_off_bits"] = d_off_by_ue;
    j["intermediate_bits"] = s_by_ue;
    j["iterations"] = iterations;
    j["feasible"] = feasible;
    auto& scheds = j["servers"] = nlohmann::json::array();
    for (const auto& s : schedules) {
      scheds.push_back({{"t_lc_s", s.t_lc},
                        {"t_pm_s", s.t_pm},
                        {"t_ir_s", s.t_ir},
                        {"t_srv_s", s.t_srv},
                        {"t_ttl_s", s.t_ttl},
                        {"program_powers_w", s.program_powers},
                        {"intermediate_powers_w", s.intermediate_powers}});
    }
    return j;
  }
};

}  // namespace mecppo
