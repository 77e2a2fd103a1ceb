#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mecppo/balancer.hpp"
#include "mecppo/baselines.hpp"
#include "mecppo/report.hpp"
#include "mecppo/scenario.hpp"

// Seeded experiment sweeps: one method over a parameter axis, repeated over
// seeds, reduced in seed order to CSV and a JSON detail document.
namespace mecppo::experiment {

struct ExperimentConfig {
  std::string scenario_file;  // when set, overrides generation (sweep=none)
  std::uint64_t base_seed = 1;
  int servers = 2;
  int ues = 10;
  GenParams params;
  baselines::MethodSpec method;
  std::string sweep_axis = "none";  // none|bandwidth|ue_count|server_count|
                                    // max_power|ue_speed|server_speed
  std::vector<double> sweep_values;  // SI units of the axis
  int repetitions = 1;

  void validate() const {
    if (repetitions < 1)
      throw std::invalid_argument("experiment: repetitions < 1");
    if (sweep_axis != "none" && sweep_values.empty())
      throw std::invalid_argument("experiment: sweep axis without values");
    for (std::size_t i = 1; i < sweep_values.size(); ++i)
      if (!(sweep_values[i] > sweep_values[i - 1]))
        throw std::invalid_argument(
            "experiment: sweep values must be strictly increasing");
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("scenario_file")) c.scenario_file = j["scenario_file"];
    if (j.contains("base_seed")) c.base_seed = j["base_seed"];
    if (j.contains("servers")) c.servers = j["servers"];
    if (j.contains("ues")) c.ues = j["ues"];
    if (j.contains("repetitions")) c.repetitions = j["repetitions"];
    if (j.contains("sweep_axis")) c.sweep_axis = j["sweep_axis"];
    if (j.contains("sweep_values"))
      c.sweep_values = j["sweep_values"].get<std::vector<double>>();
    if (j.contains("access"))
      c.params.access = access_mode_from_string(j["access"]);
    if (j.contains("bandwidth")) c.params.bandwidth = parse_quantity(j, "bandwidth");
    if (j.contains("epsilon")) c.method.balance.epsilon = j["epsilon"];
    if (j.contains("max_rounds")) c.method.balance.max_rounds = j["max_rounds"];
    if (j.contains("method")) {
      const auto& m = j["method"];
      if (m.is_string()) {
        c.method.tag = m;
      } else {
        c.method.tag = m.value("tag", "ppo");
        c.method.ga_population = m.value("ga_population", 20);
        c.method.ga_iterations = m.value("ga_iterations", 500);
        c.method.es_grid = m.value("es_grid", 21);
      }
    }
    c.validate();
    return c;
  }
};

struct CellResult {
  double sweep_value = 0;
  std::uint64_t seed = 0;
  SolutionReport report;
};

struct PointAggregate {
  double sweep_value = 0;
  int seeds = 0;
  double mean_makespan = 0;
  double std_makespan = 0;
  double mean_phi = 0;
  double mean_iters = 0;
};

struct RunResult {
  std::vector<CellResult> cells;
  std::vector<PointAggregate> points;

  std::string csv(const std::string& method,
                  const std::string& access) const {
    std::ostringstream out;
    out << "sweep_value,method,access,seeds,mean_makespan_s,std_makespan_s,"
           "mean_phi_s,mean_iters\n";
    out << std::setprecision(12);
    for (const auto& p : points)
      out << p.sweep_value << ',' << method << ',' << access << ',' << p.seeds
          << ',' << p.mean_makespan << ',' << p.std_makespan << ','
          << p.mean_phi << ',' << p.mean_iters << '\n';
    return out.str();
  }

  nlohmann::json detail() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : cells) {
      auto r = c.report.to_json();
      r["sweep_value"] = c.sweep_value;
      r["seed"] = c.seed;
      j.push_back(std::move(r));
    }
    return j;
  }
};

inline Scenario scenario_for(const ExperimentConfig& cfg, double sweep_value,
                             std::uint64_t seed) {
  if (!cfg.scenario_file.empty()) return load_scenario_file(cfg.scenario_file);
  GenParams p = cfg.params;
  int servers = cfg.servers;
  int ues = cfg.ues;
  if (cfg.sweep_axis == "bandwidth") {
    p.bandwidth = sweep_value;
  } else if (cfg.sweep_axis == "ue_count") {
    ues = static_cast<int>(sweep_value);
  } else if (cfg.sweep_axis == "server_count") {
    servers = static_cast<int>(sweep_value);
  } else if (cfg.sweep_axis == "max_power") {
    p.max_power_lo = p.max_power_hi = sweep_value;
  } else if (cfg.sweep_axis == "ue_speed") {
    p.ue_speed_lo = p.ue_speed_hi = sweep_value;
  } else if (cfg.sweep_axis == "server_speed") {
    p.srv_speed_lo = p.srv_speed_hi = sweep_value;
  } else if (cfg.sweep_axis != "none") {
    throw std::invalid_argument("experiment: unknown sweep axis " +
                                cfg.sweep_axis);
  }
  return generate_scenario(seed, servers, ues, p);
}

inline RunResult run(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult res;
  std::vector<double> values =
      cfg.sweep_axis == "none" ? std::vector<double>{0.0} : cfg.sweep_values;
  for (double v : values) {
    PointAggregate agg;
    agg.sweep_value = v;
    std::vector<double> makespans;
    for (int r = 0; r < cfg.repetitions; ++r) {
      std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(r);
      auto sc = scenario_for(cfg, v, seed);
      CellResult cell;
      cell.sweep_value = v;
      cell.seed = seed;
      cell.report = baselines::run_method(sc, cfg.method, seed);
      makespans.push_back(cell.report.makespan);
      agg.mean_phi += cell.report.phi;
      agg.mean_iters += cell.report.iterations;
      res.cells.push_back(std::move(cell));
    }
    agg.seeds = cfg.repetitions;
    double mean = 0;
    for (double m : makespans) mean += m;
    mean /= makespans.size();
    double var = 0;
    for (double m : makespans) var += (m - mean) * (m - mean);
    var /= makespans.size();
    agg.mean_makespan = mean;
    agg.std_makespan = std::sqrt(var);
    agg.mean_phi /= cfg.repetitions;
    agg.mean_iters /= cfg.repetitions;
    res.points.push_back(agg);
  }
  return res;
}

// One table over a shared sweep axis: a column of mean makespans per method.
inline std::string compare(std::span<const ExperimentConfig> configs) {
  if (configs.size() < 2)
    throw std::invalid_argument("compare: need at least 2 configs");
  for (const auto& c : configs) {
    if (c.sweep_axis != configs.front().sweep_axis ||
        c.sweep_values != configs.front().sweep_values ||
        c.base_seed != configs.front().base_seed ||
        c.repetitions != configs.front().repetitions)
      throw std::invalid_argument(
          "compare: configs must share sweep axis, values, and seeds");
  }
  std::vector<RunResult> results;
  for (const auto& c : configs) results.push_back(run(c));

  std::ostringstream out;
  out << std::setprecision(12);
  out << "sweep_value";
  for (const auto& c : configs) out << ',' << c.method.tag;
  out << '\n';
  for (std::size_t p = 0; p < results.front().points.size(); ++p) {
    out << results.front().points[p].sweep_value;
    for (const auto& r : results) out << ',' << r.points[p].mean_makespan;
    out << '\n';
  }
  return out.str();
}

}  // namespace mecppo::experiment
