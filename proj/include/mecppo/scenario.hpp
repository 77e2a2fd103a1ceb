#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mecppo/units.hpp"

namespace mecppo {

struct ProgramSpec {
  double data_size = 0;   // bits
  double intensity = 0;   // cycles/bit
  double k = 0;           // intermediate-result slope, dimensionless
  double b = 0;           // intermediate-result intercept, bits
};

struct UEProfile {
  int id = 0;
  std::array<double, 2> position{0, 0};  // meters
  double compute_speed = 0;              // cycles/s
  double max_power = 0;                  // W
  double energy_budget = 0;              // J
  double compute_power_draw = 0;         // W
  ProgramSpec program;
};

struct ServerProfile {
  int id = 0;
  std::array<double, 2> position{0, 0};  // meters
  double compute_speed = 0;              // cycles/s
};

enum class AccessMode { noma, tdma };

inline std::string to_string(AccessMode m) {
  return m == AccessMode::noma ? "noma" : "tdma";
}

inline AccessMode access_mode_from_string(const std::string& s) {
  if (s == "noma") return AccessMode::noma;
  if (s == "tdma") return AccessMode::tdma;
  throw std::invalid_argument("unknown access mode: " + s);
}

struct Scenario {
  std::vector<ServerProfile> servers;
  std::vector<UEProfile> ues;
  std::vector<std::vector<double>> gains;  // [server][ue], dimensionless
  double total_bandwidth = 0;              // Hz
  double noise_density = 0;                // W/Hz
  AccessMode access_mode = AccessMode::noma;
  std::uint64_t rng_seed = 0;

  int server_count() const { return static_cast<int>(servers.size()); }
  int ue_count() const { return static_cast<int>(ues.size()); }

  void validate() const {
    if (servers.empty()) throw std::invalid_argument("scenario: no servers");
    if (ues.empty()) throw std::invalid_argument("scenario: no UEs");
    if (total_bandwidth <= 0) throw std::invalid_argument("scenario: W <= 0");
    if (noise_density <= 0) throw std::invalid_argument("scenario: N0 <= 0");
    if (gains.size() != servers.size())
      throw std::invalid_argument("scenario: gains row count != server count");
    for (const auto& row : gains) {
      if (row.size() != ues.size())
        throw std::invalid_argument("scenario: gains column count != UE count");
      for (double g : row)
        if (!(g > 0)) throw std::invalid_argument("scenario: gain <= 0");
    }
    for (const auto& s : servers)
      if (!(s.compute_speed > 0))
        throw std::invalid_argument("scenario: server speed <= 0");
    for (const auto& u : ues) {
      if (!(u.compute_speed > 0) || !(u.max_power > 0) ||
          !(u.compute_power_draw > 0) || u.energy_budget < 0)
        throw std::invalid_argument("scenario: bad UE profile");
      if (!(u.program.data_size > 0) || !(u.program.intensity > 0) ||
          u.program.k < 0 || u.program.b < 0)
        throw std::invalid_argument("scenario: bad program spec");
    }
  }
};

// Deterministic uniform/exponential draws independent of libstdc++
// distribution internals, so a seed pins the scenario bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Exponential with unit mean via inversion.
  double exponential() {
    double u = uniform01();
    // u == 0 would map to +inf
    while (u <= 0.0) u = uniform01();
    return -std::log(u);
  }

 private:
  std::mt19937_64 eng_;
};

struct GenParams {
  double data_size = 2e8;          // 200 Mb
  double intensity = 2000;         // 2 GHz/Mb
  double k = 0.001;
  double b = 1.5e6;                // 1.5 Mb
  double max_power_lo = 0.1;       // W
  double max_power_hi = 0.25;
  double energy_budget = 4;        // J
  double compute_power_draw = 0.05;
  double ue_speed_lo = 1.2e9;      // cycles/s
  double ue_speed_hi = 4e9;
  double srv_speed_lo = 500e9;
  double srv_speed_hi = 650e9;
  double noise_density = 1e-20;    // W/Hz
  double bandwidth = 2e7;          // Hz
  AccessMode access = AccessMode::noma;
  double area_side = 100;          // m
  double path_loss_exponent = 3;
  double min_distance = 1;         // m, clamps the path-loss divergence at d->0

  void validate() const {
    if (max_power_lo > max_power_hi || ue_speed_lo > ue_speed_hi ||
        srv_speed_lo > srv_speed_hi)
      throw std::invalid_argument("gen params: empty range");
    if (!(bandwidth > 0) || !(noise_density > 0) || !(data_size > 0) ||
        !(intensity > 0))
      throw std::invalid_argument("gen params: non-positive value");
  }
};

// Servers sit on a fixed grid inside the square; UE positions are uniform.
inline std::array<double, 2> server_grid_position(int index, int count,
                                                  double side) {
  int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(count))));
  if (rows < 1) rows = 1;
  int cols = (count + rows - 1) / rows;
  int r = index / cols;
  int c = index % cols;
  int cols_in_row = std::min(cols, count - r * cols);
  double x = (c + 0.5) * side / cols_in_row;
  double y = (r + 0.5) * side / rows;
  return {x, y};
}

inline Scenario generate_scenario(std::uint64_t seed, int server_count,
                                  int ue_count, const GenParams& params = {}) {
  if (server_count < 1 || ue_count < 1)
    throw std::invalid_argument("generate_scenario: counts must be >= 1");
  params.validate();

  Rng rng(seed);
  Scenario sc;
  sc.rng_seed = seed;
  sc.total_bandwidth = params.bandwidth;
  sc.noise_density = params.noise_density;
  sc.access_mode = params.access;

  sc.servers.resize(server_count);
  for (int i = 0; i < server_count; ++i) {
    sc.servers[i].id = i;
    sc.servers[i].position =
        server_grid_position(i, server_count, params.area_side);
    sc.servers[i].compute_speed =
        rng.uniform(params.srv_speed_lo, params.srv_speed_hi);
  }

  sc.ues.resize(ue_count);
  for (int n = 0; n < ue_count; ++n) {
    auto& ue = sc.ues[n];
    ue.id = n;
    ue.position = {rng.uniform(0, params.area_side),
                   rng.uniform(0, params.area_side)};
    ue.compute_speed = rng.uniform(params.ue_speed_lo, params.ue_speed_hi);
    ue.max_power = rng.uniform(params.max_power_lo, params.max_power_hi);
    ue.energy_budget = params.energy_budget;
    ue.compute_power_draw = params.compute_power_draw;
    ue.program = {params.data_size, params.intensity, params.k, params.b};
  }

  sc.gains.assign(server_count, std::vector<double>(ue_count));
  for (int i = 0; i < server_count; ++i) {
    for (int n = 0; n < ue_count; ++n) {
      double dx = sc.servers[i].position[0] - sc.ues[n].position[0];
      double dy = sc.servers[i].position[1] - sc.ues[n].position[1];
      double d = std::max(std::hypot(dx, dy), params.min_distance);
      double g0 = rng.exponential();
      sc.gains[i][n] = g0 / std::pow(d, params.path_loss_exponent);
    }
  }

  sc.validate();
  return sc;
}

struct IntermediateModel {
  double k = 0;  // slope
  double b = 0;  // intercept, bits
};

// Ordinary least squares over (d_off, s) points.
inline IntermediateModel fit_intermediate_model(
    std::span<const std::pair<double, double>> points) {
  if (points.size() < 2)
    throw std::invalid_argument("fit: need at least two points");
  double mx = 0, my = 0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit: all d_off values equal");
  IntermediateModel m;
  m.k = sxy / sxx;
  m.b = my - m.k * mx;
  return m;
}

inline double intermediate_size(const IntermediateModel& m, double d_off) {
  if (d_off < 0) throw std::invalid_argument("intermediate_size: d_off < 0");
  return m.k * d_off + m.b;
}

// --- JSON (de)serialization -------------------------------------------------

// Numeric fields accept either a bare SI number or {"value": x, "unit": "Mb"}.
inline double parse_quantity(const nlohmann::json& j, const char* field) {
  if (!j.contains(field))
    throw std::invalid_argument(std::string("scenario: missing field ") + field);
  const auto& v = j.at(field);
  if (v.is_number()) return v.get<double>();
  if (v.is_object())
    return units::to_si(v.at("value").get<double>(),
                        v.at("unit").get<std::string>());
  throw std::invalid_argument(std::string("scenario: bad numeric field ") +
                              field);
}

inline Scenario load_scenario(const nlohmann::json& doc) {
  Scenario sc;
  const auto& sys = doc.at("system");
  sc.total_bandwidth = parse_quantity(sys, "bandwidth");
  sc.noise_density = parse_quantity(sys, "noise_density");
  sc.access_mode =
      access_mode_from_string(sys.value("access_mode", std::string("noma")));
  sc.rng_seed = sys.value("seed", std::uint64_t{0});

  for (const auto& js : doc.at("servers")) {
    ServerProfile s;
    s.id = js.at("id").get<int>();
    s.position = {js.at("position").at(0).get<double>(),
                  js.at("position").at(1).get<double>()};
    s.compute_speed = parse_quantity(js, "compute_speed");
    sc.servers.push_back(s);
  }
  for (const auto& ju : doc.at("ues")) {
    UEProfile u;
    u.id = ju.at("id").get<int>();
    u.position = {ju.at("position").at(0).get<double>(),
                  ju.at("position").at(1).get<double>()};
    u.compute_speed = parse_quantity(ju, "compute_speed");
    u.max_power = parse_quantity(ju, "max_power");
    u.energy_budget = parse_quantity(ju, "energy_budget");
    u.compute_power_draw = parse_quantity(ju, "compute_power_draw");
    const auto& jp = ju.at("program");
    u.program.data_size = parse_quantity(jp, "data_size");
    u.program.intensity = parse_quantity(jp, "intensity");
    u.program.k = jp.at("k").get<double>();
    u.program.b = parse_quantity(jp, "b");
    sc.ues.push_back(u);
  }
  if (!doc.contains("gains"))
    throw std::invalid_argument("scenario: missing gains matrix");
  for (const auto& row : doc.at("gains"))
    sc.gains.push_back(row.get<std::vector<double>>());
  sc.validate();
  return sc;
}

inline nlohmann::json save_scenario(const Scenario& sc) {
  nlohmann::json doc;
  doc["system"] = {{"bandwidth", sc.total_bandwidth},
                   {"noise_density", sc.noise_density},
                   {"access_mode", to_string(sc.access_mode)},
                   {"seed", sc.rng_seed}};
  doc["servers"] = nlohmann::json::array();
  for (const auto& s : sc.servers)
    doc["servers"].push_back({{"id", s.id},
                              {"position", s.position},
                              {"compute_speed", s.compute_speed}});
  doc["ues"] = nlohmann::json::array();
  for (const auto& u : sc.ues)
    doc["ues"].push_back(
        {{"id", u.id},
         {"position", u.position},
         {"compute_speed", u.compute_speed},
         {"max_power", u.max_power},
         {"energy_budget", u.energy_budget},
         {"compute_power_draw", u.compute_power_draw},
         {"program",
          {{"data_size", u.program.data_size},
           {"intensity", u.program.intensity},
           {"k", u.program.k},
           {"b", u.program.b}}}});
  doc["gains"] = sc.gains;
  return doc;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  nlohmann::json doc;
  in >> doc;
  return load_scenario(doc);
}

inline void save_scenario_file(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << save_scenario(sc).dump(2) << '\n';
}

}  // namespace mecppo
