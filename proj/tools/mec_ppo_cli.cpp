#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mecppo/experiment.hpp"
#include "mecppo/verify.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Multi-server partial-offloading experiment runner"};
  app.require_subcommand(1);

  // run
  std::string run_config;
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment config");
  run_cmd->add_option("--config", run_config, "Config JSON file")->required();
  run_cmd->add_option("--out", run_out, "Output directory");

  // verify
  std::string suite;
  int verify_seeds = 100;
  auto* verify_cmd = app.add_subcommand("verify", "Run a property suite");
  verify_cmd->add_option("suite", suite,
                         "roundtrip|newton|sca|server|balance|lemmas")
      ->required();
  verify_cmd->add_option("--seeds", verify_seeds, "Number of seeded checks");

  // compare
  std::string compare_configs;
  auto* compare_cmd =
      app.add_subcommand("compare", "Tabulate several configs side by side");
  compare_cmd->add_option("--configs", compare_configs,
                          "Comma-separated config JSON files")
      ->required();

  // gen
  std::uint64_t gen_seed = 1;
  int gen_servers = 2;
  int gen_ues = 10;
  std::string gen_out;
  std::string gen_access = "noma";
  auto* gen_cmd = app.add_subcommand("gen", "Generate a scenario file");
  gen_cmd->add_option("--seed", gen_seed, "RNG seed");
  gen_cmd->add_option("--servers", gen_servers, "Server count");
  gen_cmd->add_option("--ues", gen_ues, "UE count");
  gen_cmd->add_option("--access", gen_access, "noma|tdma");
  gen_cmd->add_option("--out", gen_out, "Output scenario JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      std::ifstream in(run_config);
      if (!in) {
        std::cerr << "cannot open config: " << run_config << '\n';
        return 1;
      }
      nlohmann::json doc = nlohmann::json::parse(in);
      auto cfg = mecppo::experiment::ExperimentConfig::from_json(doc);
      auto res = mecppo::experiment::run(cfg);
      auto csv = res.csv(cfg.method.tag,
                         mecppo::to_string(cfg.params.access));
      if (run_out.empty()) {
        std::cout << csv;
      } else {
        fs::create_directories(run_out);
        std::ofstream(fs::path(run_out) / "results.csv") << csv;
        std::ofstream(fs::path(run_out) / "detail.json")
            << res.detail().dump(2) << '\n';
      }
      return 0;
    }
    if (*verify_cmd) {
      std::ostringstream log;
      int failures = mecppo::verify::run_suite(suite, verify_seeds, log);
      std::cout << log.str();
      if (failures > 0) {
        std::cout << suite << ": " << failures << " failure(s)\n";
        return 3;
      }
      std::cout << suite << ": pass (" << verify_seeds << " seeds)\n";
      return 0;
    }
    if (*compare_cmd) {
      std::vector<mecppo::experiment::ExperimentConfig> cfgs;
      std::stringstream ss(compare_configs);
      std::string path;
      while (std::getline(ss, path, ',')) {
        std::ifstream in(path);
        if (!in) {
          std::cerr << "cannot open config: " << path << '\n';
          return 1;
        }
        cfgs.push_back(mecppo::experiment::ExperimentConfig::from_json(
            nlohmann::json::parse(in)));
      }
      std::cout << mecppo::experiment::compare(cfgs);
      return 0;
    }
    if (*gen_cmd) {
      mecppo::GenParams p;
      p.access = mecppo::access_mode_from_string(gen_access);
      auto sc = mecppo::generate_scenario(gen_seed, gen_servers, gen_ues, p);
      mecppo::save_scenario_file(sc, gen_out);
      return 0;
    }
  } catch (const std::domain_error& e) {
    std::cerr << "guard: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
