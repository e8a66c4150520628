#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "quadtrain/ars.hpp"
#include "quadtrain/harness.hpp"
#include "quadtrain/policy.hpp"
#include "quadtrain/sim.hpp"

namespace quadtrain {

// Everything a CLI run reads from the config file. Defaults are the values
// used when a key is absent.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int jobs = 1;

  SimParams sim;
  double terrain_cell = 1.0;
  RandomizationRanges randomization;

  ControlSettings control;
  ObservationVariant variant = ObservationVariant::Imu;

  ArsConfig ars;
  int epochs = 100;
  double train_terrain_height = 0.104;  // 0 trains on flat ground

  TerminationCriteria criteria;
  int episodes = 50;
  double trained_height = 0.104;
  double deployed_height = 0.128;
  double slope_angle_deg = 8.0;
  double slope_goal = 3.0;
  DisturbanceSettings disturbance;
  GrfSettings grf;

  void validate() const;

  TrainingEnvironment training_environment() const;
  ScenarioSettings scenario_settings() const;
};

// Documented key, in file order.
struct ConfigKey {
  std::string section;  // empty for top-level keys
  std::string name;
  std::string help;
};
const std::vector<ConfigKey>& config_keys();

// Parses INI text on top of `base`. Unknown sections or keys and malformed
// values throw ConfigError.
RunConfig parse_config(std::istream& in, const std::string& source, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// Full effective configuration, every key, in the format parse_config reads.
void write_config(std::ostream& out, const RunConfig& config);

}  // namespace quadtrain
