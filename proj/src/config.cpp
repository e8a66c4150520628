#include "quadtrain/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "quadtrain/errors.hpp"
#include "quadtrain/util.hpp"

namespace quadtrain {

void RunConfig::validate() const {
  sim.validate();
  control.gait.validate();
  ars.validate();
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (!(terrain_cell > 0.0)) throw ConfigError("sim: terrain_cell must be > 0");
  if (!(control.cycle_period > 0.0)) throw ConfigError("gait: cycle_period must be > 0");
  const auto& r = randomization;
  if (!(r.mass_fraction >= 0.0 && r.mass_fraction < 1.0)) {
    throw ConfigError("sim: randomize_mass_fraction must be in [0, 1)");
  }
  if (!(r.mu_min >= 0.0 && r.mu_min <= r.mu_max)) {
    throw ConfigError("sim: randomize_mu_min must be in [0, randomize_mu_max]");
  }
  if (!(r.servo_fraction >= 0.0 && r.servo_fraction < 1.0)) {
    throw ConfigError("sim: randomize_servo_fraction must be in [0, 1)");
  }
  const auto& b = control.bounds;
  if (!(b.clearance_max > 0.0 && b.penetration_max >= 0.0 && b.delta_max >= 0.0)) {
    throw ConfigError("policy: action bounds must be non-negative (clearance_max > 0)");
  }
  if (epochs < 0) throw ConfigError("ars: epochs must be >= 0");
  if (!(train_terrain_height >= 0.0)) throw ConfigError("ars: train_terrain_height must be >= 0");
  if (episodes < 1) throw ConfigError("harness: episodes must be >= 1");
  if (!(criteria.goal_distance > 0.0)) throw ConfigError("harness: goal_distance must be > 0");
  if (criteria.max_steps < 1) throw ConfigError("harness: max_steps must be >= 1");
  if (!(criteria.fall_angle > 0.0)) throw ConfigError("harness: fall_angle must be > 0");
  if (!(trained_height >= 0.0 && deployed_height >= 0.0)) {
    throw ConfigError("harness: terrain heights must be >= 0");
  }
  if (!(std::abs(slope_angle_deg) < 45.0)) throw ConfigError("harness: |slope_angle_deg| must be < 45");
  if (!(slope_goal > 0.0)) throw ConfigError("harness: slope_goal must be > 0");
  if (!(disturbance.ball_time >= 0.0 && disturbance.duration_after > 0.0)) {
    throw ConfigError("harness: ball_time must be >= 0 and disturbance_duration > 0");
  }
  if (!(disturbance.ball.mass >= 0.0 && disturbance.ball.speed >= 0.0)) {
    throw ConfigError("harness: ball mass and speed must be >= 0");
  }
  if (!(disturbance.recovery_band > 0.0 && disturbance.recovery_hold > 0.0)) {
    throw ConfigError("harness: recovery_band and recovery_hold must be > 0");
  }
  if (grf.settle_steps < 0 || grf.sample_window < 1) {
    throw ConfigError("harness: grf_settle_steps >= 0 and grf_sample_window >= 1 required");
  }
}

TrainingEnvironment RunConfig::training_environment() const {
  TrainingEnvironment env;
  env.nominal.params = sim;
  env.nominal.terrain = train_terrain_height > 0.0
                            ? TerrainSpec::rough(train_terrain_height, terrain_cell, seed)
                            : TerrainSpec::flat();
  env.randomization = randomization;
  env.control = control;
  env.criteria = criteria;
  return env;
}

ScenarioSettings RunConfig::scenario_settings() const {
  ScenarioSettings s;
  s.nominal.params = sim;
  s.nominal.terrain.cell = terrain_cell;
  s.randomization = randomization;
  s.control = control;
  s.criteria = criteria;
  s.episodes = episodes;
  s.jobs = jobs;
  s.seed = seed;
  return s;
}

namespace {

struct Binding {
  ConfigKey key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void bad_value(const ConfigKey& k, const std::string& text, const char* expected) {
  const std::string where = k.section.empty() ? k.name : k.section + "." + k.name;
  throw ConfigError(where + ": expected " + expected + ", got '" + text + "'");
}

// Accessor returns a reference into a RunConfig; the const overload reuses it.
template <class T, class Access>
Binding bind(std::string section, std::string name, std::string help, Access access) {
  Binding b{{std::move(section), std::move(name), std::move(help)}, {}, {}};
  const ConfigKey key = b.key;
  b.set = [key, access](RunConfig& c, const std::string& text) {
    T& field = access(c);
    if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1") field = true;
      else if (text == "false" || text == "0") field = false;
      else bad_value(key, text, "true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      field = text;
    } else if constexpr (std::is_same_v<T, ObservationVariant>) {
      field = variant_from_tag(text);
    } else if constexpr (std::is_floating_point_v<T>) {
      T v{};
      if (!parse_number(text, v) || !std::isfinite(v)) bad_value(key, text, "a finite number");
      field = v;
    } else {
      T v{};
      if (!parse_number(text, v)) bad_value(key, text, "an integer");
      field = v;
    }
  };
  b.get = [access](const RunConfig& c) -> std::string {
    const T& field = access(const_cast<RunConfig&>(c));
    if constexpr (std::is_same_v<T, bool>) return field ? "true" : "false";
    else if constexpr (std::is_same_v<T, std::string>) return field;
    else if constexpr (std::is_same_v<T, ObservationVariant>) return std::string(variant_tag(field));
    else if constexpr (std::is_floating_point_v<T>) return format_double(field);
    else return std::to_string(field);
  };
  return b;
}

#define QT_KEY(T, section, name, help, expr) \
  bind<T>(section, name, help, [](RunConfig& c) -> T& { return expr; })

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> all = {
      QT_KEY(std::uint64_t, "", "seed", "master seed (QUADTRAIN_SEED < config < --seed)", c.seed),
      QT_KEY(std::string, "", "output_dir", "directory for run outputs", c.output_dir),
      QT_KEY(int, "", "jobs", "concurrent worlds; results do not depend on it", c.jobs),

      QT_KEY(double, "sim", "mass", "base mass, kg", c.sim.robot.mass),
      QT_KEY(double, "sim", "inertia_x", "principal inertia about x, kg m^2", c.sim.robot.inertia_diagonal.x()),
      QT_KEY(double, "sim", "inertia_y", "principal inertia about y, kg m^2", c.sim.robot.inertia_diagonal.y()),
      QT_KEY(double, "sim", "inertia_z", "principal inertia about z, kg m^2", c.sim.robot.inertia_diagonal.z()),
      QT_KEY(double, "sim", "gravity", "m/s^2", c.sim.robot.gravity),
      QT_KEY(double, "sim", "contact_stiffness", "normal spring k_n, N/m", c.sim.contact.k_n),
      QT_KEY(double, "sim", "contact_damping", "normal damper c_n, N s/m", c.sim.contact.c_n),
      QT_KEY(double, "sim", "friction", "Coulomb coefficient mu", c.sim.contact.mu),
      QT_KEY(double, "sim", "tangential_stiffness", "stick spring k_t, N/m", c.sim.contact.k_t),
      QT_KEY(double, "sim", "tangential_damping", "stick damper c_t, N s/m", c.sim.contact.c_t),
      QT_KEY(double, "sim", "stand_height", "nominal hip-to-foot height, m", c.sim.stand_height),
      QT_KEY(double, "sim", "servo_tau", "joint servo time constant, s", c.sim.servo_tau),
      QT_KEY(double, "sim", "servo_rate_limit", "joint speed limit, rad/s", c.sim.servo_rate_limit),
      QT_KEY(double, "sim", "contact_threshold", "contact flag force threshold, N", c.sim.contact_threshold),
      QT_KEY(int, "sim", "substeps", "physics substeps per 0.01 s control step", c.sim.substeps),
      QT_KEY(double, "sim", "body_length", "hip mount spacing along x, m", c.sim.geometry.body_length),
      QT_KEY(double, "sim", "body_width", "hip mount spacing along y, m", c.sim.geometry.body_width),
      QT_KEY(double, "sim", "abduction_link", "hip abduction offset, m", c.sim.geometry.abduction_link),
      QT_KEY(double, "sim", "upper_leg", "upper leg length, m", c.sim.geometry.upper_leg),
      QT_KEY(double, "sim", "lower_leg", "lower leg length, m", c.sim.geometry.lower_leg),
      QT_KEY(double, "sim", "joint_limit", "symmetric joint limit, rad", c.sim.geometry.joint_limit),
      QT_KEY(double, "sim", "terrain_cell", "rough terrain grid spacing, m", c.terrain_cell),
      QT_KEY(bool, "sim", "randomize", "per-episode dynamics randomization", c.randomization.enabled),
      QT_KEY(double, "sim", "randomize_mass_fraction", "mass scale drawn from 1 +/- this", c.randomization.mass_fraction),
      QT_KEY(double, "sim", "randomize_mu_min", "friction lower bound", c.randomization.mu_min),
      QT_KEY(double, "sim", "randomize_mu_max", "friction upper bound", c.randomization.mu_max),
      QT_KEY(double, "sim", "randomize_servo_fraction", "servo tau scale drawn from 1 +/- this", c.randomization.servo_fraction),

      QT_KEY(double, "gait", "clearance_height", "swing apex, m (policy overrides)", c.control.gait.clearance_height),
      QT_KEY(double, "gait", "penetration_depth", "stance press depth, m (policy overrides)", c.control.gait.penetration_depth),
      QT_KEY(double, "gait", "step_length", "stride length, m", c.control.gait.step_length),
      QT_KEY(double, "gait", "step_velocity_scale", "stride length multiplier", c.control.gait.step_velocity_scale),
      QT_KEY(double, "gait", "duty_factor", "stance fraction of the cycle", c.control.gait.duty_factor),
      QT_KEY(double, "gait", "cycle_period", "gait cycle, s", c.control.cycle_period),

      QT_KEY(ObservationVariant, "policy", "variant", "imu | imu_contacts | imu_force", c.variant),
      QT_KEY(double, "policy", "clearance_max", "upper end of the clearance action, m", c.control.bounds.clearance_max),
      QT_KEY(double, "policy", "penetration_max", "upper end of the penetration action, m", c.control.bounds.penetration_max),
      QT_KEY(double, "policy", "delta_max", "per-axis foot offset bound, m", c.control.bounds.delta_max),

      QT_KEY(int, "ars", "n_rollouts", "rollouts per epoch (even unless one_sided)", c.ars.n_rollouts),
      QT_KEY(double, "ars", "learning_rate", "step size alpha", c.ars.learning_rate),
      QT_KEY(double, "ars", "exploration_noise", "perturbation scale", c.ars.exploration_noise),
      QT_KEY(long, "ars", "episode_steps", "rollout length cap", c.ars.episode_steps),
      QT_KEY(int, "ars", "top_b", "best directions used per update", c.ars.top_b),
      QT_KEY(bool, "ars", "one_sided", "one-sided sampling instead of mirrored pairs", c.ars.one_sided),
      QT_KEY(int, "ars", "checkpoint_every", "epochs between checkpoints", c.ars.checkpoint_every),
      QT_KEY(int, "ars", "epochs", "training epochs", c.epochs),
      QT_KEY(double, "ars", "train_terrain_height", "rough terrain max height, m; 0 = flat", c.train_terrain_height),

      QT_KEY(int, "harness", "episodes", "evaluation episodes per policy", c.episodes),
      QT_KEY(double, "harness", "goal_distance", "survival goal along +x, m", c.criteria.goal_distance),
      QT_KEY(long, "harness", "max_steps", "episode step cap", c.criteria.max_steps),
      QT_KEY(double, "harness", "fall_angle", "|roll| or |pitch| beyond this is a fall, rad", c.criteria.fall_angle),
      QT_KEY(double, "harness", "fall_height_fraction", "base clearance below this x stand_height is a fall", c.criteria.fall_height_fraction),
      QT_KEY(double, "harness", "trained_height", "heights scenario: training terrain height, m", c.trained_height),
      QT_KEY(double, "harness", "deployed_height", "heights scenario: harder terrain height, m", c.deployed_height),
      QT_KEY(double, "harness", "slope_angle_deg", "slope course angle, deg", c.slope_angle_deg),
      QT_KEY(double, "harness", "slope_goal", "slope course goal, m", c.slope_goal),
      QT_KEY(double, "harness", "ball_mass", "kg", c.disturbance.ball.mass),
      QT_KEY(double, "harness", "ball_speed", "m/s, along +y", c.disturbance.ball.speed),
      QT_KEY(double, "harness", "ball_time", "hit time, s", c.disturbance.ball_time),
      QT_KEY(double, "harness", "disturbance_duration", "simulated time after the hit, s", c.disturbance.duration_after),
      QT_KEY(double, "harness", "recovery_band", "roll/pitch band around the pre-hit mean, rad", c.disturbance.recovery_band),
      QT_KEY(double, "harness", "recovery_hold", "time the band must hold, s", c.disturbance.recovery_hold),
      QT_KEY(int, "harness", "grf_settle_steps", "steps before the GRF sample window", c.grf.settle_steps),
      QT_KEY(int, "harness", "grf_sample_window", "GRF sample step drawn from this many steps", c.grf.sample_window),
      QT_KEY(double, "harness", "grf_weight_tolerance", "allowed |F| error, fraction of nominal", c.grf.weight_tolerance),
      QT_KEY(double, "harness", "grf_tilt_tolerance_deg", "allowed tilt error, deg", c.grf.tilt_tolerance_deg),
      QT_KEY(double, "harness", "grf_nominal_weight", "reference weight, N", c.grf.nominal_weight),
  };
  return all;
}

#undef QT_KEY

const Binding* find_binding(const std::string& section, const std::string& name) {
  for (const auto& b : bindings()) {
    if (b.key.section == section && b.key.name == name) return &b;
  }
  return nullptr;
}

bool is_section(const std::string& name) {
  for (const auto& b : bindings()) {
    if (!b.key.section.empty() && b.key.section == name) return true;
  }
  return false;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& b : bindings()) out.push_back(b.key);
    return out;
  }();
  return keys;
}

RunConfig parse_config(std::istream& in, const std::string& source, RunConfig base) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig config = std::move(base);
  for (const auto& [name, node] : tree) {
    if (node.empty() && !is_section(name)) {
      const Binding* b = find_binding("", name);
      if (!b) throw ConfigError(source + ": unknown key '" + name + "'");
      b->set(config, node.data());
      continue;
    }
    if (!is_section(name)) throw ConfigError(source + ": unknown section [" + name + "]");
    for (const auto& [key, value] : node) {
      const Binding* b = find_binding(name, key);
      if (!b) throw ConfigError(source + ": unknown key '" + key + "' in [" + name + "]");
      b->set(config, value.data());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse_config(in, path.string(), std::move(base));
}

void write_config(std::ostream& out, const RunConfig& config) {
  std::string section;
  for (const auto& b : bindings()) {
    if (b.key.section != section) {
      section = b.key.section;
      out << "\n[" << section << "]\n";
    }
    out << "; " << b.key.help << '\n' << b.key.name << " = " << b.get(config) << '\n';
  }
}

}  // namespace quadtrain
