// quadtrain: train, evaluate and inspect linear gait policies.
//
// Exit codes: 0 ok, 2 bad config or arguments, 3 training aborted after
// divergence, 4 unreadable policy or empty policy glob, 5 GRF check failed.

#include <glob.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadtrain/ars.hpp"
#include "quadtrain/config.hpp"
#include "quadtrain/errors.hpp"
#include "quadtrain/harness.hpp"
#include "quadtrain/policy.hpp"
#include "quadtrain/sim.hpp"
#include "quadtrain/util.hpp"

namespace fs = std::filesystem;
using namespace quadtrain;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitPolicy = 4;
constexpr int kExitGrf = 5;

struct PolicyLoadError : Error {
  using Error::Error;
};

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "master seed (overrides config and QUADTRAIN_SEED)");
  cmd->add_option("--out", a.out, "output directory (overrides output_dir)");
  cmd->add_option("--jobs", a.jobs, "concurrent worlds")->check(CLI::PositiveNumber);
}

// default < QUADTRAIN_SEED < config file < flags
RunConfig resolve_config(const CommonArgs& a) {
  RunConfig base;
  if (const char* env = std::getenv("QUADTRAIN_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      base.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("QUADTRAIN_SEED is not an unsigned integer: ") + env);
    }
  }
  RunConfig c = a.config.empty() ? base : load_config(a.config, base);
  if (a.seed) c.seed = *a.seed;
  if (!a.out.empty()) c.output_dir = a.out;
  if (a.jobs) c.jobs = *a.jobs;
  c.validate();
  return c;
}

fs::path prepare_output(const RunConfig& c) {
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  std::ofstream out(dir / "effective_config.ini");
  write_config(out, c);
  return dir;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> paths;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  return paths;  // glob(3) sorts
}

// Loads every policy up front so a bad file fails before any output exists.
std::vector<PolicyEntry> load_policies(const std::string& pattern, const ControlSettings& control) {
  const auto paths = expand_glob(pattern);
  if (paths.empty()) throw PolicyLoadError("no policy files match '" + pattern + "'");
  std::vector<PolicyEntry> out;
  for (const auto& p : paths) {
    try {
      out.push_back(make_policy_entry(p, load_policy(p), control));
    } catch (const ParseError& e) {
      throw PolicyLoadError(e.what());
    } catch (const Error& e) {
      throw PolicyLoadError(p + ": " + e.what());
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  body(out);
  if (!out) throw Error("failed writing " + path.string());
}

double deg2rad(double d) { return d * M_PI / 180.0; }

int cmd_train(const CommonArgs& common, const std::string& variant_tag_arg,
              std::optional<int> epochs, bool resume) {
  RunConfig c = resolve_config(common);
  if (!variant_tag_arg.empty()) c.variant = variant_from_tag(variant_tag_arg);
  if (epochs) c.epochs = *epochs;
  c.validate();
  const fs::path dir = prepare_output(c);

  TrainOptions opt;
  opt.variant = c.variant;
  opt.ars = c.ars;
  opt.ars.seed = c.seed;
  opt.env = c.training_environment();
  opt.epochs = c.epochs;
  opt.out_dir = dir;
  opt.jobs = c.jobs;
  opt.resume = resume;
  const TrainOutput result = train(opt);
  for (const auto& r : result.curve) {
    std::cerr << "epoch " << r.epoch << " mean " << format_double(r.mean_reward_per_step) << '\n';
  }
  std::cout << (dir / "policy.txt").string() << '\n';
  return 0;
}

struct EvalArgs {
  std::string scenario;
  std::string policies;
  std::optional<double> terrain_height;
  std::optional<double> angle;
  std::string direction = "up";
  std::optional<int> episodes;
  std::optional<double> ball_time;
};

int cmd_eval(const CommonArgs& common, const EvalArgs& a) {
  RunConfig c = resolve_config(common);
  if (a.episodes) c.episodes = *a.episodes;
  if (a.ball_time) c.disturbance.ball_time = *a.ball_time;
  if (a.angle) c.slope_angle_deg = *a.angle;
  c.validate();
  const SlopeDirection direction = slope_direction_from_string(a.direction);
  const auto policies = load_policies(a.policies, c.control);
  const ScenarioSettings settings = c.scenario_settings();
  const fs::path dir = prepare_output(c);

  if (a.scenario == "survival") {
    const double h = a.terrain_height.value_or(c.trained_height);
    const ScenarioResult r = run_survival(policies, h, settings);
    write_file(dir / "episodes.csv", [&](std::ostream& o) { write_episode_csv(o, r.records); });
    write_file(dir / "survival_table.csv", [&](std::ostream& o) { write_survival_tables(o, r); });
    write_survival_tables(std::cout, r);
  } else if (a.scenario == "heights") {
    const double deployed = a.terrain_height.value_or(c.deployed_height);
    const HeightGeneralization h =
        run_height_generalization(policies, settings, c.trained_height, deployed);
    write_file(dir / "heights.csv", [&](std::ostream& o) { write_height_csv(o, h); });
    write_file(dir / "survival_table_trained.csv", [&](std::ostream& o) { write_survival_tables(o, h.trained); });
    write_file(dir / "survival_table_deployed.csv", [&](std::ostream& o) { write_survival_tables(o, h.deployed); });
    std::cout << "variant,alive_trained,alive_deployed,delta\n";
    for (const auto& [group, delta] : h.alive_delta) {
      std::cout << group << ',' << h.trained.tables.at(group).alive_total() << ','
                << h.deployed.tables.at(group).alive_total() << ',' << delta << '\n';
    }
  } else if (a.scenario == "slope") {
    const ScenarioResult r =
        run_slope(policies, deg2rad(c.slope_angle_deg), direction, settings, c.slope_goal);
    write_file(dir / "episodes.csv", [&](std::ostream& o) { write_episode_csv(o, r.records); });
    write_file(dir / "slope_table.csv", [&](std::ostream& o) { write_survival_tables(o, r); });
    write_survival_tables(std::cout, r);
  } else if (a.scenario == "disturbance") {
    std::vector<DisturbanceResult> results(policies.size());
    parallel_for(static_cast<int>(policies.size()), c.jobs, [&](int k) {
      results[k] = run_disturbance(policies[k], c.disturbance, settings);
    });
    std::cout << "policy,peak_roll,peak_pitch,recovery_time_s,outcome\n";
    for (std::size_t k = 0; k < policies.size(); ++k) {
      const auto& r = results[k];
      const std::string stem = "disturbance_" + std::to_string(k);
      write_file(dir / (stem + "_series.csv"), [&](std::ostream& o) { write_time_series_csv(o, r.series); });
      write_file(dir / (stem + "_summary.csv"), [&](std::ostream& o) {
        o << "policy," << policies[k].id << '\n';
        write_disturbance_summary(o, r);
      });
      std::cout << policies[k].id << ',' << format_double(r.peak_roll) << ','
                << format_double(r.peak_pitch) << ','
                << (r.recovery_time ? format_double(*r.recovery_time) : "none") << ','
                << to_string(r.outcome) << '\n';
    }
  } else {
    throw ConfigError("unknown scenario '" + a.scenario + "'");
  }
  return 0;
}

int cmd_verify_grf(const CommonArgs& common, double incline_deg) {
  if (!(std::abs(incline_deg) < 45.0)) {
    throw ConfigError("--incline must satisfy |angle| < 45 degrees");
  }
  const RunConfig c = resolve_config(common);
  const GrfReport r = verify_grf(deg2rad(incline_deg), c.sim, c.seed, c.grf);
  write_grf_report(std::cout, r);
  if (!common.out.empty()) {
    const fs::path dir = prepare_output(c);
    write_file(dir / "grf_report.csv", [&](std::ostream& o) { write_grf_report(o, r); });
  }
  return r.status == GrfStatus::Pass ? 0 : kExitGrf;
}

int cmd_dump(const CommonArgs& common, const std::string& policy_path, double terrain_height,
             long steps, double ball_time) {
  const RunConfig c = resolve_config(common);
  const auto policies = load_policies(policy_path, c.control);
  const fs::path dir = prepare_output(c);
  WorldSpec spec{c.sim, terrain_height > 0.0 ? TerrainSpec::rough(terrain_height, c.terrain_cell, c.seed)
                                             : TerrainSpec::flat()};
  World world(spec);
  auto controller = policies.front().make();
  TerminationCriteria criteria = c.criteria;
  criteria.max_steps = steps;
  criteria.stand_height = c.sim.stand_height;
  std::ofstream out(dir / "trajectory.csv");
  TrajectoryWriter writer(out);
  EpisodeHooks hooks;
  const long hit = ball_time >= 0.0 ? std::lround(ball_time / kControlDt) : -1;
  hooks.before_step = [&](World& w) {
    if (w.step_index() == hit) apply_ball_disturbance(w, c.disturbance.ball);
  };
  hooks.after_step = [&](const World& w, double) { writer.row(w); };
  const EpisodeResult r = run_episode(world, *controller, c.control.initial_phase(), criteria, hooks);
  std::cout << "steps," << r.steps << "\ndistance_m," << format_double(r.distance) << "\noutcome,"
            << to_string(r.outcome) << '\n';
  return 0;
}

int cmd_report(const CommonArgs& common, const std::string& pattern, std::optional<int> episodes) {
  RunConfig c = resolve_config(common);
  if (episodes) c.episodes = *episodes;
  c.validate();
  const auto policies = load_policies(pattern, c.control);
  const ScenarioSettings settings = c.scenario_settings();
  const fs::path dir = prepare_output(c);

  const ScenarioResult survival = run_survival(policies, c.trained_height, settings);
  const ScenarioResult slope =
      run_slope(policies, deg2rad(c.slope_angle_deg), SlopeDirection::Up, settings, c.slope_goal);
  std::map<std::string, int> per_group;
  for (const auto& p : policies) ++per_group[p.group];
  int min_per_group = per_group.empty() ? 0 : per_group.begin()->second;
  for (const auto& [g, n] : per_group) min_per_group = std::min(min_per_group, n);
  const ComparisonReport report = compare_with_reference(survival, slope, min_per_group, c.episodes);

  write_file(dir / "survival_episodes.csv", [&](std::ostream& o) { write_episode_csv(o, survival.records); });
  write_file(dir / "slope_episodes.csv", [&](std::ostream& o) { write_episode_csv(o, slope.records); });
  write_file(dir / "comparison.csv", [&](std::ostream& o) { write_comparison_report(o, report, survival, slope); });
  write_comparison_report(std::cout, report, survival, slope);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadruped gait-policy workbench: ARS training and evaluation"};
  app.require_subcommand(1);

  CommonArgs common;

  auto* train_cmd = app.add_subcommand("train", "train a linear policy with ARS");
  std::string variant;
  std::optional<int> epochs;
  bool resume = false;
  add_common(train_cmd, common);
  train_cmd->add_option("--variant", variant, "imu | imu_contacts | imu_force");
  train_cmd->add_option("--epochs", epochs, "training epochs")->check(CLI::NonNegativeNumber);
  train_cmd->add_flag("--resume", resume, "continue from the checkpoint in the output directory");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate policies on a scenario");
  EvalArgs eval;
  add_common(eval_cmd, common);
  eval_cmd->add_option("--scenario", eval.scenario, "survival | heights | disturbance | slope")
      ->required()
      ->check(CLI::IsMember({"survival", "heights", "disturbance", "slope"}));
  eval_cmd->add_option("--policies", eval.policies, "glob of policy files")->required();
  eval_cmd->add_option("--terrain-height", eval.terrain_height,
                       "survival: terrain height; heights: deployed height (m)")
      ->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--angle", eval.angle, "slope angle, degrees");
  eval_cmd->add_option("--direction", eval.direction, "slope direction: up | down")
      ->check(CLI::IsMember({"up", "down"}));
  eval_cmd->add_option("--episodes", eval.episodes, "episodes per policy")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--ball-time", eval.ball_time, "disturbance hit time, s")
      ->check(CLI::NonNegativeNumber);

  auto* grf_cmd = app.add_subcommand("verify-grf", "standing ground-reaction-force check");
  double incline = 0.0;
  add_common(grf_cmd, common);
  grf_cmd->add_option("--incline", incline, "plane incline, degrees (|angle| < 45)");

  auto* dump_cmd = app.add_subcommand("dump", "write a per-step trajectory CSV for one policy");
  std::string dump_policy;
  double dump_height = 0.0;
  long dump_steps = 1000;
  double dump_ball = -1.0;
  add_common(dump_cmd, common);
  dump_cmd->add_option("--policy", dump_policy, "policy file")->required();
  dump_cmd->add_option("--terrain-height", dump_height, "rough terrain height, m; 0 = flat")
      ->check(CLI::NonNegativeNumber);
  dump_cmd->add_option("--steps", dump_steps, "maximum control steps")->check(CLI::PositiveNumber);
  dump_cmd->add_option("--ball-time", dump_ball, "apply the ball disturbance at this time, s");

  auto* report_cmd = app.add_subcommand("report", "measured vs reference comparison");
  std::string report_policies;
  std::optional<int> report_episodes;
  add_common(report_cmd, common);
  report_cmd->add_option("--policies", report_policies, "glob of policy files")->required();
  report_cmd->add_option("--episodes", report_episodes, "episodes per policy")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(common, variant, epochs, resume);
    if (eval_cmd->parsed()) return cmd_eval(common, eval);
    if (grf_cmd->parsed()) return cmd_verify_grf(common, incline);
    if (dump_cmd->parsed()) return cmd_dump(common, dump_policy, dump_height, dump_steps, dump_ball);
    if (report_cmd->parsed()) return cmd_report(common, report_policies, report_episodes);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PolicyLoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPolicy;
  } catch (const TrainingAborted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const SimulationDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
