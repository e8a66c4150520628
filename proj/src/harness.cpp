#include "quadtrain/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "quadtrain/errors.hpp"
#include "quadtrain/util.hpp"

namespace quadtrain {

PolicyEntry make_policy_entry(std::string id, PolicyMatrix policy, const ControlSettings& control) {
  std::string group(variant_tag(policy.variant()));
  return {std::move(id), std::move(group), [policy = std::move(policy), control] {
            return std::make_unique<LinearPolicyController>(policy, control.gait, control.bounds);
          }};
}

SurvivalTable::SurvivalTable(std::array<double, 2> edges) : edges_(edges) {}

int SurvivalTable::bucket_of(double distance, const std::array<double, 2>& edges) {
  if (distance < edges[0]) return 0;
  if (distance <= edges[1]) return 1;
  return 2;
}

void SurvivalTable::add(double distance, bool alive) {
  ++counts_[bucket_of(distance, edges_)][alive ? 1 : 0];
}

int SurvivalTable::total() const {
  int n = 0;
  for (const auto& b : counts_) n += b[0] + b[1];
  return n;
}

int SurvivalTable::alive_total() const {
  int n = 0;
  for (const auto& b : counts_) n += b[1];
  return n;
}

std::string SurvivalTable::bucket_label(int bucket) const {
  const auto fmt = [](double v) { return format_double(v); };
  switch (bucket) {
    case 0: return "0-" + fmt(edges_[0]) + "m";
    case 1: return fmt(edges_[0]) + "-" + fmt(edges_[1]) + "m";
    default: return ">" + fmt(edges_[1]) + "m";
  }
}

namespace {

// Runs every (policy, episode) pair. Episode e of every policy sees the
// same world, so per-policy results are paired.
ScenarioResult run_episodes(const std::vector<PolicyEntry>& policies, const std::string& scenario,
                            const std::function<WorldSpec(std::uint64_t)>& world_for_seed,
                            const TerminationCriteria& criteria, std::array<double, 2> edges,
                            const ScenarioSettings& settings) {
  ScenarioResult result;
  result.scenario = scenario;
  const int episodes = settings.episodes;
  const int n = static_cast<int>(policies.size()) * episodes;
  result.records.resize(n);
  parallel_for(n, settings.jobs, [&](int job) {
    const PolicyEntry& entry = policies[job / episodes];
    const int e = job % episodes;
    const std::uint64_t seed = derive_seed(settings.seed, e);
    EpisodeRecord& rec = result.records[job];
    rec.policy = entry.id;
    rec.group = entry.group;
    rec.scenario = scenario;
    rec.seed = seed;
    World world(world_for_seed(seed));
    auto controller = entry.make();
    try {
      const EpisodeResult ep =
          run_episode(world, *controller, settings.control.initial_phase(), criteria);
      rec.distance = ep.distance;
      rec.steps = ep.steps;
      rec.outcome = ep.outcome;
    } catch (const SimulationDiverged& d) {
      // A blown-up simulation is scored as a fall at the divergence step.
      rec.distance = std::max(0.0, world.base().position.x());
      rec.steps = d.step();
      rec.outcome = Outcome::Fell;
    }
  });
  for (const auto& entry : policies) result.tables.try_emplace(entry.group, edges);
  for (const auto& rec : result.records) result.tables.at(rec.group).add(rec.distance, rec.alive());
  return result;
}

TerminationCriteria criteria_for(const ScenarioSettings& s, double goal) {
  TerminationCriteria c = s.criteria;
  c.goal_distance = goal;
  c.stand_height = s.nominal.params.stand_height;
  return c;
}

}  // namespace

ScenarioResult run_survival(const std::vector<PolicyEntry>& policies, double terrain_height,
                            const ScenarioSettings& settings) {
  const auto world_for_seed = [&](std::uint64_t seed) {
    WorldSpec spec = settings.nominal;
    spec.terrain = TerrainSpec::rough(terrain_height, settings.nominal.terrain.cell, seed);
    RandomizationRanges r = settings.randomization;
    r.terrain = false;
    return randomize_episode(spec, derive_seed(seed, 1), r);
  };
  return run_episodes(policies, "survival_" + format_double(terrain_height), world_for_seed,
                      criteria_for(settings, settings.criteria.goal_distance), {5.0, 90.0},
                      settings);
}

HeightGeneralization run_height_generalization(const std::vector<PolicyEntry>& policies,
                                               const ScenarioSettings& settings,
                                               double trained_height, double deployed_height) {
  HeightGeneralization out;
  out.trained_height = trained_height;
  out.deployed_height = deployed_height;
  out.trained = run_survival(policies, trained_height, settings);
  out.deployed = run_survival(policies, deployed_height, settings);
  for (const auto& [group, table] : out.trained.tables) {
    out.alive_delta[group] = out.deployed.tables.at(group).alive_total() - table.alive_total();
  }
  return out;
}

ScenarioResult run_slope(const std::vector<PolicyEntry>& policies, double angle,
                         SlopeDirection direction, const ScenarioSettings& settings,
                         double goal_distance) {
  const auto world_for_seed = [&](std::uint64_t seed) {
    WorldSpec spec = settings.nominal;
    spec.terrain = TerrainSpec::slope(angle, direction);
    return randomize_episode(spec, derive_seed(seed, 1), settings.randomization);
  };
  const std::string name = "slope_" + std::string(to_string(direction)) + "_" +
                           format_double(std::round(angle * 180.0 / M_PI * 1e6) / 1e6);
  return run_episodes(policies, name, world_for_seed, criteria_for(settings, goal_distance),
                      {1.0, 2.0}, settings);
}

DisturbanceResult run_disturbance(const PolicyEntry& policy, const DisturbanceSettings& d,
                                  const ScenarioSettings& settings) {
  DisturbanceResult out;
  WorldSpec spec = settings.nominal;
  spec.terrain = TerrainSpec::flat();
  World world(spec);
  auto controller = policy.make();

  const long hit_step = std::lround(d.ball_time / kControlDt);
  const long last_step = hit_step + std::lround(d.duration_after / kControlDt);
  const long pre_window = std::lround(1.0 / kControlDt);
  TerminationCriteria criteria = criteria_for(settings, std::numeric_limits<double>::infinity());
  criteria.max_steps = last_step;

  EpisodeHooks hooks;
  hooks.before_step = [&](World& w) {
    if (w.step_index() == hit_step) apply_ball_disturbance(w, d.ball);
  };
  hooks.after_step = [&](const World& w, double) {
    const BaseState& b = w.base();
    out.series.push_back({w.time(), b.roll(), b.pitch(), b.position.x(), b.position.y()});
  };
  try {
    out.outcome = run_episode(world, *controller, settings.control.initial_phase(), criteria, hooks).outcome;
  } catch (const SimulationDiverged&) {
    out.outcome = Outcome::Fell;
  }

  // series[k] is the state after step k + 1.
  const long n = static_cast<long>(out.series.size());
  const long pre_begin = std::max(0L, hit_step - pre_window);
  int pre_count = 0;
  for (long k = pre_begin; k < std::min(hit_step, n); ++k) {
    out.reference_roll += out.series[k].roll;
    out.reference_pitch += out.series[k].pitch;
    ++pre_count;
  }
  if (pre_count > 0) {
    out.reference_roll /= pre_count;
    out.reference_pitch /= pre_count;
  }
  const long hold = std::lround(d.recovery_hold / kControlDt);
  long run_start = -1;
  for (long k = std::min(hit_step, n); k < n; ++k) {
    const TimeSample& s = out.series[k];
    out.peak_roll = std::max(out.peak_roll, std::abs(s.roll));
    out.peak_pitch = std::max(out.peak_pitch, std::abs(s.pitch));
    const bool inside = std::abs(s.roll - out.reference_roll) <= d.recovery_band &&
                        std::abs(s.pitch - out.reference_pitch) <= d.recovery_band;
    if (!inside) {
      run_start = -1;
    } else {
      if (run_start < 0) run_start = k;
      if (!out.recovery_time && k - run_start + 1 >= hold) {
        out.recovery_time = out.series[run_start].t - d.ball_time;
      }
    }
  }
  return out;
}

std::string_view to_string(GrfStatus s) {
  switch (s) {
    case GrfStatus::Pass: return "pass";
    case GrfStatus::Fail: return "fail";
    case GrfStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

GrfReport verify_grf(double incline_rad, const SimParams& params, std::uint64_t seed,
                     const GrfSettings& settings) {
  if (!(std::abs(incline_rad) < M_PI / 4)) {
    throw DomainError("incline must satisfy |angle| < 45 deg");
  }
  WorldSpec spec;
  spec.params = params;
  spec.terrain = incline_rad == 0.0 ? TerrainSpec::flat() : TerrainSpec::incline(incline_rad);
  World world(spec);
  const JointCommands pose = world.standing_pose();
  for (int i = 0; i < settings.settle_steps; ++i) world.step(pose);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, std::max(0, settings.sample_window - 1));
  const int extra = pick(rng);
  for (int i = 0; i < extra; ++i) world.step(pose);

  GrfReport r;
  r.incline_deg = incline_rad * 180.0 / M_PI;
  r.sample_step = world.step_index();
  r.feet = world.sensors().f_base;
  r.feet_push = true;
  for (const Vec3& f : r.feet) {
    r.total += f;
    r.feet_push = r.feet_push && f.z() > 0.0;
  }
  r.resultant = r.total.norm();
  r.tilt_deg = std::atan2(r.total.x(), r.total.z()) * 180.0 / M_PI;
  r.base_speed = world.base().linear_velocity.norm();

  if (r.base_speed > settings.settled_speed) {
    r.status = GrfStatus::Inconclusive;
  } else {
    const bool weight_ok =
        std::abs(r.resultant - settings.nominal_weight) <= settings.weight_tolerance * settings.nominal_weight;
    const bool tilt_ok = std::abs(r.tilt_deg - r.incline_deg) <= settings.tilt_tolerance_deg;
    r.status = weight_ok && tilt_ok && r.feet_push ? GrfStatus::Pass : GrfStatus::Fail;
  }
  return r;
}

void write_episode_csv(std::ostream& out, const std::vector<EpisodeRecord>& records) {
  out << "policy,scenario,seed,distance_m,steps,outcome,alive\n";
  for (const auto& r : records) {
    out << r.policy << ',' << r.scenario << ',' << r.seed << ',' << format_double(r.distance)
        << ',' << r.steps << ',' << to_string(r.outcome) << ',' << (r.alive() ? 1 : 0) << '\n';
  }
}

void write_height_csv(std::ostream& out, const HeightGeneralization& h) {
  out << "policy,scenario,seed,distance_m,steps,outcome,alive,trained_height,deployed_height\n";
  for (const auto* result : {&h.trained, &h.deployed}) {
    const double deployed = result == &h.trained ? h.trained_height : h.deployed_height;
    for (const auto& r : result->records) {
      out << r.policy << ',' << r.scenario << ',' << r.seed << ',' << format_double(r.distance)
          << ',' << r.steps << ',' << to_string(r.outcome) << ',' << (r.alive() ? 1 : 0) << ','
          << format_double(h.trained_height) << ',' << format_double(deployed) << '\n';
    }
  }
}

void write_survival_tables(std::ostream& out, const ScenarioResult& result) {
  out << "variant,bucket,dead,alive,episodes\n";
  for (const auto& [group, table] : result.tables) {
    for (int b = 0; b < 3; ++b) {
      out << group << ',' << table.bucket_label(b) << ',' << table.count(b, false) << ','
          << table.count(b, true) << ',' << table.total() << '\n';
    }
  }
}

void write_time_series_csv(std::ostream& out, const std::vector<TimeSample>& series) {
  out << "t,roll,pitch,x,y\n";
  for (const auto& s : series) {
    out << format_double(s.t) << ',' << format_double(s.roll) << ',' << format_double(s.pitch)
        << ',' << format_double(s.x) << ',' << format_double(s.y) << '\n';
  }
}

void write_grf_report(std::ostream& out, const GrfReport& r) {
  const auto f3 = [](double v) {
    char buf[32];
    if (std::abs(v) < 5e-4) v = 0.0;  // no "-0.000"
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return std::string(buf);
  };
  out << "foot,fx,fy,fz\n";
  for (LegId leg : kAllLegs) {
    const Vec3& f = r.feet[leg_index(leg)];
    out << leg_name(leg) << ',' << f3(f.x()) << ',' << f3(f.y()) << ',' << f3(f.z()) << '\n';
  }
  out << "Total," << f3(r.total.x()) << ',' << f3(r.total.y()) << ',' << f3(r.total.z()) << '\n';
  out << "resultant_N," << f3(r.resultant) << '\n'
      << "tilt_deg," << f3(r.tilt_deg) << '\n'
      << "incline_deg," << f3(r.incline_deg) << '\n'
      << "sample_step," << r.sample_step << '\n'
      << "base_speed," << format_double(r.base_speed) << '\n'
      << "status," << to_string(r.status) << '\n';
}

void write_disturbance_summary(std::ostream& out, const DisturbanceResult& r) {
  out << "peak_roll," << format_double(r.peak_roll) << '\n'
      << "peak_pitch," << format_double(r.peak_pitch) << '\n'
      << "reference_roll," << format_double(r.reference_roll) << '\n'
      << "reference_pitch," << format_double(r.reference_pitch) << '\n'
      << "recovery_time_s," << (r.recovery_time ? format_double(*r.recovery_time) : "none") << '\n'
      << "outcome," << to_string(r.outcome) << '\n'
      << "recovered," << (r.recovered() ? 1 : 0) << '\n';
}

namespace {

std::map<std::string, double> goal_fraction(const ScenarioResult& r) {
  std::map<std::string, double> out;
  for (const auto& [group, table] : r.tables) {
    out[group] = table.total() > 0 ? static_cast<double>(table.count(2, true)) / table.total() : 0.0;
  }
  return out;
}

bool ordering_holds(const std::map<std::string, double>& f) {
  const auto get = [&](const char* k) {
    const auto it = f.find(k);
    return it == f.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
  };
  return get("imu_contacts") >= get("imu_force") && get("imu_force") >= get("imu");
}

}  // namespace

ComparisonReport compare_with_reference(const ScenarioResult& survival, const ScenarioResult& slope,
                                    int policies_per_variant, int episodes_per_policy) {
  ComparisonReport c;
  c.survival_goal_fraction = goal_fraction(survival);
  c.slope_goal_fraction = goal_fraction(slope);
  c.survival_ordering_holds = ordering_holds(c.survival_goal_fraction);
  c.slope_ordering_holds = ordering_holds(c.slope_goal_fraction);
  c.policies_per_variant = policies_per_variant;
  c.episodes_per_policy = episodes_per_policy;
  return c;
}

void write_comparison_report(std::ostream& out, const ComparisonReport& c,
                             const ScenarioResult& survival, const ScenarioResult& slope,
                             const ReferenceCounts& reference) {
  out << "# Measured vs reference (informational; different physics backend)\n";
  out << "policies_per_variant," << c.policies_per_variant << '\n';
  out << "episodes_per_policy," << c.episodes_per_policy << '\n';
  out << "table,variant,measured_goal_alive,measured_episodes,measured_fraction,"
         "reference_goal_alive,reference_episodes,reference_fraction\n";
  const auto rows = [&](const char* name, const ScenarioResult& r,
                        const std::map<std::string, int>& ref_alive,
                        const std::map<std::string, int>& ref_total) {
    for (auto v : kAllVariants) {
      const std::string tag(variant_tag(v));
      const auto it = r.tables.find(tag);
      const int alive = it == r.tables.end() ? 0 : it->second.count(2, true);
      const int total = it == r.tables.end() ? 0 : it->second.total();
      out << name << ',' << tag << ',' << alive << ',' << total << ','
          << format_double(total ? static_cast<double>(alive) / total : 0.0) << ','
          << ref_alive.at(tag) << ',' << ref_total.at(tag) << ','
          << format_double(static_cast<double>(ref_alive.at(tag)) / ref_total.at(tag)) << '\n';
    }
  };
  rows("survival_gt90m", survival, reference.survival_goal_alive, reference.survival_episodes);
  rows("slope_gt2m", slope, reference.slope_goal_alive, reference.slope_episodes);
  out << "ordering_contacts_ge_force_ge_imu,survival," << (c.survival_ordering_holds ? "holds" : "does_not_hold")
      << '\n';
  out << "ordering_contacts_ge_force_ge_imu,slope," << (c.slope_ordering_holds ? "holds" : "does_not_hold")
      << '\n';
}

}  // namespace quadtrain
