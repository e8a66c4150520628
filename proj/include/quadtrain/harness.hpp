#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "quadtrain/ars.hpp"
#include "quadtrain/episode.hpp"
#include "quadtrain/policy.hpp"
#include "quadtrain/sim.hpp"

namespace quadtrain {

// A controller under evaluation. `group` aggregates tables, normally the
// variant tag.
struct PolicyEntry {
  std::string id;
  std::string group;
  std::function<std::unique_ptr<Controller>()> make;
};

PolicyEntry make_policy_entry(std::string id, PolicyMatrix policy, const ControlSettings& control);

// Alive unless the robot fell: reaching the goal and timing out upright both
// count as survival.
constexpr bool is_alive(Outcome o) { return o != Outcome::Fell; }

struct EpisodeRecord {
  std::string policy;
  std::string group;
  std::string scenario;
  std::uint64_t seed = 0;
  double distance = 0.0;
  long steps = 0;
  Outcome outcome = Outcome::Running;

  bool alive() const { return is_alive(outcome); }
};

// Distance buckets [0, e0), [e0, e1], (e1, inf) x {dead, alive}.
class SurvivalTable {
 public:
  explicit SurvivalTable(std::array<double, 2> edges = {5.0, 90.0});

  void add(double distance, bool alive);
  static int bucket_of(double distance, const std::array<double, 2>& edges);

  int count(int bucket, bool alive) const { return counts_[bucket][alive ? 1 : 0]; }
  int total() const;
  int alive_total() const;
  std::string bucket_label(int bucket) const;
  const std::array<double, 2>& edges() const { return edges_; }

 private:
  std::array<double, 2> edges_;
  std::array<std::array<int, 2>, 3> counts_{};
};

struct ScenarioResult {
  std::string scenario;
  std::vector<EpisodeRecord> records;   // ordered by (policy, episode)
  std::map<std::string, SurvivalTable> tables;  // per group
};

struct ScenarioSettings {
  WorldSpec nominal;
  RandomizationRanges randomization;  // per-episode dynamics (and terrain seed)
  ControlSettings control;
  TerminationCriteria criteria;
  int episodes = 50;
  int jobs = 1;
  std::uint64_t seed = 0;
};

// Rough terrain at `terrain_height`, 100 m goal, 50000-step cap (from
// settings.criteria), buckets 0-5 / 5-90 / >90 m.
ScenarioResult run_survival(const std::vector<PolicyEntry>& policies, double terrain_height,
                            const ScenarioSettings& settings);

struct HeightGeneralization {
  double trained_height = 0.104;
  double deployed_height = 0.128;
  ScenarioResult trained;
  ScenarioResult deployed;
  std::map<std::string, int> alive_delta;  // deployed - trained, per group
};

HeightGeneralization run_height_generalization(const std::vector<PolicyEntry>& policies,
                                               const ScenarioSettings& settings,
                                               double trained_height = 0.104,
                                               double deployed_height = 0.128);

// Slope course (3 m goal), buckets 0-1 / 1-2 / >2 m.
ScenarioResult run_slope(const std::vector<PolicyEntry>& policies, double angle,
                         SlopeDirection direction, const ScenarioSettings& settings,
                         double goal_distance = 3.0);

struct DisturbanceSettings {
  Ball ball;
  double ball_time = 5.0;        // s
  double duration_after = 10.0;  // s simulated after the hit
  double recovery_band = 0.05;   // rad
  double recovery_hold = 1.0;    // s
};

struct TimeSample {
  double t, roll, pitch, x, y;
};

struct DisturbanceResult {
  std::vector<TimeSample> series;
  double peak_roll = 0.0;   // max |roll| from ball_time on
  double peak_pitch = 0.0;
  double reference_roll = 0.0;   // mean over the second before the hit
  double reference_pitch = 0.0;
  std::optional<double> recovery_time;  // s after the hit
  Outcome outcome = Outcome::Running;
  bool recovered() const { return recovery_time.has_value() && is_alive(outcome); }
};

// Flat ground walk in +x with a ball hit at ball_time (no hit when the ball
// has zero mass or speed).
DisturbanceResult run_disturbance(const PolicyEntry& policy, const DisturbanceSettings& disturbance,
                                  const ScenarioSettings& settings);

enum class GrfStatus { Pass, Fail, Inconclusive };
std::string_view to_string(GrfStatus s);

struct GrfSettings {
  int settle_steps = 500;
  int sample_window = 100;            // sample step drawn uniformly from this window
  double weight_tolerance = 0.05;     // fraction of nominal weight
  double tilt_tolerance_deg = 0.5;
  double nominal_weight = 28.6;       // N
  double settled_speed = 1e-3;        // m/s
};

struct GrfReport {
  double incline_deg = 0.0;
  std::array<Vec3, 4> feet{};
  Vec3 total = Vec3::Zero();
  double resultant = 0.0;
  double tilt_deg = 0.0;     // atan(Fx / Fz)
  double base_speed = 0.0;
  long sample_step = 0;
  bool feet_push = false;    // every vertical component > 0
  GrfStatus status = GrfStatus::Inconclusive;
};

GrfReport verify_grf(double incline_rad, const SimParams& params, std::uint64_t seed,
                     const GrfSettings& settings = {});

// Output formats.
void write_episode_csv(std::ostream& out, const std::vector<EpisodeRecord>& records);
void write_height_csv(std::ostream& out, const HeightGeneralization& h);
void write_survival_tables(std::ostream& out, const ScenarioResult& result);
void write_time_series_csv(std::ostream& out, const std::vector<TimeSample>& series);
void write_grf_report(std::ostream& out, const GrfReport& report);
void write_disturbance_summary(std::ostream& out, const DisturbanceResult& r);

// Reference alive-at-goal counts (survival >90 m, slope >2 m) per variant.
struct ReferenceCounts {
  std::map<std::string, int> survival_goal_alive{{"imu", 348}, {"imu_force", 410}, {"imu_contacts", 490}};
  std::map<std::string, int> survival_episodes{{"imu", 1000}, {"imu_force", 1000}, {"imu_contacts", 1000}};
  std::map<std::string, int> slope_goal_alive{{"imu", 24}, {"imu_force", 30}, {"imu_contacts", 50}};
  std::map<std::string, int> slope_episodes{{"imu", 50}, {"imu_force", 50}, {"imu_contacts", 50}};
};

struct ComparisonReport {
  std::map<std::string, double> survival_goal_fraction;  // measured, per variant
  std::map<std::string, double> slope_goal_fraction;
  bool survival_ordering_holds = false;  // contacts >= force >= imu
  bool slope_ordering_holds = false;
  int policies_per_variant = 0;
  int episodes_per_policy = 0;
};

ComparisonReport compare_with_reference(const ScenarioResult& survival, const ScenarioResult& slope,
                                    int policies_per_variant, int episodes_per_policy);
void write_comparison_report(std::ostream& out, const ComparisonReport& report,
                             const ScenarioResult& survival, const ScenarioResult& slope,
                             const ReferenceCounts& reference = {});

}  // namespace quadtrain
