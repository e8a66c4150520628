#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>

#include "quadtrain/kinematics.hpp"
#include "quadtrain/terrain.hpp"

namespace quadtrain {

inline constexpr double kGravity = 9.81;
inline constexpr double kControlDt = 0.01;

struct RobotParams {
  double mass = 2.915;  // 28.6 N / 9.81
  // Principal inertia of a 0.25 x 0.14 x 0.05 m box of the nominal mass.
  Vec3 inertia_diagonal = Vec3(0.005369, 0.015791, 0.019943);
  double gravity = kGravity;

  double weight() const { return mass * gravity; }
  Mat3 inertia() const { return inertia_diagonal.asDiagonal(); }
};

// Penalty contact between a point foot and the terrain surface.
struct ContactModel {
  double k_n = 5000.0;  // N/m
  double c_n = 50.0;    // N s/m
  double mu = 0.8;
  double k_t = 2000.0;  // N/m, stick spring anchored at touchdown
  double c_t = 40.0;    // N s/m, tangential damping
};

struct SimParams {
  RobotParams robot;
  ContactModel contact;
  LegGeometry geometry;
  double stand_height = 0.19;
  double servo_tau = 0.03;         // s
  double servo_rate_limit = 8.0;   // rad/s
  double contact_threshold = 0.5;  // N
  int substeps = 10;               // physics substeps per 0.01 s control step

  void validate() const;
};

struct TerrainSpec {
  Terrain::Kind kind = Terrain::Kind::Flat;
  double max_height = 0.0;  // Rough
  double cell = 1.0;        // Rough
  std::uint64_t seed = 0;   // Rough
  double angle = 0.0;       // Incline, SlopeCourse
  SlopeDirection direction = SlopeDirection::Up;

  static TerrainSpec flat() { return {}; }
  static TerrainSpec rough(double max_height, double cell, std::uint64_t seed);
  static TerrainSpec incline(double angle);
  static TerrainSpec slope(double angle, SlopeDirection direction);

  Terrain build() const;
  bool operator==(const TerrainSpec&) const = default;
};

struct WorldSpec {
  SimParams params;
  TerrainSpec terrain;
};

struct RandomizationRanges {
  bool enabled = true;
  double mass_fraction = 0.10;
  double mu_min = 0.6;
  double mu_max = 1.0;
  double servo_fraction = 0.20;
  bool terrain = true;  // resample the heightfield seed (Rough only)
};

// Resamples terrain seed, mass (+inertia), friction and servo time constant.
// Deterministic per seed; returns `nominal` unchanged when disabled.
WorldSpec randomize_episode(const WorldSpec& nominal, std::uint64_t seed,
                            const RandomizationRanges& ranges = {});

struct BaseState {
  Vec3 position = Vec3::Zero();                  // world, m
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();  // world <- base
  Vec3 linear_velocity = Vec3::Zero();           // world, m/s
  Vec3 angular_velocity = Vec3::Zero();          // base frame, rad/s
  Vec3 angular_acceleration = Vec3::Zero();      // base frame, rad/s^2

  Mat3 rotation() const { return orientation.toRotationMatrix(); }
  // Z-Y-X Euler angles of the orientation.
  double roll() const;
  double pitch() const;
  double yaw() const;
};

struct ImuReading {
  double roll = 0.0;
  double pitch = 0.0;
  Vec3 omega = Vec3::Zero();
  Vec3 nu = Vec3::Zero();
};

struct SensorReadings {
  std::array<Vec3, 4> f_joint{};  // ground reaction, joint frame (after sign flip)
  std::array<Vec3, 4> f_base{};   // ground reaction, base frame
  std::array<int, 4> contact{};
  ImuReading imu;
};

using JointCommands = std::array<LegJointAngles, 4>;

class World {
 public:
  explicit World(WorldSpec spec);

  // Base aligned with the local surface at (x, y), legs at the neutral
  // stance, feet resting on the ground.
  void place_standing(double x = 0.0, double y = 0.0);
  // Arbitrary base pose and joint angles; velocities zeroed.
  void set_state(const BaseState& base, const JointCommands& joints);

  // One 0.01 s control step. Commands are saturated to the joint limits.
  // Throws SimulationDiverged on a non-finite state.
  const SensorReadings& step(const JointCommands& commands);

  // Instantaneous momentum change of the base, world frame.
  void apply_impulse(const Vec3& impulse);

  const WorldSpec& spec() const { return spec_; }
  const SimParams& params() const { return spec_.params; }
  const Terrain& terrain() const { return terrain_; }
  const BaseState& base() const { return base_; }
  const JointCommands& joint_angles() const { return joints_; }
  const SensorReadings& sensors() const { return sensors_; }
  const std::array<Vec3, 4>& contact_forces_world() const { return contact_world_; }
  Vec3 foot_position_world(LegId leg) const;
  // Height of the base above the terrain directly below it.
  double base_clearance() const;
  long step_index() const { return step_index_; }
  double time() const { return static_cast<double>(step_index_) * kControlDt; }
  JointCommands standing_pose() const;

 private:
  struct FootContact {
    bool active = false;
    Vec3 anchor = Vec3::Zero();
  };

  void substep(const JointCommands& commands, double h);
  Vec3 contact_force(int leg, const Vec3& p, const Vec3& v);
  void update_sensors();
  void refresh_foot_cache();

  WorldSpec spec_;
  Terrain terrain_;
  BaseState base_;
  JointCommands joints_{};
  std::array<Vec3, 4> foot_base_{};       // foot joint positions, base frame
  std::array<Vec3, 4> contact_world_{};   // ground on foot, world frame
  std::array<FootContact, 4> contacts_{};
  SensorReadings sensors_;
  Vec3 prev_omega_ = Vec3::Zero();
  long step_index_ = 0;
};

// Hit by a ball travelling along `direction`, modelled as a perfectly
// inelastic impulse m * v applied at the base centre of mass.
struct Ball {
  double mass = 0.5;   // kg
  double speed = 3.5;  // m/s
  Vec3 direction = Vec3::UnitY();

  Vec3 impulse() const { return mass * speed * direction.normalized(); }
};

void apply_ball_disturbance(World& world, const Ball& ball);

enum class Outcome { Running, Fell, ReachedGoal, TimedOut };

std::string_view to_string(Outcome o);

struct TerminationCriteria {
  double fall_angle = 0.9;             // rad, |roll| or |pitch|
  double fall_height_fraction = 0.4;   // of standing height
  double stand_height = 0.19;
  double goal_distance = 100.0;        // m along +x
  long max_steps = 50000;
};

struct TerminationInput {
  double roll = 0.0;
  double pitch = 0.0;
  double clearance = 0.19;  // base height above terrain
  double distance = 0.0;    // x travelled
};

Outcome check_termination(const TerminationInput& state, long elapsed_steps,
                          const TerminationCriteria& criteria);

TerminationInput termination_input(const World& world, double start_x);

// CSV trajectory log: one header row, then one row per call to `row`.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out);
  void row(const World& world);

 private:
  std::ostream& out_;
};

}  // namespace quadtrain
