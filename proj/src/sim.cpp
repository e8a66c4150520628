#include "quadtrain/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "quadtrain/errors.hpp"

namespace quadtrain {

void SimParams::validate() const {
  geometry.validate();
  if (!(robot.mass > 0.0)) throw ConfigError("sim: mass must be > 0");
  if (!(robot.inertia_diagonal.minCoeff() > 0.0)) throw ConfigError("sim: inertia must be positive definite");
  if (!(robot.gravity >= 0.0)) throw ConfigError("sim: gravity must be >= 0");
  const auto& c = contact;
  if (!(c.k_n >= 0 && c.c_n >= 0 && c.mu >= 0 && c.k_t >= 0 && c.c_t >= 0)) {
    throw ConfigError("sim: contact parameters must be non-negative");
  }
  if (!(servo_tau > 0.0)) throw ConfigError("sim: servo_tau must be > 0");
  if (!(servo_rate_limit > 0.0)) throw ConfigError("sim: servo_rate_limit must be > 0");
  if (!(contact_threshold > 0.0)) throw ConfigError("sim: contact_threshold must be > 0");
  if (substeps < 1) throw ConfigError("sim: substeps must be >= 1");
  if (!(stand_height > 0.0 && stand_height < geometry.upper_leg + geometry.lower_leg)) {
    throw ConfigError("sim: stand_height must be inside the leg workspace");
  }
}

TerrainSpec TerrainSpec::rough(double max_height, double cell, std::uint64_t seed) {
  TerrainSpec t;
  t.kind = Terrain::Kind::Rough;
  t.max_height = max_height;
  t.cell = cell;
  t.seed = seed;
  return t;
}

TerrainSpec TerrainSpec::incline(double angle) {
  TerrainSpec t;
  t.kind = Terrain::Kind::Incline;
  t.angle = angle;
  return t;
}

TerrainSpec TerrainSpec::slope(double angle, SlopeDirection direction) {
  TerrainSpec t;
  t.kind = Terrain::Kind::SlopeCourse;
  t.angle = angle;
  t.direction = direction;
  return t;
}

Terrain TerrainSpec::build() const {
  switch (kind) {
    case Terrain::Kind::Flat: return Terrain::flat();
    case Terrain::Kind::Rough: return generate_rough_terrain(max_height, cell, seed);
    case Terrain::Kind::Incline: return Terrain::incline(angle);
    case Terrain::Kind::SlopeCourse: return make_slope_course(angle, direction);
  }
  return Terrain::flat();
}

WorldSpec randomize_episode(const WorldSpec& nominal, std::uint64_t seed,
                            const RandomizationRanges& ranges) {
  if (!ranges.enabled) return nominal;
  WorldSpec out = nominal;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double mass_scale = 1.0 + ranges.mass_fraction * unit(rng);
  out.params.robot.mass *= mass_scale;
  out.params.robot.inertia_diagonal *= mass_scale;
  std::uniform_real_distribution<double> mu(ranges.mu_min, ranges.mu_max);
  out.params.contact.mu = mu(rng);
  out.params.servo_tau *= 1.0 + ranges.servo_fraction * unit(rng);
  const std::uint64_t terrain_seed = rng();
  if (ranges.terrain && out.terrain.kind == Terrain::Kind::Rough) {
    out.terrain.seed = terrain_seed;
  }
  return out;
}

double BaseState::roll() const {
  const Mat3 r = rotation();
  return std::atan2(r(2, 1), r(2, 2));
}

double BaseState::pitch() const {
  const Mat3 r = rotation();
  return std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
}

double BaseState::yaw() const {
  const Mat3 r = rotation();
  return std::atan2(r(1, 0), r(0, 0));
}

World::World(WorldSpec spec) : spec_(std::move(spec)) {
  spec_.params.validate();
  terrain_ = spec_.terrain.build();
  joints_ = standing_pose();
  place_standing();
}

JointCommands World::standing_pose() const {
  JointCommands pose;
  const auto& geom = spec_.params.geometry;
  for (LegId leg : kAllLegs) {
    pose[leg_index(leg)] =
        leg_inverse_kinematics(leg, neutral_foot_hip_frame(leg, geom, spec_.params.stand_height), geom)
            .angles;
  }
  return pose;
}

void World::place_standing(double x, double y) {
  const auto& geom = spec_.params.geometry;
  BaseState base;
  if (terrain_.kind() == Terrain::Kind::Incline) {
    // Base z axis along the surface normal, x axis up the incline.
    const Vec3 n = terrain_.normal(x, y);
    base.orientation = Eigen::Quaterniond(rotation_y(-std::atan2(-n.x(), n.z())));
    base.position = Vec3(x, y, terrain_.height(x, y)) + spec_.params.stand_height * n;
  } else {
    double ground = -std::numeric_limits<double>::infinity();
    for (LegId leg : kAllLegs) {
      const Vec3 foot = geom.hip_offset(leg) + neutral_foot_hip_frame(leg, geom, 0.0);
      ground = std::max(ground, terrain_.height(x + foot.x(), y + foot.y()));
    }
    base.position = Vec3(x, y, ground + spec_.params.stand_height);
  }
  set_state(base, standing_pose());
}

void World::set_state(const BaseState& base, const JointCommands& joints) {
  base_ = base;
  base_.linear_velocity.setZero();
  base_.angular_velocity.setZero();
  base_.angular_acceleration.setZero();
  prev_omega_.setZero();
  joints_ = joints;
  contacts_ = {};
  contact_world_ = {};
  step_index_ = 0;
  refresh_foot_cache();
  update_sensors();
}

void World::refresh_foot_cache() {
  for (LegId leg : kAllLegs) {
    const int i = leg_index(leg);
    foot_base_[i] =
        leg_chain_transform_unchecked(leg, joints_[i], spec_.params.geometry).translation();
  }
}

Vec3 World::foot_position_world(LegId leg) const {
  return base_.position + base_.orientation * foot_base_[leg_index(leg)];
}

double World::base_clearance() const {
  return base_.position.z() - terrain_.height(base_.position.x(), base_.position.y());
}

void World::apply_impulse(const Vec3& impulse) {
  base_.linear_velocity += impulse / spec_.params.robot.mass;
}

Vec3 World::contact_force(int leg, const Vec3& p, const Vec3& v) {
  const ContactModel& cm = spec_.params.contact;
  FootContact& state = contacts_[leg];
  const Vec3 n = terrain_.normal(p.x(), p.y());
  const double depth = (terrain_.height(p.x(), p.y()) - p.z()) * n.z();
  if (depth <= 0.0) {
    state.active = false;
    return Vec3::Zero();
  }
  const double vn = v.dot(n);
  const double fn = std::max(0.0, cm.k_n * depth - cm.c_n * vn);
  if (!state.active) {
    state.active = true;
    state.anchor = p;
  }
  Vec3 d = p - state.anchor;
  d -= d.dot(n) * n;
  const Vec3 vt = v - vn * n;
  Vec3 ft = -cm.k_t * d - cm.c_t * vt;
  const double cap = cm.mu * fn;
  const double ft_norm = ft.norm();
  if (ft_norm > cap) {
    ft *= ft_norm > 0.0 ? cap / ft_norm : 0.0;
    // Slip: drag the anchor so the spring alone carries the capped force.
    if (cm.k_t > 0.0) state.anchor = p + ft / cm.k_t;
  }
  return fn * n + ft;
}

void World::substep(const JointCommands& commands, double h) {
  const SimParams& sp = spec_.params;
  const double rate = sp.servo_rate_limit;
  for (int i = 0; i < 4; ++i) {
    auto track = [&](double& q, double target) {
      const double qdot = std::clamp((target - q) / sp.servo_tau, -rate, rate);
      q += qdot * h;
    };
    track(joints_[i].hip, commands[i].hip);
    track(joints_[i].shoulder, commands[i].shoulder);
    track(joints_[i].knee, commands[i].knee);
  }

  const Mat3 rot = base_.rotation();
  const Vec3 omega_world = rot * base_.angular_velocity;
  Vec3 force = Vec3(0.0, 0.0, -sp.robot.gravity * sp.robot.mass);
  Vec3 torque_world = Vec3::Zero();
  for (LegId leg : kAllLegs) {
    const int i = leg_index(leg);
    const Vec3 foot = leg_chain_transform_unchecked(leg, joints_[i], sp.geometry).translation();
    const Vec3 foot_rate = (foot - foot_base_[i]) / h;
    foot_base_[i] = foot;
    const Vec3 lever = rot * foot;
    const Vec3 p = base_.position + lever;
    const Vec3 v = base_.linear_velocity + omega_world.cross(lever) + rot * foot_rate;
    contact_world_[i] = contact_force(i, p, v);
    force += contact_world_[i];
    torque_world += lever.cross(contact_world_[i]);
  }

  // Semi-implicit Euler: velocities first, then positions with new velocities.
  base_.linear_velocity += force / sp.robot.mass * h;
  base_.position += base_.linear_velocity * h;

  const Vec3& inertia = sp.robot.inertia_diagonal;
  Vec3& w = base_.angular_velocity;
  const Vec3 torque = rot.transpose() * torque_world;
  const Vec3 gyro = w.cross(inertia.cwiseProduct(w));
  w += (torque - gyro).cwiseQuotient(inertia) * h;
  const double angle = w.norm() * h;
  if (angle > 0.0) {
    base_.orientation = base_.orientation * Eigen::Quaterniond(Eigen::AngleAxisd(angle, w.normalized()));
  }
  base_.orientation.normalize();
}

const SensorReadings& World::step(const JointCommands& commands) {
  const double limit = spec_.params.geometry.joint_limit;
  JointCommands cmd = commands;
  for (auto& c : cmd) {
    c.hip = std::clamp(c.hip, -limit, limit);
    c.shoulder = std::clamp(c.shoulder, -limit, limit);
    c.knee = std::clamp(c.knee, -limit, limit);
  }
  const int n = spec_.params.substeps;
  const double h = kControlDt / n;
  for (int k = 0; k < n; ++k) substep(cmd, h);
  ++step_index_;

  const bool finite = base_.position.allFinite() && base_.linear_velocity.allFinite() &&
                      base_.angular_velocity.allFinite() &&
                      base_.orientation.coeffs().allFinite();
  if (!finite) throw SimulationDiverged(step_index_);

  base_.angular_acceleration = (base_.angular_velocity - prev_omega_) / kControlDt;
  prev_omega_ = base_.angular_velocity;
  update_sensors();
  return sensors_;
}

void World::update_sensors() {
  const Mat3 rot_t = base_.rotation().transpose();
  for (LegId leg : kAllLegs) {
    const int i = leg_index(leg);
    const RigidTransform chain = leg_chain_transform(leg, joints_[i], spec_.params.geometry);
    const Vec3 reported = reported_joint_reaction(chain, rot_t * contact_world_[i]);
    sensors_.f_joint[i] = ground_reaction_joint_frame(reported);
    sensors_.f_base[i] = grf_to_base_frame(sensors_.f_joint[i], chain);
    sensors_.contact[i] = contact_from_force(sensors_.f_base[i], spec_.params.contact_threshold);
  }
  sensors_.imu.roll = base_.roll();
  sensors_.imu.pitch = base_.pitch();
  sensors_.imu.omega = base_.angular_velocity;
  sensors_.imu.nu = base_.angular_acceleration;
}

void apply_ball_disturbance(World& world, const Ball& ball) {
  if (ball.mass == 0.0 || ball.speed == 0.0) return;
  world.apply_impulse(ball.impulse());
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Running: return "running";
    case Outcome::Fell: return "fell";
    case Outcome::ReachedGoal: return "reached_goal";
    case Outcome::TimedOut: return "timed_out";
  }
  return "?";
}

Outcome check_termination(const TerminationInput& s, long elapsed_steps,
                          const TerminationCriteria& c) {
  if (std::abs(s.roll) > c.fall_angle || std::abs(s.pitch) > c.fall_angle ||
      s.clearance < c.fall_height_fraction * c.stand_height) {
    return Outcome::Fell;
  }
  if (s.distance >= c.goal_distance) return Outcome::ReachedGoal;
  if (elapsed_steps >= c.max_steps) return Outcome::TimedOut;
  return Outcome::Running;
}

TerminationInput termination_input(const World& world, double start_x) {
  const BaseState& b = world.base();
  return {b.roll(), b.pitch(), world.base_clearance(), b.position.x() - start_x};
}

TrajectoryWriter::TrajectoryWriter(std::ostream& out) : out_(out) {
  out_ << "t,x,y,z,roll,pitch,yaw,vx,vy,vz,wx,wy,wz";
  for (LegId leg : kAllLegs) {
    for (const char* axis : {"fx", "fy", "fz"}) out_ << ',' << leg_name(leg) << '_' << axis;
  }
  for (LegId leg : kAllLegs) out_ << ',' << leg_name(leg) << "_contact";
  for (LegId leg : kAllLegs) {
    for (const char* j : {"hip", "shoulder", "knee"}) out_ << ',' << leg_name(leg) << '_' << j;
  }
  out_ << '\n';
}

void TrajectoryWriter::row(const World& world) {
  const BaseState& b = world.base();
  const SensorReadings& s = world.sensors();
  out_ << std::setprecision(10) << world.time() << ',' << b.position.x() << ','
       << b.position.y() << ',' << b.position.z() << ',' << b.roll() << ',' << b.pitch()
       << ',' << b.yaw() << ',' << b.linear_velocity.x() << ',' << b.linear_velocity.y()
       << ',' << b.linear_velocity.z() << ',' << b.angular_velocity.x() << ','
       << b.angular_velocity.y() << ',' << b.angular_velocity.z();
  for (const Vec3& f : s.f_base) out_ << ',' << f.x() << ',' << f.y() << ',' << f.z();
  for (int c : s.contact) out_ << ',' << c;
  for (const auto& j : world.joint_angles()) out_ << ',' << j.hip << ',' << j.shoulder << ',' << j.knee;
  out_ << '\n';
}

}  // namespace quadtrain
