#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "quadtrain/episode.hpp"
#include "quadtrain/errors.hpp"
#include "quadtrain/sim.hpp"
#include "quadtrain/terrain.hpp"

namespace quadtrain {
namespace {

const double kDeg = M_PI / 180.0;

TEST(Terrain, FlatAndZeroHeightRough) {
  const Terrain flat = Terrain::flat();
  const Terrain zero = generate_rough_terrain(0.0, 1.0, 7);
  for (double x : {-3.0, 0.0, 0.37, 55.5, 200.0}) {
    EXPECT_EQ(flat.height(x, 0.2), 0.0);
    EXPECT_EQ(zero.height(x, -1.3), 0.0);
    EXPECT_EQ(zero.normal(x, 0.0), Vec3::UnitZ());
  }
}

TEST(Terrain, RoughNodesInRangeAndDeterministic) {
  const Terrain a = generate_rough_terrain(0.104, 1.0, 42);
  const Terrain b = generate_rough_terrain(0.104, 1.0, 42);
  const Terrain c = generate_rough_terrain(0.104, 1.0, 43);
  ASSERT_FALSE(a.nodes().empty());
  EXPECT_EQ(a.nodes(), b.nodes());
  EXPECT_NE(a.nodes(), c.nodes());
  for (double h : a.nodes()) {
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 0.104);
  }
}

TEST(Terrain, RoughNormalMatchesNumericalGradient) {
  const Terrain t = generate_rough_terrain(0.104, 1.0, 3);
  const double e = 1e-6;
  for (double x : {0.3, 1.7, 10.21}) {
    for (double y : {-0.4, 0.05, 2.6}) {
      const double dhdx = (t.height(x + e, y) - t.height(x - e, y)) / (2 * e);
      const double dhdy = (t.height(x, y + e) - t.height(x, y - e)) / (2 * e);
      const Vec3 want = Vec3(-dhdx, -dhdy, 1.0).normalized();
      EXPECT_LT((t.normal(x, y) - want).norm(), 1e-6) << x << "," << y;
      EXPECT_NEAR(t.normal(x, y).norm(), 1.0, 1e-12);
    }
  }
}

TEST(Terrain, SlopeCourses) {
  const Terrain up = make_slope_course(8 * kDeg, SlopeDirection::Up);
  EXPECT_EQ(up.height(0.5, 0.0), 0.0);
  EXPECT_NEAR(up.height(2.0, 0.0), 0.14054, 1e-5);
  const Terrain down = make_slope_course(8 * kDeg, SlopeDirection::Down);
  EXPECT_EQ(down.height(1.0, 0.0), 0.0);
  EXPECT_NEAR(down.height(2.0, 0.0), -0.5 * std::tan(8 * kDeg), 1e-12);
  EXPECT_NEAR(down.height(5.0, 0.0), down.height(2.0, 0.0), 1e-12);
  for (const Terrain* t : {&up, &down}) {
    for (double x : {1.0, 1.5, 2.0}) {
      EXPECT_LT(std::abs(t->height(x + 1e-12, 0.0) - t->height(x - 1e-12, 0.0)), 1e-9);
    }
  }
  const Terrain level = make_slope_course(0.0, SlopeDirection::Up);
  EXPECT_EQ(level.height(3.0, 0.0), 0.0);
  EXPECT_THROW(make_slope_course(M_PI / 4, SlopeDirection::Up), DomainError);
  EXPECT_THROW(slope_direction_from_string("sideways"), ConfigError);
}

TEST(World, FreeBodyAtRestWithoutGravity) {
  WorldSpec spec;
  spec.params.robot.gravity = 0.0;
  World world(spec);
  BaseState high;
  high.position = Vec3(0.2, -0.1, 1.5);
  high.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Vec3::UnitZ()));
  const JointCommands pose = world.standing_pose();
  world.set_state(high, pose);
  for (int i = 0; i < 200; ++i) world.step(pose);
  EXPECT_EQ(world.base().position, high.position);
  EXPECT_LT((world.base().rotation() - high.rotation()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(world.base().linear_velocity, Vec3::Zero());
  EXPECT_EQ(world.base().angular_velocity, Vec3::Zero());
  for (int c : world.sensors().contact) EXPECT_EQ(c, 0);
}

TEST(World, FreeFallMatchesGravity) {
  World world(WorldSpec{});
  BaseState high;
  high.position = Vec3(0, 0, 50.0);
  world.set_state(high, world.standing_pose());
  for (int i = 0; i < 100; ++i) world.step(world.standing_pose());
  // Semi-implicit Euler, 1000 substeps of 1 ms: v = g t exactly, z within h*g*t/2.
  EXPECT_NEAR(world.base().linear_velocity.z(), -9.81, 1e-9);
  EXPECT_NEAR(world.base().position.z(), 50.0 - 0.5 * 9.81, 0.01);
}

TEST(World, StandingSettlesAndCarriesWeight) {
  World world(WorldSpec{});
  const JointCommands pose = world.standing_pose();
  for (int i = 0; i < 500; ++i) world.step(pose);
  Vec3 total = Vec3::Zero();
  for (const Vec3& f : world.sensors().f_base) {
    EXPECT_GT(f.z(), 0.0);
    total += f;
  }
  EXPECT_NEAR(total.norm(), 28.6, 0.05 * 28.6);
  EXPECT_LT(std::abs(std::atan2(total.x(), total.z())), 0.5 * kDeg);
  // No energy injection: stays put for another 10 s.
  double fastest = 0.0;
  for (int i = 0; i < 1000; ++i) {
    world.step(pose);
    fastest = std::max(fastest, world.base().linear_velocity.norm());
  }
  EXPECT_LT(fastest, 1e-3);
}

TEST(World, SensorChainConsistentEveryStep) {
  WorldSpec spec;
  spec.terrain = TerrainSpec::rough(0.05, 1.0, 9);
  World world(spec);
  LinearPolicyController ctrl(PolicyMatrix(ObservationVariant::Imu), GaitParams{});
  GaitPhase phase = GaitPhase::trot();
  const double threshold = spec.params.contact_threshold;
  for (int i = 0; i < 400; ++i) {
    world.step(ctrl.command(world, phase));
    phase = advance_phase(phase, kControlDt);
    const auto& s = world.sensors();
    for (LegId leg : kAllLegs) {
      const int k = leg_index(leg);
      const RigidTransform chain =
          leg_chain_transform_unchecked(leg, world.joint_angles()[k], spec.params.geometry);
      EXPECT_LT((grf_to_base_frame(s.f_joint[k], chain) - s.f_base[k]).norm(), 1e-12);
      EXPECT_NEAR(s.f_joint[k].norm(), s.f_base[k].norm(), 1e-9);
      EXPECT_EQ(s.contact[k], contact_from_force(s.f_base[k], threshold));
      // Ground force expressed in the world agrees with the base-frame reading.
      EXPECT_LT((world.base().rotation() * s.f_base[k] - world.contact_forces_world()[k]).norm(), 1e-9);
      const Vec3 p = world.foot_position_world(leg);
      EXPECT_GE(world.contact_forces_world()[k].dot(world.terrain().normal(p.x(), p.y())), -1e-9);
    }
    const Mat3 r = world.base().rotation();
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(World, DeterministicTrajectories) {
  auto run = [] {
    WorldSpec spec;
    spec.terrain = TerrainSpec::rough(0.104, 1.0, 21);
    World world(randomize_episode(spec, 77));
    LinearPolicyController ctrl(PolicyMatrix(ObservationVariant::ImuForce), GaitParams{});
    GaitPhase phase = GaitPhase::trot();
    std::ostringstream log;
    TrajectoryWriter writer(log);
    for (int i = 0; i < 300; ++i) {
      world.step(ctrl.command(world, phase));
      phase = advance_phase(phase, kControlDt);
      writer.row(world);
    }
    return log.str();
  };
  EXPECT_EQ(run(), run());
}

TEST(World, TrajectoryHeader) {
  std::ostringstream out;
  TrajectoryWriter w(out);
  World world(WorldSpec{});
  w.row(world);
  std::string header;
  std::istringstream in(out.str());
  std::getline(in, header);
  EXPECT_EQ(header.rfind("t,x,y,z,roll,pitch,yaw,vx,vy,vz,wx,wy,wz,FL_fx,FL_fy,FL_fz,FR_fx", 0), 0u)
      << header;
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 13 + 4 * 7 - 1);
  EXPECT_NE(header.find(",BR_contact,FL_hip,"), std::string::npos);
}

TEST(World, NonFiniteStateThrowsDiverged) {
  World world(WorldSpec{});
  world.apply_impulse(Vec3(std::nan(""), 0, 0));
  try {
    world.step(world.standing_pose());
    FAIL() << "expected SimulationDiverged";
  } catch (const SimulationDiverged& e) {
    EXPECT_EQ(e.step(), 1);
  }
}

TEST(Disturbance, BallMomentum) {
  World world(WorldSpec{});
  const double m = world.params().robot.mass;
  const Vec3 before = m * world.base().linear_velocity;
  const Ball ball;
  EXPECT_DOUBLE_EQ(ball.impulse().norm(), 1.75);
  apply_ball_disturbance(world, ball);
  const Vec3 change = m * world.base().linear_velocity - before;
  EXPECT_NEAR(change.x(), 0.0, 1e-15);
  EXPECT_NEAR(change.y(), 1.75, 1e-12);
  EXPECT_NEAR(change.z(), 0.0, 1e-15);
  EXPECT_NEAR(world.base().linear_velocity.y(), 1.75 / 2.915, 1e-12);

  World other(WorldSpec{});
  apply_ball_disturbance(other, Ball{0.0, 3.5, Vec3::UnitY()});
  EXPECT_EQ(other.base().linear_velocity, Vec3::Zero());
}

TEST(Randomization, RangesDeterminismAndPassthrough) {
  WorldSpec nominal;
  nominal.terrain = TerrainSpec::rough(0.104, 1.0, 0);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const WorldSpec r = randomize_episode(nominal, seed);
    EXPECT_GE(r.params.robot.mass, 2.62);
    EXPECT_LE(r.params.robot.mass, 3.21);
    EXPECT_GE(r.params.contact.mu, 0.6);
    EXPECT_LE(r.params.contact.mu, 1.0);
    EXPECT_GE(r.params.servo_tau, 0.03 * 0.8 - 1e-15);
    EXPECT_LE(r.params.servo_tau, 0.03 * 1.2 + 1e-15);
    const WorldSpec again = randomize_episode(nominal, seed);
    EXPECT_EQ(again.params.robot.mass, r.params.robot.mass);
    EXPECT_EQ(again.terrain, r.terrain);
  }
  EXPECT_NE(randomize_episode(nominal, 1).terrain.seed, randomize_episode(nominal, 2).terrain.seed);
  RandomizationRanges off;
  off.enabled = false;
  const WorldSpec same = randomize_episode(nominal, 5, off);
  EXPECT_EQ(same.params.robot.mass, nominal.params.robot.mass);
  EXPECT_EQ(same.params.contact.mu, nominal.params.contact.mu);
  EXPECT_EQ(same.terrain, nominal.terrain);
}

TEST(Termination, Classification) {
  const TerminationCriteria c;
  TerminationInput s;
  EXPECT_EQ(check_termination(s, 10, c), Outcome::Running);
  s.roll = 1.2;
  EXPECT_EQ(check_termination(s, 10, c), Outcome::Fell);
  s.roll = 0.0;
  s.pitch = -0.95;
  EXPECT_EQ(check_termination(s, 10, c), Outcome::Fell);
  s.pitch = 0.0;
  s.clearance = 0.39 * 0.19;
  EXPECT_EQ(check_termination(s, 10, c), Outcome::Fell);
  s.clearance = 0.19;
  s.distance = 100.0;
  EXPECT_EQ(check_termination(s, 30000, c), Outcome::ReachedGoal);
  s.distance = 40.0;
  EXPECT_EQ(check_termination(s, 50000, c), Outcome::TimedOut);
  EXPECT_EQ(check_termination(s, 49999, c), Outcome::Running);
  // A fall on the last step still counts as a fall.
  s.roll = 1.0;
  EXPECT_EQ(check_termination(s, 50000, c), Outcome::Fell);
}

TEST(SimParams, ValidateRejectsNonsense) {
  SimParams p;
  p.robot.mass = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = SimParams{};
  p.substeps = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = SimParams{};
  p.stand_height = 0.25;
  EXPECT_THROW(p.validate(), ConfigError);
  p = SimParams{};
  p.contact.mu = -0.1;
  EXPECT_THROW(p.validate(), ConfigError);
}

}  // namespace
}  // namespace quadtrain
