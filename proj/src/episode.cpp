#include "quadtrain/episode.hpp"

#include <algorithm>
#include <cmath>

namespace quadtrain {

LinearPolicyController::LinearPolicyController(PolicyMatrix policy, GaitParams gait,
                                               ActionBounds bounds)
    : policy_(std::move(policy)), gait_(gait), bounds_(bounds) {
  gait_.validate();
}

JointCommands LinearPolicyController::command(const World& world, const GaitPhase& phase) {
  const SimParams& sp = world.params();
  const Eigen::VectorXd obs =
      build_observation(policy_.variant(), world.sensors(), phase, sp.robot.weight());
  last_action_ = act(policy_, obs, bounds_);

  GaitParams gait = gait_;
  gait.clearance_height = last_action_.clearance;
  gait.penetration_depth = last_action_.penetration;
  const FootTargetSet targets =
      mix_actions(gait_targets(phase, gait, neutral_targets(sp)), last_action_.deltas);
  return joint_commands_for_targets(targets, sp.geometry);
}

JointCommands joint_commands_for_targets(const FootTargetSet& targets, const LegGeometry& geom) {
  JointCommands cmd;
  for (LegId leg : kAllLegs) {
    const int i = leg_index(leg);
    cmd[i] = leg_inverse_kinematics(leg, targets[i], geom).angles;
  }
  return cmd;
}

FootTargetSet neutral_targets(const SimParams& params) {
  FootTargetSet out;
  for (LegId leg : kAllLegs) {
    out[leg_index(leg)] = neutral_foot_hip_frame(leg, params.geometry, params.stand_height);
  }
  return out;
}

double step_reward(double dx, double roll, double pitch, const Vec3& omega) {
  return dx - 10.0 * (std::abs(roll) + std::abs(pitch)) - 0.03 * omega.cwiseAbs().sum();
}

EpisodeResult run_episode(World& world, Controller& controller, GaitPhase phase,
                          const TerminationCriteria& criteria, const EpisodeHooks& hooks) {
  EpisodeResult result;
  const double start_x = world.base().position.x();
  double prev_x = start_x;
  while (true) {
    if (hooks.before_step) hooks.before_step(world);
    const JointCommands cmd = controller.command(world, phase);
    world.step(cmd);
    phase = advance_phase(phase, kControlDt);
    ++result.steps;

    const BaseState& b = world.base();
    const double x = b.position.x();
    const double r = step_reward(x - prev_x, b.roll(), b.pitch(), b.angular_velocity);
    prev_x = x;
    result.return_sum += r;
    if (hooks.after_step) hooks.after_step(world, r);

    result.outcome = check_termination(termination_input(world, start_x), result.steps, criteria);
    if (result.outcome != Outcome::Running) break;
  }
  result.distance = std::max(0.0, world.base().position.x() - start_x);
  return result;
}

}  // namespace quadtrain
