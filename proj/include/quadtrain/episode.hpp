#pragma once

#include <functional>
#include <optional>

#include "quadtrain/gait.hpp"
#include "quadtrain/policy.hpp"
#include "quadtrain/sim.hpp"

namespace quadtrain {

// Maps the current world observation to joint commands each control step.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual JointCommands command(const World& world, const GaitPhase& phase) = 0;
};

// Linear policy modulating the Bezier trot: policy actions set clearance and
// penetration and add per-foot offsets to the gait targets, then IK.
class LinearPolicyController : public Controller {
 public:
  LinearPolicyController(PolicyMatrix policy, GaitParams gait, ActionBounds bounds = {});

  JointCommands command(const World& world, const GaitPhase& phase) override;

  const PolicyMatrix& policy() const { return policy_; }
  const ActionVector& last_action() const { return last_action_; }

 private:
  PolicyMatrix policy_;
  GaitParams gait_;
  ActionBounds bounds_;
  ActionVector last_action_;
};

// Gait and action-range settings shared by training and evaluation.
struct ControlSettings {
  GaitParams gait;
  double cycle_period = 0.4;
  ActionBounds bounds;

  GaitPhase initial_phase() const { return GaitPhase::trot(cycle_period); }
};

// Holds a fixed joint configuration.
class FixedPoseController : public Controller {
 public:
  explicit FixedPoseController(JointCommands pose) : pose_(pose) {}
  JointCommands command(const World&, const GaitPhase&) override { return pose_; }

 private:
  JointCommands pose_;
};

// Joint commands realising a set of hip-frame foot targets.
JointCommands joint_commands_for_targets(const FootTargetSet& targets, const LegGeometry& geom);

FootTargetSet neutral_targets(const SimParams& params);

// r_t = dx - 10 (|roll| + |pitch|) - 0.03 sum |omega_i|
double step_reward(double dx, double roll, double pitch, const Vec3& omega);

struct EpisodeResult {
  double return_sum = 0.0;
  long steps = 0;
  double distance = 0.0;  // max(0, x travelled)
  Outcome outcome = Outcome::Running;

  double return_per_step() const { return steps > 0 ? return_sum / steps : 0.0; }
};

struct EpisodeHooks {
  std::function<void(World&)> before_step;
  std::function<void(const World&, double reward)> after_step;
};

// Steps `world` under `controller` until check_termination reports an end.
// SimulationDiverged propagates to the caller.
EpisodeResult run_episode(World& world, Controller& controller, GaitPhase phase,
                          const TerminationCriteria& criteria, const EpisodeHooks& hooks = {});

}  // namespace quadtrain
