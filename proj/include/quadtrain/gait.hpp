#pragma once

#include <array>

#include "quadtrain/kinematics.hpp"

namespace quadtrain {

// Per-leg phase in [0, 1), indexed by leg_index().
struct GaitPhase {
  std::array<double, 4> phase{};
  std::array<double, 4> offsets{};
  double cycle_period = 0.4;

  // FL/BR at offset 0, FR/BL at offset 0.5.
  static GaitPhase trot(double cycle_period = 0.4);

  double operator[](LegId leg) const { return phase[leg_index(leg)]; }
};

GaitPhase advance_phase(const GaitPhase& phase, double dt);

struct GaitParams {
  double clearance_height = 0.03;
  double penetration_depth = 0.005;
  double step_length = 0.04;
  double step_velocity_scale = 1.0;  // multiplies step_length
  double duty_factor = 0.6;

  void validate() const;
};

// Swing control polygon as (x, z) multipliers of (step/2, clearance). Twelve
// points, mirror-symmetric about mid-swing.
inline constexpr std::array<std::array<double, 2>, 12> kSwingControlPolygon = {{
    {-1.0, 0.0},
    {-1.4, 0.0},
    {-1.5, 0.9},
    {-1.5, 0.9},
    {-1.5, 0.9},
    {0.0, 1.1},
    {0.0, 1.1},
    {1.5, 0.9},
    {1.5, 0.9},
    {1.5, 0.9},
    {1.4, 0.0},
    {1.0, 0.0},
}};

// Hip-frame displacement of the foot from its neutral stance position.
// Stance (s < duty): x sweeps +L/2 -> -L/2, z = -penetration * sin(pi u).
// Swing: Bezier over kSwingControlPolygon, apex z = clearance.
Vec3 foot_trajectory(double s, const GaitParams& params);

using FootTargetSet = std::array<Vec3, 4>;

// neutral + foot_trajectory(phase_l) for every leg.
FootTargetSet gait_targets(const GaitPhase& phase, const GaitParams& params,
                           const FootTargetSet& neutral);

FootTargetSet mix_actions(const FootTargetSet& bezier_targets,
                          const std::array<Vec3, 4>& deltas);

}  // namespace quadtrain
