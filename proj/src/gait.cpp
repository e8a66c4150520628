#include "quadtrain/gait.hpp"

#include <cmath>

#include "quadtrain/errors.hpp"

namespace quadtrain {

namespace {

double wrap_unit(double s) {
  s -= std::floor(s);
  return s >= 1.0 ? 0.0 : s;
}

// Bernstein-form evaluation of the swing polygon at u in [0, 1].
std::array<double, 2> swing_polygon_point(double u) {
  constexpr int n = static_cast<int>(kSwingControlPolygon.size()) - 1;
  std::array<double, 2> out{0.0, 0.0};
  double binom = 1.0;
  for (int i = 0; i <= n; ++i) {
    const double basis = binom * std::pow(u, i) * std::pow(1.0 - u, n - i);
    out[0] += basis * kSwingControlPolygon[i][0];
    out[1] += basis * kSwingControlPolygon[i][1];
    binom = binom * (n - i) / (i + 1);
  }
  return out;
}

// Height of the unit polygon at mid-swing; the curve peaks there.
const double kSwingApex = swing_polygon_point(0.5)[1];

}  // namespace

GaitPhase GaitPhase::trot(double cycle_period) {
  GaitPhase g;
  g.cycle_period = cycle_period;
  g.offsets = {0.0, 0.5, 0.5, 0.0};
  g.phase = g.offsets;
  return g;
}

GaitPhase advance_phase(const GaitPhase& phase, double dt) {
  GaitPhase next = phase;
  const double ds = dt / phase.cycle_period;
  for (double& s : next.phase) s = wrap_unit(s + ds);
  return next;
}

void GaitParams::validate() const {
  if (!(clearance_height >= 0.0)) throw ConfigError("gait: clearance_height must be >= 0");
  if (!(penetration_depth >= 0.0)) throw ConfigError("gait: penetration_depth must be >= 0");
  if (!(duty_factor > 0.0 && duty_factor < 1.0)) {
    throw ConfigError("gait: duty_factor must be in (0, 1)");
  }
}

Vec3 foot_trajectory(double s, const GaitParams& params) {
  s = wrap_unit(s);
  const double half_step = 0.5 * params.step_length * params.step_velocity_scale;
  if (s < params.duty_factor) {
    const double u = s / params.duty_factor;
    return {half_step * (1.0 - 2.0 * u), 0.0,
            -params.penetration_depth * std::sin(M_PI * u)};
  }
  const double u = (s - params.duty_factor) / (1.0 - params.duty_factor);
  const auto p = swing_polygon_point(u);
  return {half_step * p[0], 0.0, params.clearance_height * p[1] / kSwingApex};
}

FootTargetSet gait_targets(const GaitPhase& phase, const GaitParams& params,
                           const FootTargetSet& neutral) {
  FootTargetSet out;
  for (LegId leg : kAllLegs) {
    const int i = leg_index(leg);
    out[i] = neutral[i] + foot_trajectory(phase.phase[i], params);
  }
  return out;
}

FootTargetSet mix_actions(const FootTargetSet& bezier_targets,
                          const std::array<Vec3, 4>& deltas) {
  FootTargetSet out;
  for (int i = 0; i < 4; ++i) out[i] = bezier_targets[i] + deltas[i];
  return out;
}

}  // namespace quadtrain
