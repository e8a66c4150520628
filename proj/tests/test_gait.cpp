#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "quadtrain/errors.hpp"
#include "quadtrain/gait.hpp"

namespace quadtrain {
namespace {

// Independent copy of the swing polygon, evaluated with de Casteljau.
const std::vector<double> kPolyX = {-1.0, -1.4, -1.5, -1.5, -1.5, 0.0, 0.0, 1.5, 1.5, 1.5, 1.4, 1.0};
const std::vector<double> kPolyZ = {0.0, 0.0, 0.9, 0.9, 0.9, 1.1, 1.1, 0.9, 0.9, 0.9, 0.0, 0.0};

double de_casteljau(std::vector<double> p, double u) {
  for (std::size_t k = p.size() - 1; k > 0; --k) {
    for (std::size_t i = 0; i < k; ++i) p[i] = (1.0 - u) * p[i] + u * p[i + 1];
  }
  return p[0];
}

TEST(Gait, SwingMatchesDeCasteljauOracle) {
  GaitParams p;
  p.clearance_height = 0.045;
  p.step_length = 0.05;
  const double apex = de_casteljau(kPolyZ, 0.5);
  for (int k = 0; k <= 100; ++k) {
    const double u = k / 100.0;
    const double s = p.duty_factor + u * (1.0 - p.duty_factor);
    if (s >= 1.0) continue;
    const Vec3 f = foot_trajectory(s, p);
    EXPECT_NEAR(f.x(), 0.025 * de_casteljau(kPolyX, u), 1e-12) << "u=" << u;
    EXPECT_NEAR(f.z(), 0.045 * de_casteljau(kPolyZ, u) / apex, 1e-12) << "u=" << u;
    EXPECT_EQ(f.y(), 0.0);
  }
}

TEST(Gait, SwingApexEqualsClearanceAndIsTheMaximum) {
  GaitParams p;
  const double mid = p.duty_factor + 0.5 * (1.0 - p.duty_factor);
  EXPECT_NEAR(foot_trajectory(mid, p).z(), p.clearance_height, 1e-12);
  double highest = -1.0;
  for (int k = 0; k < 10000; ++k) highest = std::max(highest, foot_trajectory(k / 10000.0, p).z());
  EXPECT_LE(highest, p.clearance_height + 1e-12);
}

TEST(Gait, StanceSweepsBackwardAndPresses) {
  GaitParams p;
  p.penetration_depth = 0.01;
  const Vec3 start = foot_trajectory(0.0, p);
  EXPECT_NEAR(start.x(), 0.5 * p.step_length, 1e-15);
  EXPECT_NEAR(start.z(), 0.0, 1e-15);
  const Vec3 mid = foot_trajectory(0.5 * p.duty_factor, p);
  EXPECT_NEAR(mid.x(), 0.0, 1e-15);
  EXPECT_NEAR(mid.z(), -0.01, 1e-15);
  // Stance end meets swing start, swing end meets the next stance start.
  const Vec3 before = foot_trajectory(p.duty_factor - 1e-9, p);
  const Vec3 after = foot_trajectory(p.duty_factor, p);
  EXPECT_LT((before - after).norm(), 1e-7);
  EXPECT_LT((foot_trajectory(1.0 - 1e-9, p) - start).norm(), 1e-7);
}

TEST(Gait, ZeroClearanceFlattensSwing) {
  GaitParams p;
  p.clearance_height = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double s = p.duty_factor + k / 100.0 * (1.0 - p.duty_factor);
    EXPECT_EQ(foot_trajectory(s, p).z(), 0.0);
  }
}

TEST(Gait, TrotPairsAreInPhase) {
  GaitPhase g = GaitPhase::trot();
  for (int k = 0; k < 137; ++k) {
    g = advance_phase(g, 0.01);
    EXPECT_DOUBLE_EQ(g[LegId::FL], g[LegId::BR]);
    EXPECT_DOUBLE_EQ(g[LegId::FR], g[LegId::BL]);
    double diff = g[LegId::FR] - g[LegId::FL];
    diff -= std::floor(diff);
    EXPECT_NEAR(diff, 0.5, 1e-9);
  }
}

TEST(Gait, PhaseStaysInUnitIntervalWithoutDrift) {
  GaitPhase g = GaitPhase::trot(0.4);
  const int n = 1000000;
  for (int k = 0; k < n; ++k) {
    g = advance_phase(g, 0.01);
    ASSERT_GE(g.phase[0], 0.0);
    ASSERT_LT(g.phase[0], 1.0);
  }
  // 10^6 steps of 0.025 cycles is a whole number of cycles.
  const double err = std::min(g.phase[0], 1.0 - g.phase[0]);
  EXPECT_LT(err, 1e-6);
}

TEST(Gait, TargetsAddNeutralTrajectoryAndDeltas) {
  GaitParams p;
  const FootTargetSet neutral = {Vec3(0, 0.035, -0.19), Vec3(0, -0.035, -0.19),
                                 Vec3(0, 0.035, -0.19), Vec3(0, -0.035, -0.19)};
  const GaitPhase g = GaitPhase::trot();
  const FootTargetSet t = gait_targets(g, p, neutral);
  for (LegId leg : kAllLegs) {
    const int i = leg_index(leg);
    EXPECT_LT((t[i] - neutral[i] - foot_trajectory(g.phase[i], p)).norm(), 1e-15);
  }
  const std::array<Vec3, 4> d = {Vec3(0.01, 0, 0), Vec3(0, 0.02, 0), Vec3(0, 0, -0.03), Vec3::Zero()};
  const FootTargetSet mixed = mix_actions(t, d);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(mixed[i], t[i] + d[i]);
}

TEST(Gait, ValidateRejectsBadDuty) {
  GaitParams p;
  p.duty_factor = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p.duty_factor = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p.duty_factor = 0.6;
  p.clearance_height = -0.01;
  EXPECT_THROW(p.validate(), ConfigError);
}

}  // namespace
}  // namespace quadtrain
