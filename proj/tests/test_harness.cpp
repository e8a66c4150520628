#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "quadtrain/errors.hpp"
#include "quadtrain/harness.hpp"

namespace quadtrain {
namespace {

PolicyEntry fixed_pose_entry(std::string id, std::string group, JointCommands pose) {
  return {std::move(id), std::move(group), [pose] { return std::make_unique<FixedPoseController>(pose); }};
}

JointCommands uniform_pose(double shoulder, double knee) {
  JointCommands q;
  q.fill({0.0, shoulder, knee});
  return q;
}

JointCommands standing() { return World(WorldSpec{}).standing_pose(); }

ScenarioSettings quick_settings(int episodes, long max_steps) {
  ScenarioSettings s;
  s.episodes = episodes;
  s.criteria.max_steps = max_steps;
  s.seed = 21;
  return s;
}

TEST(SurvivalTable, BucketEdgesAndTotals) {
  const std::array<double, 2> e{5.0, 90.0};
  EXPECT_EQ(SurvivalTable::bucket_of(0.0, e), 0);
  EXPECT_EQ(SurvivalTable::bucket_of(4.999, e), 0);
  EXPECT_EQ(SurvivalTable::bucket_of(5.0, e), 1);
  EXPECT_EQ(SurvivalTable::bucket_of(90.0, e), 1);
  EXPECT_EQ(SurvivalTable::bucket_of(90.001, e), 2);
  SurvivalTable t;
  t.add(1.0, false);
  t.add(50.0, true);
  t.add(100.0, true);
  t.add(100.0, false);
  EXPECT_EQ(t.total(), 4);
  EXPECT_EQ(t.alive_total(), 2);
  EXPECT_EQ(t.count(2, true), 1);
  EXPECT_EQ(t.bucket_label(0), "0-5m");
  EXPECT_EQ(t.bucket_label(1), "5-90m");
  EXPECT_EQ(t.bucket_label(2), ">90m");
}

TEST(Outcomes, OnlyFallingIsDeath) {
  EXPECT_FALSE(is_alive(Outcome::Fell));
  EXPECT_TRUE(is_alive(Outcome::ReachedGoal));
  EXPECT_TRUE(is_alive(Outcome::TimedOut));
}

TEST(Survival, CollapsingStubIsAlwaysDeadNearStart) {
  const std::vector<PolicyEntry> p = {fixed_pose_entry("collapse", "stub", uniform_pose(0.0, 2.0))};
  const ScenarioResult r = run_survival(p, 0.104, quick_settings(6, 2000));
  ASSERT_EQ(r.records.size(), 6u);
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.outcome, Outcome::Fell);
    EXPECT_LT(rec.distance, 5.0);
  }
  const SurvivalTable& t = r.tables.at("stub");
  EXPECT_EQ(t.count(0, false), 6);
  EXPECT_EQ(t.total(), 6);
  EXPECT_EQ(t.alive_total(), 0);
}

TEST(Slope, StandingStubTimesOutInFirstBucket) {
  const std::vector<PolicyEntry> p = {fixed_pose_entry("stand", "stub", standing())};
  const ScenarioResult r = run_slope(p, 8.0 * M_PI / 180.0, SlopeDirection::Up, quick_settings(3, 400));
  EXPECT_EQ(r.scenario, "slope_up_8");
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.outcome, Outcome::TimedOut);
    EXPECT_LT(rec.distance, 1.0);
    EXPECT_EQ(rec.steps, 400);
  }
  EXPECT_EQ(r.tables.at("stub").count(0, true), 3);
}

TEST(Survival, EpisodesArePairedAcrossPoliciesAndIndependentOfJobs) {
  const ControlSettings control;
  const std::vector<PolicyEntry> p = {make_policy_entry("a", PolicyMatrix(ObservationVariant::Imu), control),
                                      make_policy_entry("b", PolicyMatrix(ObservationVariant::ImuContacts), control),
                                      fixed_pose_entry("c", "stub", standing())};
  ScenarioSettings s = quick_settings(3, 300);
  const ScenarioResult serial = run_survival(p, 0.05, s);
  s.jobs = 2;
  const ScenarioResult parallel = run_survival(p, 0.05, s);
  std::ostringstream a, b;
  write_episode_csv(a, serial.records);
  write_episode_csv(b, parallel.records);
  EXPECT_EQ(a.str(), b.str());
  for (int e = 0; e < 3; ++e) {
    EXPECT_EQ(serial.records[e].seed, serial.records[3 + e].seed);
    EXPECT_EQ(serial.records[e].seed, serial.records[6 + e].seed);
  }
  EXPECT_EQ(serial.tables.size(), 3u);
  std::istringstream in(a.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "policy,scenario,seed,distance_m,steps,outcome,alive");
}

TEST(Heights, DeltaIsDeployedMinusTrained) {
  const std::vector<PolicyEntry> p = {fixed_pose_entry("stand", "stub", standing())};
  const HeightGeneralization h = run_height_generalization(p, quick_settings(2, 200), 0.0, 0.02);
  EXPECT_EQ(h.alive_delta.at("stub"),
            h.deployed.tables.at("stub").alive_total() - h.trained.tables.at("stub").alive_total());
  std::ostringstream out;
  write_height_csv(out, h);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "policy,scenario,seed,distance_m,steps,outcome,alive,trained_height,deployed_height");
}

TEST(Disturbance, BallRaisesPeakAndBiggerBallMore) {
  const PolicyEntry walker = make_policy_entry("zero", PolicyMatrix(ObservationVariant::Imu), ControlSettings{});
  const ScenarioSettings s;
  DisturbanceSettings d;
  d.ball_time = 2.0;
  d.duration_after = 3.0;
  DisturbanceSettings none = d;
  none.ball.mass = 0.0;
  DisturbanceSettings big = d;
  big.ball.speed = 2.0 * d.ball.speed;

  const DisturbanceResult control = run_disturbance(walker, none, s);
  const DisturbanceResult hit = run_disturbance(walker, d, s);
  const DisturbanceResult harder = run_disturbance(walker, big, s);
  EXPECT_EQ(hit.series.size(), 500u);
  EXPECT_GT(hit.peak_roll, control.peak_roll);
  EXPECT_GE(harder.peak_roll, hit.peak_roll);
  // Identical before the hit.
  for (int k = 0; k < 199; ++k) EXPECT_EQ(hit.series[k].roll, control.series[k].roll) << k;
  if (hit.recovery_time) EXPECT_GE(*hit.recovery_time, 0.0);

  std::ostringstream series, summary;
  write_time_series_csv(series, hit.series);
  write_disturbance_summary(summary, hit);
  EXPECT_EQ(series.str().substr(0, 15), "t,roll,pitch,x,");
  EXPECT_NE(summary.str().find("recovery_time_s,"), std::string::npos);
}

TEST(Grf, StandingRobotPassesOnFlatAndFiveDegrees) {
  for (double deg : {0.0, 5.0}) {
    const GrfReport r = verify_grf(deg * M_PI / 180.0, SimParams{}, 3);
    EXPECT_EQ(r.status, GrfStatus::Pass) << deg;
    EXPECT_NEAR(r.resultant, 28.6, 0.05 * 28.6);
    EXPECT_NEAR(r.tilt_deg, deg, 0.5);
    EXPECT_TRUE(r.feet_push);
    EXPECT_GE(r.sample_step, 500);
    EXPECT_LT(r.sample_step, 600);
  }
}

TEST(Grf, ReportLayoutAndSampleDeterminism) {
  const GrfReport a = verify_grf(0.0, SimParams{}, 77);
  const GrfReport b = verify_grf(0.0, SimParams{}, 77);
  std::ostringstream sa, sb;
  write_grf_report(sa, a);
  write_grf_report(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, 15), "foot,fx,fy,fz\nF");
  EXPECT_NE(sa.str().find("\nTotal,"), std::string::npos);
  EXPECT_NE(sa.str().find("\nstatus,pass\n"), std::string::npos);
  EXPECT_EQ(sa.str().find("-0.000"), std::string::npos);
}

TEST(Grf, WrongWeightFailsAndMovingRobotIsInconclusive) {
  GrfSettings wrong;
  wrong.nominal_weight = 40.0;
  EXPECT_EQ(verify_grf(0.0, SimParams{}, 1, wrong).status, GrfStatus::Fail);
  GrfSettings unsettled;
  unsettled.settle_steps = 5;
  unsettled.sample_window = 1;
  unsettled.settled_speed = 0.0;
  EXPECT_EQ(verify_grf(0.0, SimParams{}, 1, unsettled).status, GrfStatus::Inconclusive);
  EXPECT_THROW(verify_grf(M_PI / 4, SimParams{}, 1), DomainError);
}

TEST(Comparison, GoalFractionsAndOrdering) {
  ScenarioResult s;
  for (auto [tag, alive] : {std::pair{"imu", 1}, std::pair{"imu_force", 2}, std::pair{"imu_contacts", 3}}) {
    SurvivalTable t;
    for (int i = 0; i < 4; ++i) t.add(100.0, i < alive);
    s.tables.emplace(tag, t);
  }
  const ComparisonReport c = compare_with_reference(s, s, 5, 4);
  EXPECT_DOUBLE_EQ(c.survival_goal_fraction.at("imu_force"), 0.5);
  EXPECT_TRUE(c.survival_ordering_holds);
  std::ostringstream out;
  write_comparison_report(out, c, s, s);
  EXPECT_NE(out.str().find("survival_gt90m,imu_contacts,3,4,0.75,490,1000,0.49"), std::string::npos) << out.str();
}

}  // namespace
}  // namespace quadtrain
