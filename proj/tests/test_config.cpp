#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "quadtrain/config.hpp"
#include "quadtrain/errors.hpp"

namespace quadtrain {
namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}

std::string render(const RunConfig& c) {
  std::ostringstream out;
  write_config(out, c);
  return out.str();
}

TEST(Config, EmptyFileGivesDefaults) {
  const RunConfig c = parse("");
  EXPECT_EQ(render(c), render(RunConfig{}));
  EXPECT_EQ(c.seed, 0u);
  EXPECT_EQ(c.jobs, 1);
  EXPECT_EQ(c.variant, ObservationVariant::Imu);
  EXPECT_EQ(c.ars.n_rollouts, 16);
  EXPECT_EQ(c.ars.top_b, 8);
  EXPECT_DOUBLE_EQ(c.control.gait.duty_factor, 0.6);
  EXPECT_DOUBLE_EQ(c.trained_height, 0.104);
  EXPECT_DOUBLE_EQ(c.deployed_height, 0.128);
}

TEST(Config, WriteParseRoundTrip) {
  RunConfig c;
  c.seed = 1234567890123ULL;
  c.output_dir = "runs/a";
  c.jobs = 3;
  c.sim.contact.k_n = 4321.5;
  c.variant = ObservationVariant::ImuForce;
  c.ars.one_sided = true;
  c.ars.n_rollouts = 7;
  c.ars.top_b = 3;
  c.ars.learning_rate = 0.1 + 0.2;  // not exactly representable in short decimal
  c.epochs = 12;
  c.slope_angle_deg = -6.5;
  c.grf.sample_window = 17;
  const std::string text = render(c);
  EXPECT_EQ(render(parse(text)), text);
  const RunConfig back = parse(text);
  EXPECT_EQ(back.ars.learning_rate, c.ars.learning_rate);
  EXPECT_EQ(back.variant, ObservationVariant::ImuForce);
  EXPECT_TRUE(back.ars.one_sided);
}

TEST(Config, EveryDocumentedKeyIsWritten) {
  const std::string text = render(RunConfig{});
  std::set<std::string> seen;
  for (const ConfigKey& k : config_keys()) {
    EXPECT_FALSE(k.help.empty()) << k.name;
    EXPECT_TRUE(seen.insert(k.section + "." + k.name).second) << "duplicate " << k.name;
    EXPECT_NE(text.find("\n" + k.name + " = "), std::string::npos) << k.name;
  }
}

TEST(Config, OverridesApplyOnTopOfBase) {
  RunConfig base;
  base.epochs = 7;
  std::istringstream in("seed = 9\n[ars]\nlearning_rate = 0.02\n");
  const RunConfig c = parse_config(in, "x.ini", base);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.epochs, 7);
  EXPECT_DOUBLE_EQ(c.ars.learning_rate, 0.02);
}

TEST(Config, UnknownKeysAndSectionsAreRejected) {
  EXPECT_THROW(parse("sed = 1\n"), ConfigError);
  EXPECT_THROW(parse("[ars]\nlearning_rat = 0.1\n"), ConfigError);
  EXPECT_THROW(parse("[arz]\nlearning_rate = 0.1\n"), ConfigError);
  // Keys only exist in their own section.
  EXPECT_THROW(parse("[sim]\nlearning_rate = 0.1\n"), ConfigError);
  try {
    parse("[gait]\nduty = 0.5\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("duty"), std::string::npos);
  }
}

TEST(Config, MalformedValuesAreRejected) {
  EXPECT_THROW(parse("seed = -1\n"), ConfigError);
  EXPECT_THROW(parse("jobs = two\n"), ConfigError);
  EXPECT_THROW(parse("jobs = 2.5\n"), ConfigError);
  EXPECT_THROW(parse("[sim]\nmass = 3kg\n"), ConfigError);
  EXPECT_THROW(parse("[sim]\nmass = nan\n"), ConfigError);
  EXPECT_THROW(parse("[ars]\none_sided = maybe\n"), ConfigError);
  EXPECT_THROW(parse("[policy]\nvariant = imu_vision\n"), ConfigError);
  EXPECT_THROW(parse("[sim\n"), ConfigError);
}

TEST(Config, SemanticValidation) {
  EXPECT_THROW(parse("jobs = 0\n"), ConfigError);
  EXPECT_THROW(parse("[gait]\nduty_factor = 1.0\n"), ConfigError);
  EXPECT_THROW(parse("[ars]\nn_rollouts = 15\n"), ConfigError);
  EXPECT_THROW(parse("[ars]\ntop_b = 9\n"), ConfigError);
  EXPECT_THROW(parse("[sim]\ncontact_threshold = 0\n"), ConfigError);
  EXPECT_THROW(parse("[harness]\nslope_angle_deg = 45\n"), ConfigError);
  EXPECT_NO_THROW(parse("[ars]\none_sided = true\nn_rollouts = 15\n"));
}

TEST(Config, DerivedSettingsCarryValues) {
  const RunConfig c = parse("seed = 5\njobs = 2\n[harness]\nepisodes = 7\nmax_steps = 900\n");
  const ScenarioSettings s = c.scenario_settings();
  EXPECT_EQ(s.seed, 5u);
  EXPECT_EQ(s.jobs, 2);
  EXPECT_EQ(s.episodes, 7);
  EXPECT_EQ(s.criteria.max_steps, 900);
}

}  // namespace
}  // namespace quadtrain
