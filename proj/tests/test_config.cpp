#include "pursuit/config_io.hpp"

#include <gtest/gtest.h>

using namespace pursuit;
using nlohmann::json;

namespace {

std::string field_of(const json& doc) {
  try {
    config_from_json(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  const SimConfig cfg = config_from_json(json::object());
  EXPECT_EQ(cfg.parts.env.capture_radius, 0.3);
  EXPECT_EQ(cfg.parts.env.max_steps, 800);
  EXPECT_EQ(cfg.parts.env.k_nearest_obstacles, 3);
  EXPECT_EQ(cfg.parts.env.mask_value, -5.0);
  EXPECT_EQ(cfg.parts.env.evader_speed, 1.3);
  EXPECT_EQ(cfg.curriculum.expand_probability, 0.7);
  EXPECT_EQ(cfg.curriculum.delta, 0.15);
}

TEST(Config, RoundTrip) {
  SimConfig cfg;
  cfg.parts.env.capture_radius = 0.45;
  cfg.parts.env.reward_stage = RewardStage::two;
  cfg.parts.pid.kp = Vec3(10, 11, 12);
  cfg.policies.apf.influence_radius = 0.25;
  cfg.eval.grid["apf.gain_inter"] = {0.01, 0.1};
  cfg.eval.seeds = {4, 5};
  const json doc = config_to_json(cfg);
  const SimConfig back = config_from_json(doc);
  EXPECT_EQ(config_to_json(back), doc);
  EXPECT_EQ(back.parts.env.capture_radius, 0.45);
  EXPECT_EQ(back.parts.pid.kp, Vec3(10, 11, 12));
  EXPECT_EQ(back.eval.grid.at("apf.gain_inter").size(), 2u);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(field_of({{"env", {{"capture_radius", 0.0}}}}), "env.capture_radius");
  EXPECT_EQ(field_of({{"env", {{"capture_radiuss", 0.3}}}}), "env.capture_radiuss");
  EXPECT_EQ(field_of({{"env", {{"max_steps", "many"}}}}), "env.max_steps");
  EXPECT_EQ(field_of({{"envv", json::object()}}), "envv");
  EXPECT_EQ(field_of({{"curriculum", {{"sigma_min", 0.95}}}}), "curriculum.sigma_min");
  EXPECT_EQ(field_of({{"policies", {{"apf", {{"gain", 1}}}}}}), "policies.apf.gain");
  EXPECT_EQ(field_of({{"quad", {{"mass", -1}}}}), "quad");
  EXPECT_EQ(field_of({{"eval", {{"seeds", json::array()}}}}), "eval.seeds");
  EXPECT_EQ(field_of({{"control", {{"kp", {1, 2}}}}}), "control.kp");
}

TEST(Config, QuadLayoutFromArmAndThrustCap) {
  const SimConfig cfg = config_from_json({{"quad", {{"arm_length", 0.1}, {"f_max", 0.8}}}});
  EXPECT_NEAR(cfg.parts.quad.rotor_pos[0].head<2>().norm(), 0.1, 1e-15);
  EXPECT_EQ(cfg.parts.quad.f_max, 0.8);
  EXPECT_NEAR(4 * cfg.parts.quad.k_f * std::pow(cfg.parts.quad.omega_max, 2), 0.8, 1e-12);
}

TEST(Config, PolicyParamByPath) {
  PoliciesConfig p;
  set_policy_param(p, "janosov.lookahead", 0.9);
  EXPECT_EQ(p.janosov.lookahead, 0.9);
  EXPECT_THROW(set_policy_param(p, "janosov", 1.0), ConfigError);
  EXPECT_THROW(set_policy_param(p, "janosov.nothing", 1.0), ConfigError);
  EXPECT_THROW(set_policy_param(p, "dacoop.gain", 1.0), ConfigError);
}

TEST(Config, TaskJsonRoundTrip) {
  TaskParams t;
  t.obstacles = {Vec2(0.1, 0.2)};
  t.pursuer_starts = {Vec3(0.1, 0.2, 0.3), Vec3(-0.1, 0, 0.5)};
  t.evader_start = Vec3(0.4, 0.4, 0.6);
  EXPECT_EQ(task_from_json(task_to_json(t)), t);
  EXPECT_ANY_THROW(task_from_json(json{{"obstacles", 3}}));
}
