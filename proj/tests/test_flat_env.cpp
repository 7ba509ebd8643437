#include "pursuit/flat_env.hpp"
#include "pursuit/scenarios.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pursuit;
using nlohmann::json;

TEST(FlatEnv, DefaultDimensions) {
  FlatEnv env(json::object());
  EXPECT_EQ(env.n_pursuers(), 3);
  EXPECT_EQ(env.obs_dim(), 25 + 6 + 9);
  const json d = layout_descriptor(EnvConfig{});
  EXPECT_EQ(d.at("obs_dim"), 40);
  EXPECT_EQ(d.at("fields").back().at("offset").get<int>() + 3, 40);
}

TEST(FlatEnv, InvalidConfigNamesField) {
  try {
    FlatEnv env(json{{"env", {{"capture_radius", -1.0}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "env.capture_radius");
  }
}

TEST(FlatEnv, ResetMatchesNative) {
  FlatEnv flat(json::object());
  const FlatMatrix obs = flat.reset("wall", 7);
  ASSERT_EQ(obs.rows(), 3);
  ASSERT_EQ(obs.cols(), flat.obs_dim());

  Env native(EnvParts{});
  const auto task = build_scenario(make_scenario(ScenarioName::wall), EnvConfig{}, 7);
  const auto o = native.reset(task, 7);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(obs.row(i).transpose(), o[i].flat());

  EXPECT_THROW(flat.reset("maze", 1), std::invalid_argument);
}

TEST(FlatEnv, StepsMatchNativeBitExactly) {
  FlatEnv flat(json::object());
  Env native(EnvParts{});
  const auto task = build_scenario(make_scenario(ScenarioName::uniform), EnvConfig{}, 3);
  flat.reset(task_to_json(task), 3);
  native.reset(task, 3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 1000 && !native.done(); ++t) {
    std::vector<double> a(12);
    std::vector<CtbrCommand> cmds;
    for (int i = 0; i < 3; ++i) {
      a[4 * i] = 0.5 + 0.2 * u(rng);
      for (int k = 1; k < 4; ++k) a[4 * i + k] = u(rng);
      cmds.push_back(CtbrCommand{a[4 * i], Vec3(a[4 * i + 1], a[4 * i + 2], a[4 * i + 3])});
    }
    const FlatStep f = flat.step(a, 3, 4);
    const StepResult n = native.step(cmds);
    ASSERT_EQ(f.reward, n.reward.total);
    ASSERT_EQ(f.done, n.done);
    ASSERT_EQ(f.observations, flatten_observations(n.observations));
    ASSERT_EQ(f.info.at("collisions"), n.info.collisions);
  }
}

TEST(FlatEnv, ShapeMismatchLeavesStateUnchanged) {
  FlatEnv flat(json::object());
  flat.reset("obstacle_free", 2);
  const std::vector<double> bad(8, 0.5);
  EXPECT_THROW(flat.step(bad, 2, 4), std::invalid_argument);
  std::vector<double> nan(12, 0.5);
  nan[3] = std::nan("");
  EXPECT_THROW(flat.step(nan, 3, 4), std::invalid_argument);
  EXPECT_EQ(flat.native().step_count(), 0);
}

TEST(FlatEnv, StepAfterDoneThrowsAndResetReuses) {
  FlatEnv flat(json{{"env", {{"max_steps", 3}}}});
  flat.reset("obstacle_free", 2);
  const std::vector<double> a(12, 0.4);
  for (int i = 0; i < 3; ++i) flat.step(a, 3, 4);
  EXPECT_TRUE(flat.native().done());
  EXPECT_THROW(flat.step(a, 3, 4), std::logic_error);
  flat.reset("obstacle_free", 3);
  EXPECT_NO_THROW(flat.step(a, 3, 4));
}

TEST(FlatEnv, HandlesAreIndependentAndBatched) {
  std::vector<std::unique_ptr<FlatEnv>> owned;
  std::vector<FlatEnv*> envs;
  for (int i = 0; i < 64; ++i) {
    owned.push_back(std::make_unique<FlatEnv>(json::object()));
    owned.back()->reset("uniform", i);
    envs.push_back(owned.back().get());
  }
  const std::vector<double> actions(64 * 3 * 4, 0.45);
  const auto out = step_batch(envs, actions, 4);
  ASSERT_EQ(out.size(), 64u);
  for (const FlatEnv* e : envs) EXPECT_EQ(e->native().step_count(), 1);
  EXPECT_THROW(step_batch(envs, std::vector<double>(10, 0.1)), std::invalid_argument);

  // stepping one handle does not touch another
  FlatEnv a(json::object()), b(json::object());
  a.reset("wall", 1);
  b.reset("wall", 1);
  a.step(std::vector<double>(12, 0.5), 3, 4);
  EXPECT_EQ(b.native().step_count(), 0);
}

TEST(FlatEnv, CurriculumSessionMatchesNativeLoop) {
  json cfg{{"curriculum", {{"batch_size", 8}}}};
  DistanceThresholdEvaluator ev(0.4, 1.0);
  const SimConfig sim = config_from_json(cfg);
  const auto native = curriculum_loop(ev, sim.curriculum, sim.parts.env, 12, 5);

  CurriculumSession session(cfg, 5);
  for (int it = 0; it < 12; ++it) {
    const auto batch = session.next_batch();
    std::vector<double> rates;
    for (std::size_t i = 0; i < batch.size(); ++i)
      rates.push_back(ev.success_rate(task_from_json(batch[i]), session.task_seed(i), session.eval_episodes(), 0));
    session.submit(rates);
  }
  EXPECT_EQ(session.archive(), native.archive);

  CurriculumSession s2(cfg, 5);
  const auto batch = s2.next_batch();
  EXPECT_THROW(s2.next_batch(), std::logic_error);
  EXPECT_THROW(s2.submit(std::vector<double>(batch.size(), -0.1)), std::invalid_argument);
}

TEST(FlatEnv, CAbi) {
  EXPECT_EQ(pursuit_api_version(), kFlatApiVersion);
  EXPECT_EQ(pursuit_env_create("{\"env\": {\"capture_radius\": 0}}"), nullptr);
  EXPECT_NE(std::string(pursuit_last_error()).find("env.capture_radius"), std::string::npos);

  pursuit_env* h = pursuit_env_create("{}");
  ASSERT_NE(h, nullptr);
  const int n = pursuit_env_n_pursuers(h), dim = pursuit_env_obs_dim(h);
  std::vector<double> obs(n * dim);
  ASSERT_EQ(pursuit_env_reset(h, "wall", 1, obs.data()), 0);
  std::vector<double> a(n * 4, 0.45), info(5);
  double reward = 0;
  int done = 0;
  ASSERT_EQ(pursuit_env_step(h, a.data(), n, 4, obs.data(), &reward, &done, info.data()), 0);
  EXPECT_EQ(pursuit_env_step(h, a.data(), n, 3, obs.data(), &reward, &done, info.data()), 1);
  pursuit_env_destroy(h);

  for (int i = 0; i < 10000; ++i) pursuit_env_destroy(pursuit_env_create("{}"));
}
