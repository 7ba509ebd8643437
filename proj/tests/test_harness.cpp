#include "pursuit/harness.hpp"
#include "pursuit/scenarios.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace pursuit;

TEST(Metrics, FixtureDefinitions) {
  const std::vector<EpisodeOutcome> eps{{300, 300, 3, false}, {std::nullopt, 800, 0, false}, {400, 400, 8, false}};
  const SeedMetrics m = summarize_episodes(eps, 800);
  EXPECT_DOUBLE_EQ(m.capture_rate, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.capture_step, 500.0);
  EXPECT_DOUBLE_EQ(m.collision_rate, (0.01 + 0.0 + 0.02) / 3);
}

TEST(Metrics, PopulationStdAcrossSeeds) {
  std::vector<SeedMetrics> seeds(2);
  seeds[0].capture_rate = 0.2;
  seeds[1].capture_rate = 0.6;
  const Metrics m = aggregate(seeds);
  EXPECT_DOUBLE_EQ(m.capture_rate, 0.4);
  EXPECT_NEAR(m.capture_rate_std, 0.2, 1e-15);
  EXPECT_EQ(format_mean_std(0.4, 0.2), "0.400(0.200)");
}

TEST(Scenarios, AllBuildValidTasks) {
  EnvConfig env;
  for (const auto& name : scenario_names()) {
    const ScenarioSpec spec = make_scenario(*parse_scenario(name));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const TaskParams t = build_scenario(spec, env, seed);
      ASSERT_TRUE(validate_task(t, env).ok()) << name;
    }
  }
  EXPECT_FALSE(parse_scenario("maze").has_value());
}

TEST(Scenarios, RandomHidesEvader) {
  EnvConfig env;
  const ScenarioSpec spec = make_scenario(ScenarioName::random);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TaskParams t = build_scenario(spec, env, seed);
    for (const Vec3& p : t.pursuer_starts) EXPECT_FALSE(line_of_sight(p, t.evader_start, t.obstacles, 0.1));
  }
}

TEST(Scenarios, WallSeparatesSides) {
  EnvConfig env;
  const TaskParams t = build_scenario(make_scenario(ScenarioName::wall), env, 3);
  EXPECT_EQ(t.obstacles.size(), 5u);
  EXPECT_GT(t.evader_start.x(), 0.0);
  for (const Vec3& p : t.pursuer_starts) EXPECT_LT(p.x(), 0.0);
  EXPECT_EQ(make_scenario(ScenarioName::narrow_gap).obstacles.size(), 4u);
}

TEST(Evaluate, DeterministicAcrossWorkerCounts) {
  const EnvParts parts;
  const auto factory = make_policy_factory("janosov", {}, parts);
  const ScenarioSpec spec = make_scenario(ScenarioName::uniform);
  EvaluateOptions one{6, {1, 2}, 1};
  EvaluateOptions four{6, {1, 2}, 4};
  const Metrics a = evaluate(factory, spec, parts, one);
  EXPECT_EQ(a, evaluate(factory, spec, parts, four));
  EXPECT_EQ(a, evaluate(factory, spec, parts, one));
  EXPECT_EQ(a.episodes, 12);
  EXPECT_EQ(a.per_seed.size(), 2u);
}

TEST(Evaluate, IdleNeverCaptures) {
  const EnvParts parts;
  const Metrics m =
      evaluate(make_policy_factory("idle", {}, parts), make_scenario(ScenarioName::obstacle_free), parts, {3, {1}, 1});
  EXPECT_EQ(m.capture_rate, 0.0);
  EXPECT_EQ(m.capture_step, 800.0);
}

TEST(Evaluate, RadiusSweepSharesStarts) {
  const EnvParts parts;
  const std::vector<double> radii{0.3, 0.6, 2.0};
  const auto rows = radius_sweep(make_policy_factory("angelani", {}, parts), parts, radii, {10, {1}, 1});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LE(rows[0].metrics.capture_rate, rows[1].metrics.capture_rate);
  EXPECT_EQ(rows[2].metrics.capture_rate, 1.0);  // covers the whole arena
  EXPECT_EQ(rows[2].metrics.capture_step, 1.0);
}

TEST(GridSearch, ExpandAndSelect) {
  const std::map<std::string, std::vector<double>> grid{{"a", {1, 2}}, {"b", {3, 4, 5}}};
  const auto points = expand_grid(grid);
  ASSERT_EQ(points.size(), 6u);
  EXPECT_EQ(points[1].at("b"), 4.0);
  EXPECT_EQ(points[3].at("a"), 2.0);

  std::vector<GridRow> rows(3);
  rows[0].metrics.capture_rate = 0.5;
  rows[1].metrics.capture_rate = 0.5;
  rows[1].metrics.capture_step = 300;
  rows[0].metrics.capture_step = 400;
  rows[2].metrics.capture_rate = 0.4;
  EXPECT_EQ(select_best(rows), 1u);
  rows[0].metrics.capture_step = 300;
  rows[0].metrics.collision_rate = 0.01;
  rows[1].metrics.collision_rate = 0.02;
  EXPECT_EQ(select_best(rows), 0u);
}

TEST(GridSearch, RunsOverPolicyFamily) {
  const EnvParts parts;
  const PolicyFamily family = [&](const ParamPoint& p) {
    PoliciesConfig cfg;
    cfg.apf.influence_radius = p.at("r");
    return make_policy_factory("apf", cfg, parts);
  };
  const auto result = grid_search(family, {{"r", {0.2, 0.3}}}, make_scenario(ScenarioName::wall), parts, {2, {1}, 1});
  EXPECT_EQ(result.table.size(), 2u);
  EXPECT_LT(result.best, 2u);
}

TEST(Export, RewardsRoundTrip) {
  const EnvParts parts;
  Env env(parts);
  auto policy = make_policy_factory("hover", {}, parts)();
  const TaskParams task = build_scenario(make_scenario(ScenarioName::uniform), parts.env, 4);
  std::vector<EpisodeTrace> traces{record_episode(env, *policy, task, 4)};
  const auto path = std::filesystem::temp_directory_path() / "pursuit_export_test.jsonl";
  export_trajectories(traces, path);
  const auto lines = read_trajectory_rewards(path);
  ASSERT_EQ(lines.size(), traces[0].ticks.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i].tick, traces[0].ticks[i].tick);
    EXPECT_EQ(lines[i].reward, traces[0].ticks[i].reward);
  }
  std::filesystem::remove(path);
}

TEST(Bench, CountsTicks) {
  const BenchReport r = run_bench(EnvParts{}, 4, 50, 2, 1);
  EXPECT_EQ(r.ticks, 200);
  EXPECT_GT(r.ticks_per_second(), 0.0);
}
