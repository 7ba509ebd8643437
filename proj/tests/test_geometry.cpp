#include "oracles.hpp"
#include "pursuit/geometry.hpp"
#include "pursuit/task.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pursuit;

TEST(Geometry, ArenaContainsAndClip) {
  const Arena arena{0.9, 1.2};
  EXPECT_TRUE(arena.contains(Vec3(0.5, 0.5, 0.6)));
  EXPECT_FALSE(arena.contains(Vec3(0.85, 0, 0.6), 0.07));
  Vec3 p(2.0, 0.0, -1.0);
  EXPECT_TRUE(arena.clip(p));
  EXPECT_NEAR(p.x(), 0.9, 1e-15);
  EXPECT_EQ(p.z(), 0.0);
  Vec3 q(0.1, 0.1, 0.5);
  EXPECT_FALSE(arena.clip(q));
}

TEST(Geometry, SegmentDiskCases) {
  EXPECT_TRUE(segment_hits_disk(Vec2(-1, 0), Vec2(1, 0), Vec2(0, 0.05), 0.1));
  EXPECT_FALSE(segment_hits_disk(Vec2(-1, 0), Vec2(1, 0), Vec2(0, 0.2), 0.1));
  // disk beyond an endpoint
  EXPECT_FALSE(segment_hits_disk(Vec2(-1, 0), Vec2(-0.5, 0), Vec2(0, 0), 0.1));
  // exact tangency counts as blocked
  EXPECT_TRUE(segment_hits_disk(Vec2(-1, 0.1), Vec2(1, 0.1), Vec2(0, 0), 0.1));
  // degenerate segment
  EXPECT_TRUE(segment_hits_disk(Vec2(0, 0), Vec2(0, 0), Vec2(0.05, 0), 0.1));
}

TEST(Geometry, LineOfSightIgnoresAltitude) {
  const std::vector<Vec2> obstacles{Vec2(0, 0)};
  EXPECT_FALSE(line_of_sight(Vec3(-0.5, 0, 0.1), Vec3(0.5, 0, 1.1), obstacles, 0.1));
  EXPECT_TRUE(line_of_sight(Vec3(-0.5, 0.3, 0.1), Vec3(0.5, 0.3, 1.1), obstacles, 0.1));
  EXPECT_TRUE(line_of_sight(Vec3(-0.5, 0, 0.1), Vec3(0.5, 0, 1.1), {}, 0.1));
}

TEST(Geometry, LineOfSightMatchesSampling) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  int disagreements = 0;
  for (int i = 0; i < 500; ++i) {
    const Vec3 a(u(rng), u(rng), 0.5), b(u(rng), u(rng), 0.5);
    const std::vector<Vec2> obs{Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng))};
    double tangency = 0;
    const bool expect = oracle::sampled_line_of_sight(a, b, obs, 0.1, 1e-4, &tangency);
    if (line_of_sight(a, b, obs, 0.1) != expect) {
      ++disagreements;
      EXPECT_LT(tangency, 1e-4);
    }
  }
  EXPECT_LE(disagreements, 5);
}

TEST(Task, ValidTaskPasses) {
  EnvConfig cfg;
  TaskParams t;
  t.obstacles = {Vec2(0, 0), Vec2(0.4, 0)};
  t.pursuer_starts = {Vec3(-0.5, 0, 0.5), Vec3(-0.5, 0.3, 0.5), Vec3(-0.5, -0.3, 0.5)};
  t.evader_start = Vec3(0.5, 0.4, 0.6);
  const auto report = validate_task(t, cfg);
  EXPECT_TRUE(report.ok()) << report.summary();
}

TEST(Task, ViolationsAreReported) {
  EnvConfig cfg;
  TaskParams t;
  t.obstacles = {Vec2(0, 0), Vec2(0.15, 0), Vec2(0.85, 0)};
  t.pursuer_starts = {Vec3(-0.5, 0, 0.5), Vec3(-0.5, 0.01, 0.5), Vec3(0.0, 0.12, 0.5)};
  t.evader_start = Vec3(-0.45, 0.0, 0.6);
  const auto report = validate_task(t, cfg);
  ASSERT_FALSE(report.ok());
  const std::string s = report.summary();
  EXPECT_NE(s.find("overlap"), std::string::npos);
  EXPECT_NE(s.find("not inside arena"), std::string::npos);
  EXPECT_NE(s.find("within clearance of obstacle"), std::string::npos);
  EXPECT_NE(s.find("pursuers 0 and 1"), std::string::npos);
  EXPECT_NE(s.find("capture"), std::string::npos);

  t.pursuer_starts.pop_back();
  EXPECT_NE(validate_task(t, cfg).summary().find("expected 3 pursuer starts"), std::string::npos);
}
