#include "oracles.hpp"
#include "pursuit/evader.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pursuit;

namespace {

struct Scene {
  Vec3 evader;
  Vec3List pursuers;
  std::vector<Vec2> obstacles;
};

Scene random_scene(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  auto point = [&](double z_lo, double z_hi) {
    const double r = 0.8 * std::sqrt(u(rng)), a = 6.283185307179586 * u(rng);
    return Vec3(r * std::cos(a), r * std::sin(a), z_lo + (z_hi - z_lo) * u(rng));
  };
  Scene s;
  s.evader = point(0.1, 1.1);
  for (int i = 0; i < 3; ++i) s.pursuers.push_back(point(0.1, 1.1));
  for (int i = 0; i < 4; ++i) s.obstacles.push_back(point(0, 0).head<2>());
  return s;
}

}  // namespace

TEST(Evader, ForceMatchesResummation) {
  std::mt19937_64 rng(5);
  const Arena arena{0.9, 1.2};
  EvaderConfig cfg;
  for (int i = 0; i < 1000; ++i) {
    const Scene s = random_scene(rng);
    const Vec3 got = evader_force(s.evader, s.pursuers, {s.obstacles, 0.1}, arena, cfg);
    const Vec3 want = oracle::evader_force(s.evader, s.pursuers, s.obstacles, 0.1, 0.9, 1.2, cfg);
    ASSERT_LE((got - want).norm(), 1e-9 * std::max(1.0, want.norm()));
  }
}

TEST(Evader, ConstantSpeedStep) {
  std::mt19937_64 rng(6);
  const Arena arena{0.9, 1.2};
  EvaderConfig cfg;
  const double dt = 0.01;
  for (int i = 0; i < 200; ++i) {
    Scene s = random_scene(rng);
    s.evader = Vec3(0.2, -0.1, 0.6);
    const Vec3 f = evader_force(s.evader, s.pursuers, {s.obstacles, 0.1}, arena, cfg);
    const auto m = evader_step(s.evader, Vec3::UnitX(), f, dt, arena, cfg);
    EXPECT_NEAR((m.position - s.evader).norm(), 1.3 * dt, 1e-12);
    EXPECT_NEAR(m.heading.norm(), 1.0, 1e-12);
  }
}

TEST(Evader, DirectionInvariantToWeightScale) {
  std::mt19937_64 rng(8);
  const Arena arena{0.9, 1.2};
  EvaderConfig base;
  for (int i = 0; i < 200; ++i) {
    const Scene s = random_scene(rng);
    const double c = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
    EvaderConfig scaled = base;
    scaled.w_pursuer *= c;
    scaled.w_obstacle *= c;
    scaled.w_boundary *= c;
    const Vec3 a = evader_force(s.evader, s.pursuers, {s.obstacles, 0.1}, arena, base);
    const Vec3 b = evader_force(s.evader, s.pursuers, {s.obstacles, 0.1}, arena, scaled);
    EXPECT_LT((a.normalized() - b.normalized()).norm(), 1e-9);
  }
}

TEST(Evader, FleesSinglePursuer) {
  const Arena arena{0.9, 1.2};
  EvaderConfig cfg;
  cfg.w_boundary = 0;
  const Vec3 e(0.1, 0.0, 0.6);
  const Vec3List p{Vec3(-0.2, 0.0, 0.6)};
  const Vec3 f = evader_force(e, p, {}, arena, cfg);
  EXPECT_GT(f.normalized().dot((e - p[0]).normalized()), 1 - 1e-12);
}

TEST(Evader, ZeroForceKeepsHeading) {
  const Arena arena{0.9, 1.2};
  EvaderConfig cfg;
  const Vec3 heading = Vec3(1, 1, 0).normalized();
  const auto m = evader_step(Vec3(0, 0, 0.6), heading, Vec3::Zero(), 0.01, arena, cfg);
  EXPECT_EQ(m.heading, heading);
  EXPECT_NEAR((m.position - Vec3(0, 0, 0.6)).norm(), 0.013, 1e-12);
}

TEST(Evader, StepClippedToArena) {
  const Arena arena{0.9, 1.2};
  EvaderConfig cfg;
  const auto m = evader_step(Vec3(0.895, 0, 0.6), Vec3::UnitX(), Vec3::UnitX(), 0.01, arena, cfg);
  EXPECT_LE(m.position.head<2>().norm(), 0.9 + 1e-12);
}

TEST(Evader, PlanarHoldsAltitude) {
  const Arena arena{0.9, 1.2};
  EvaderConfig cfg;
  cfg.planar = true;
  const Vec3List p{Vec3(0, 0, 0.2)};
  const Vec3 f = evader_force(Vec3(0.1, 0, 0.6), p, {}, arena, cfg);
  EXPECT_EQ(f.z(), 0.0);
}

TEST(Evader, RepelledByNearbyObstacle) {
  const Arena arena{0.9, 1.2};
  EvaderConfig cfg;
  cfg.w_boundary = 0;
  cfg.w_pursuer = 0;
  const std::vector<Vec2> obs{Vec2(0.2, 0)};
  const Vec3 f = evader_force(Vec3(0.0, 0, 0.6), {}, {obs, 0.1}, arena, cfg);
  EXPECT_NEAR(f.x(), -cfg.w_obstacle / 0.1, 1e-12);
}
