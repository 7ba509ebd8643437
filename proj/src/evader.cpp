#include "pursuit/evader.hpp"

#include <algorithm>

namespace pursuit {

Vec3 evader_force(const Vec3& evader_p, std::span<const Vec3> pursuers, const ObstacleField& obstacles,
                  const Arena& arena, const EvaderConfig& cfg) {
  const double eps = cfg.eps_dist;
  Vec3 force = Vec3::Zero();

  for (const Vec3& p : pursuers) {
    const Vec3 away = evader_p - p;
    const double d = away.norm();
    if (d > 0.0) force += cfg.w_pursuer * (away / d) / std::max(d, eps);
  }

  for (const Vec2& c : obstacles.centers) {
    const Vec2 away = evader_p.head<2>() - c;
    const double d_center = away.norm();
    if (d_center <= 0.0) continue;
    const double d_surface = d_center - obstacles.radius;
    force.head<2>() += cfg.w_obstacle * (away / d_center) / std::max(d_surface, eps);
  }

  const double r = evader_p.head<2>().norm();
  if (r > 0.0) {
    const Vec2 inward = -evader_p.head<2>() / r;
    force.head<2>() += cfg.w_boundary * inward / std::max(arena.radius - r, eps);
  }
  force.z() += cfg.w_boundary / std::max(evader_p.z(), eps);
  force.z() -= cfg.w_boundary / std::max(arena.height - evader_p.z(), eps);

  if (cfg.planar) force.z() = 0.0;
  return force;
}

EvaderMotion evader_step(const Vec3& evader_p, const Vec3& prev_heading, const Vec3& force, double dt,
                         const Arena& arena, const EvaderConfig& cfg) {
  const double n = force.norm();
  const Vec3 heading = n > 1e-9 ? Vec3(force / n) : prev_heading;
  Vec3 next = evader_p + cfg.speed * dt * heading;
  arena.clip(next);
  return {next, heading};
}

}  // namespace pursuit
