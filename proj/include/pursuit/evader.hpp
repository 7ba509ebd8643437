#pragma once

// Scripted potential-field evader. Every repulsion term follows a 1/d law and
// the evader moves at constant speed along the normalized resultant.

#include "pursuit/config.hpp"
#include "pursuit/geometry.hpp"

#include <span>

namespace pursuit {

struct ObstacleField {
  std::span<const Vec2> centers;
  double radius = 0.1;
};

Vec3 evader_force(const Vec3& evader_p, std::span<const Vec3> pursuers, const ObstacleField& obstacles,
                  const Arena& arena, const EvaderConfig& cfg);

struct EvaderMotion {
  Vec3 position;
  Vec3 heading;  // unit vector
};

EvaderMotion evader_step(const Vec3& evader_p, const Vec3& prev_heading, const Vec3& force, double dt,
                         const Arena& arena, const EvaderConfig& cfg);

}  // namespace pursuit
