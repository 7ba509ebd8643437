#pragma once

#include "pursuit/types.hpp"

#include <span>

namespace pursuit {

/// Vertical cylinder of the given radius/height with its base centred on the origin.
struct Arena {
  double radius = 0.9;
  double height = 1.2;

  bool contains(const Vec3& p, double margin = 0.0) const;
  /// Clamps into the cylinder; returns true if the point had to move.
  bool clip(Vec3& p) const;
  Vec3 center() const { return {0.0, 0.0, height / 2}; }
};

/// Full-height cylindrical obstacles, so occlusion reduces to segment-vs-disk in the plane.
bool segment_hits_disk(const Vec2& a, const Vec2& b, const Vec2& center, double radius);

bool line_of_sight(const Vec3& a, const Vec3& b, std::span<const Vec2> obstacles, double obstacle_radius);

double horizontal_distance(const Vec3& p, const Vec2& c);

}  // namespace pursuit
