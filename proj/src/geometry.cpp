#include "pursuit/geometry.hpp"

#include <algorithm>

namespace pursuit {

bool Arena::contains(const Vec3& p, double margin) const {
  return p.head<2>().norm() <= radius - margin && p.z() >= margin && p.z() <= height - margin;
}

bool Arena::clip(Vec3& p) const {
  bool moved = false;
  const double r = p.head<2>().norm();
  if (r > radius) {
    p.head<2>() *= radius / r;
    moved = true;
  }
  if (p.z() < 0.0) {
    p.z() = 0.0;
    moved = true;
  } else if (p.z() > height) {
    p.z() = height;
    moved = true;
  }
  return moved;
}

bool segment_hits_disk(const Vec2& a, const Vec2& b, const Vec2& center, double radius) {
  const Vec2 ab = b - a;
  const double len_sq = ab.squaredNorm();
  double t = 0.0;
  if (len_sq > 0.0) t = std::clamp((center - a).dot(ab) / len_sq, 0.0, 1.0);
  const Vec2 closest = a + t * ab;
  return (closest - center).squaredNorm() <= radius * radius;
}

bool line_of_sight(const Vec3& a, const Vec3& b, std::span<const Vec2> obstacles, double obstacle_radius) {
  const Vec2 a2 = a.head<2>();
  const Vec2 b2 = b.head<2>();
  return std::none_of(obstacles.begin(), obstacles.end(),
                      [&](const Vec2& c) { return segment_hits_disk(a2, b2, c, obstacle_radius); });
}

double horizontal_distance(const Vec3& p, const Vec2& c) { return (p.head<2>() - c).norm(); }

}  // namespace pursuit
