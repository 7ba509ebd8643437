#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <vector>

namespace pursuit {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vec4T = Eigen::Matrix<Scalar, 4, 1>;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

// Fixed-size Eigen members inside std::vector need no special allocator for
// 2/3-vectors, but Vector4d does under some ABIs.
using Vec3List = std::vector<Vec3>;
using Vec4List = std::vector<Vec4, Eigen::aligned_allocator<Vec4>>;

}  // namespace pursuit
