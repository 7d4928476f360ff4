#pragma once

#include "voxpath/grid.hpp"

#include <cstdint>
#include <vector>

namespace voxpath {

/// User-supplied cutting plane: a point and a unit normal.
struct PlaneSpec {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();

  /// Normalizes the normal; throws voxpath::config_error when it is
  /// numerically zero.
  static PlaneSpec make(const Vec3& point, const Vec3& normal);

  double signed_distance(const Vec3& p) const { return normal.dot(p - point); }
};

/// Linear indices of voxels whose center lies within h/2 of the plane
/// (h = smallest spacing), ascending order.
std::vector<std::int64_t> rasterize_plane(const GridLayout& grid, const PlaneSpec& plane);

}  // namespace voxpath
