#include "voxpath/plane.hpp"

#include "voxpath/errors.hpp"

namespace voxpath {

PlaneSpec PlaneSpec::make(const Vec3& point, const Vec3& normal) {
  const double n = normal.norm();
  if (n < 1e-12) throw config_error("plane normal must be non-zero");
  return PlaneSpec{point, normal / n};
}

std::vector<std::int64_t> rasterize_plane(const GridLayout& grid, const PlaneSpec& plane) {
  std::vector<std::int64_t> out;
  const double half = 0.5 * grid.min_spacing();
  const Vec3i d = grid.dims;
  std::int64_t n = 0;
  for (int z = 0; z < d.z(); ++z)
    for (int y = 0; y < d.y(); ++y)
      for (int x = 0; x < d.x(); ++x, ++n) {
        const Vec3 p = grid.position(Vec3i(x, y, z));
        if (std::abs(plane.signed_distance(p)) <= half) out.push_back(n);
      }
  return out;
}

}  // namespace voxpath
