#pragma once

#include "voxpath/eikonal.hpp"
#include "voxpath/phantom.hpp"
#include "voxpath/plane.hpp"

#include <string>
#include <vector>

namespace voxpath {

/// Closed boundary of the object's cross-section on the user plane, ordered,
/// lifted back to world space.
struct Contour {
  std::vector<Vec3> points;
  bool closed = false;
  bool degenerate = false;  // closed but with fewer than 12 points

  std::size_t size() const { return points.size(); }
};

/// One minimal path from a contour seed down to the zero set, with the
/// interpolated action at every point. Action values strictly decrease.
struct Path {
  std::vector<Vec3> points;
  std::vector<double> action;
  bool failed = false;

  double euclidean_length() const;
};

/// Minimal paths from every seed of a contour, ordered by seed index.
struct PathNetwork {
  std::vector<Path> paths;
  bool seeds_closed = false;  // seed contour was a closed loop
  std::string provenance;

  std::size_t converged_count() const;
  std::size_t failed_count() const;
};

/// Resamples the intensity on a 2D lattice spanning the plane (spacing h,
/// trilinear), extracts the iso-contour by marching squares and returns the
/// longest closed loop. Throws voxpath::detection_error when no closed
/// contour exists; loops shorter than 12 points are flagged degenerate.
Contour detect_plane_contour(const ScalarField3& intensity, const PlaneSpec& plane,
                             double iso);

/// Arclength-uniform resampling to exactly n points (closed contours wrap).
Contour resample_contour(const Contour& contour, int n);

/// Fixed-step normalized gradient descent on the arrival map from a seed to
/// the zero set. step <= 0 and eps_stop <= 0 select the defaults h/2 and
/// 0.5*h*phi_min. max_iters <= 0 selects 10 * max_extent / step. The path
/// is flagged failed when it stops above eps_stop.
Path backtrace(const ArrivalMap& map, const Vec3& seed, double step = 0.0,
               double eps_stop = 0.0, std::int64_t max_iters = 0);

/// Backtraces from every contour point. Throws voxpath::solver_error when
/// more than 20% of the paths fail; otherwise failed paths are retained and
/// flagged.
PathNetwork build_network(const ArrivalMap& map, const Contour& contour,
                          double step = 0.0, double eps_stop = 0.0);

/// Total weighted length: sum over converged paths of the quadrature of
/// phi ds (phi sampled at segment midpoints).
double network_energy(const PathNetwork& net, const ScalarField3& phi);

/// Fraction of surface voxels whose center lies within `radius` of some
/// segment of a converged path. Exact point-segment distances.
double surface_coverage(const PathNetwork& net, const VoxelMask& surface, double radius);

/// Ground-truth surface voxels of a union of ellipsoids: inside voxels with
/// at least one outside 6-neighbor (neighbors beyond the grid are ignored).
VoxelMask reference_surface_mask(const std::vector<EllipsoidSpec>& specs,
                                 const Vec3i& dims, const Vec3& spacing,
                                 const Vec3& origin = Vec3::Zero());

}  // namespace voxpath
