#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace voxpath {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Lattice metadata shared by all volumetric containers. Linear indices run
/// x-fastest: index = x + dims.x * (y + dims.y * z), matching the raw file
/// layout used by the I/O module.
struct GridLayout {
  Vec3i dims = Vec3i::Zero();
  Vec3 spacing = Vec3::Ones();
  Vec3 origin = Vec3::Zero();

  std::int64_t voxel_count() const {
    return std::int64_t(dims.x()) * dims.y() * dims.z();
  }

  bool contains(const Vec3i& i) const {
    return i.x() >= 0 && i.y() >= 0 && i.z() >= 0 && i.x() < dims.x() &&
           i.y() < dims.y() && i.z() < dims.z();
  }

  std::int64_t linear_index(const Vec3i& i) const {
    return i.x() + std::int64_t(dims.x()) * (i.y() + std::int64_t(dims.y()) * i.z());
  }

  Vec3i unflatten(std::int64_t n) const {
    const std::int64_t nx = dims.x();
    const std::int64_t ny = dims.y();
    return Vec3i(int(n % nx), int((n / nx) % ny), int(n / (nx * ny)));
  }

  Vec3 position(const Vec3i& i) const {
    return origin + spacing.cwiseProduct(i.cast<double>());
  }

  Vec3 world_min() const { return origin; }

  Vec3 world_max() const {
    return origin + spacing.cwiseProduct((dims - Vec3i::Ones()).cast<double>());
  }

  double min_spacing() const { return spacing.minCoeff(); }

  bool same_shape(const GridLayout& o) const {
    return dims.x() == o.dims.x() && dims.y() == o.dims.y() && dims.z() == o.dims.z();
  }
};

/// Throws std::invalid_argument unless dims and spacing are strictly positive.
void validate_layout(const GridLayout& grid);

/// Dense scalar lattice. Values are finite except in arrival maps, where
/// unreached voxels hold +infinity.
struct ScalarField3 {
  GridLayout grid;
  std::vector<double> values;

  ScalarField3() = default;
  explicit ScalarField3(const GridLayout& g, double fill = 0.0);

  double at(const Vec3i& i) const { return values[std::size_t(grid.linear_index(i))]; }
  double& at(const Vec3i& i) { return values[std::size_t(grid.linear_index(i))]; }
};

/// One 3-vector per voxel (level-set normals, gradients). A zero vector is
/// the sentinel for an undefined direction.
struct Vec3Field {
  GridLayout grid;
  std::vector<Vec3> values;

  Vec3Field() = default;
  explicit Vec3Field(const GridLayout& g, const Vec3& fill = Vec3::Zero());

  const Vec3& at(const Vec3i& i) const { return values[std::size_t(grid.linear_index(i))]; }
  Vec3& at(const Vec3i& i) { return values[std::size_t(grid.linear_index(i))]; }
};

/// One boolean per voxel (accepted regions, plane rasterizations, surfaces).
struct VoxelMask {
  GridLayout grid;
  std::vector<std::uint8_t> values;

  VoxelMask() = default;
  explicit VoxelMask(const GridLayout& g, bool fill = false);

  bool test(const Vec3i& i) const { return values[std::size_t(grid.linear_index(i))] != 0; }
  bool test(std::int64_t n) const { return values[std::size_t(n)] != 0; }
  void set(const Vec3i& i, bool v = true) { values[std::size_t(grid.linear_index(i))] = v ? 1 : 0; }
  void set(std::int64_t n, bool v = true) { values[std::size_t(n)] = v ? 1 : 0; }
  std::int64_t count() const;
};

/// Finite-difference gradient at a voxel: central differences per axis,
/// one-sided at domain borders or where the opposite neighbor falls outside
/// the mask. Returns the zero vector when some axis has no usable neighbor
/// at all (the caller treats that as undefined). Throws std::out_of_range
/// for indices outside the grid.
Vec3 gradient_at(const ScalarField3& field, const Vec3i& index,
                 const VoxelMask* mask = nullptr);

/// Divergence of a vector field at a voxel, same stencil fallback rules as
/// gradient_at. Neighbors holding the zero sentinel are unusable. Returns
/// nullopt when some axis lacks even a one-sided difference.
std::optional<double> divergence_at(const Vec3Field& vf, const Vec3i& index,
                                    const VoxelMask* mask = nullptr);

/// Unit normals of the level sets of `field`, restricted to `mask`:
/// m = grad/|grad| where |grad| >= 1e-12, the zero sentinel elsewhere.
/// Voxels outside the mask hold the sentinel.
Vec3Field unit_normal_field(const ScalarField3& field, const VoxelMask& mask);

struct CurvatureSample {
  double value = 0.0;
  bool fallback = false;  // stencil unusable; value is 0 (no correction)
};

/// Sum curvature K_S = -div(m) of the level sets of `field` at a voxel,
/// normals restricted to `mask`. Clamped to [-kappa_clamp/h, +kappa_clamp/h]
/// with h the smallest spacing; the discrete stencil cannot resolve radii
/// below one voxel. Falls back to 0 (flagged) where normals are undefined.
CurvatureSample sum_curvature_at(const ScalarField3& field, const VoxelMask& mask,
                                 const Vec3i& index, double kappa_clamp = 0.5);

/// H = K_S / 2.
CurvatureSample mean_curvature_at(const ScalarField3& field, const VoxelMask& mask,
                                  const Vec3i& index, double kappa_clamp = 0.5);

/// Standard trilinear interpolation at a world point. Throws
/// std::out_of_range outside the grid's world bounding box.
double trilinear_sample(const ScalarField3& field, const Vec3& point);

/// Trilinear blend of the per-corner central-difference gradients.
Vec3 trilinear_gradient(const ScalarField3& field, const Vec3& point);

/// Mask-aware variants: corners outside the mask get zero weight and the
/// remaining weights are renormalized. nullopt when no corner is usable or
/// the point is outside the grid. Used by path backtracking, which starts
/// at the outer rim of the accepted region where plain interpolation would
/// touch +infinity sentinels.
std::optional<double> masked_trilinear_sample(const ScalarField3& field,
                                              const VoxelMask& mask, const Vec3& point);
std::optional<Vec3> masked_trilinear_gradient(const ScalarField3& field,
                                              const VoxelMask& mask, const Vec3& point);

/// 3x3x3 Gaussian smoothing (sigma in voxel units, default 0.5), weights
/// renormalized over in-bounds (and masked, if given) neighbors. Voxels
/// outside the mask are copied through unchanged.
ScalarField3 gaussian_smooth3(const ScalarField3& field, double sigma_voxels = 0.5,
                              const VoxelMask* mask = nullptr);

}  // namespace voxpath
