#pragma once

#include "voxpath/grid.hpp"

#include <cstdint>
#include <vector>

namespace voxpath {

/// One ellipsoid of the synthetic test object. Interior intensity is
/// intensity_base plus a linear shading term, clipped to [0,1], so the
/// object interior is inhomogeneous.
struct EllipsoidSpec {
  Vec3 center = Vec3::Zero();           // world units
  Vec3 semi_axes = Vec3::Ones();        // > 0, world units
  double intensity_base = 1.0;          // in [0,1]
  Vec3 intensity_gradient = Vec3::Zero();  // per world unit

  bool contains(const Vec3& p) const {
    const Vec3 q = (p - center).cwiseQuotient(semi_axes);
    return q.squaredNorm() <= 1.0;
  }
};

enum class MetricVariant {
  ConvexCombination,  // phi = alpha + (1-alpha) exp(-beta |grad I|)
  PaperLiteral,       // phi = alpha + (1 - alpha exp(-beta |grad I|))
};

struct MetricParams {
  double alpha = 0.01;
  double beta = 14.0;
  MetricVariant variant = MetricVariant::ConvexCombination;
  double epsilon_floor = 1e-4;
};

/// Synthesizes the intensity volume: max of the ellipsoid interiors, zero
/// background, additive Gaussian noise from a deterministic seed, final clip
/// to [0,1]. Throws std::invalid_argument for an empty spec list, dims < 16
/// per axis, or negative noise_sigma.
ScalarField3 make_phantom(const std::vector<EllipsoidSpec>& specs, const Vec3i& dims,
                          const Vec3& spacing, double noise_sigma, std::uint64_t seed,
                          const Vec3& origin = Vec3::Zero());

/// |grad I| per voxel via the grid gradient stencil.
ScalarField3 gradient_magnitude(const ScalarField3& intensity);

/// Builds the edge-attracted slowness phi from an intensity volume; small
/// where the gradient magnitude is high. Output floored at epsilon_floor.
/// Throws std::invalid_argument unless alpha is in (0,1) and beta > 0.
ScalarField3 build_metric(const ScalarField3& intensity, const MetricParams& params);

}  // namespace voxpath
