#pragma once

#include "voxpath/grid.hpp"
#include "voxpath/plane.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace voxpath {

enum class VoxelStatus : std::uint8_t { Far = 0, Trial = 1, Accepted = 2 };

/// The distance map under construction: action values plus per-voxel status
/// and acceptance rank. Unreached voxels hold +infinity; accepted action
/// values are non-decreasing along accept_order.
struct ArrivalMap {
  ScalarField3 action;
  std::vector<VoxelStatus> status;
  std::vector<std::int64_t> accept_order;  // -1 where not accepted
  std::shared_ptr<const ScalarField3> source_metric;

  bool accepted(std::int64_t n) const { return status[std::size_t(n)] == VoxelStatus::Accepted; }
  bool accepted(const Vec3i& i) const { return accepted(action.grid.linear_index(i)); }
  std::int64_t accepted_count() const;
  VoxelMask accepted_mask() const;
};

enum class Scheme { Baseline, Corrected };
enum class CurvatureKind { Sum, Mean };

struct StopRule {
  enum class Kind { FullGrid, PlaneReached, ActionLimit };
  Kind kind = Kind::FullGrid;
  PlaneSpec plane;      // PlaneReached only
  double s_max = 0.0;   // ActionLimit only

  static StopRule full_grid() { return {}; }
  static StopRule plane_reached(const PlaneSpec& p) {
    return {Kind::PlaneReached, p, 0.0};
  }
  static StopRule action_limit(double s_max) {
    return {Kind::ActionLimit, PlaneSpec{}, s_max};
  }
};

struct SolverConfig {
  Scheme scheme = Scheme::Baseline;
  CurvatureKind curvature = CurvatureKind::Sum;
  double lambda = 1.0;       // correction strength, in [0,1]
  int neighborhood = 26;     // 6, 18 or 26
  double delta_s_max = 1.0;  // reserved for the constant-increment stepping
                             // variant; the ordered solver bounds each step
                             // by the neighborhood geometry instead
  double kappa_clamp = 0.5;
  StopRule stop = StopRule::full_grid();
};

/// Initial front geometry: a small voxel ball around a seed point, or an
/// explicit mask.
struct ZeroSet {
  enum class Kind { Ball, Mask };
  Kind kind = Kind::Ball;
  Vec3i center = Vec3i::Zero();
  double radius_voxels = 0.0;
  VoxelMask region;

  static ZeroSet ball(const Vec3i& center, double radius_voxels) {
    ZeroSet z;
    z.kind = Kind::Ball;
    z.center = center;
    z.radius_voxels = radius_voxels;
    return z;
  }
  static ZeroSet mask(VoxelMask m) {
    ZeroSet z;
    z.kind = Kind::Mask;
    z.region = std::move(m);
    return z;
  }
};

/// Action increment of the uncorrected scheme: dS = phi * ds.
double baseline_increment(double phi, double ds);

/// Dilation of the uncorrected scheme: ds = dS / phi (inverse of the above).
double baseline_dilation(double phi, double dS);

/// Divergence-corrected action increment dS = phi * ds * (1 - lambda*K*ds).
/// For K > 0 the factor is floored at 0.5, the cost-form mirror of the
/// ds = 2 dS/phi dilation cap, keeping every edge cost >= phi*ds/2 > 0.
double corrected_increment(double phi, double ds, double k, double lambda);

/// Inverse update: the dilation ds produced by raising the action by dS at
/// curvature K. Closed-form root of K ds^2 - ds + dS/phi = 0 on the branch
/// that reduces to dS/phi as K -> 0; returns the 2 dS/phi cap when the
/// discriminant would go negative (K > 0 only).
double corrected_dilation(double phi, double dS, double k);

/// Largest admissible action increment phi/(4K) for K > 0 (the discriminant
/// root); +infinity for K <= 0, where no cap applies.
double action_cap(double phi, double k);

/// Builds the initial map: zero-set voxels accepted with action 0, their
/// outside neighbors Trial, everything else Far.
ArrivalMap init_zero_set(const ScalarField3& metric, const ZeroSet& zs,
                         int neighborhood = 26);

/// Ordered front propagation (Dijkstra on the 6/18/26 neighborhood graph)
/// under the baseline or divergence-corrected update. Deterministic:
/// ties break on (action, voxel index).
ArrivalMap solve(const ScalarField3& metric, const ZeroSet& zs, const SolverConfig& cfg);

/// Convenience wrappers evaluating grid operators on the accepted region.
Vec3Field unit_normal_field(const ArrivalMap& map);
CurvatureSample sum_curvature_at(const ArrivalMap& map, const Vec3i& index,
                                 double kappa_clamp = 0.5);
CurvatureSample mean_curvature_at(const ArrivalMap& map, const Vec3i& index,
                                  double kappa_clamp = 0.5);

}  // namespace voxpath
