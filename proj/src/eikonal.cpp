#include "voxpath/eikonal.hpp"

#include "voxpath/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace voxpath {

std::int64_t ArrivalMap::accepted_count() const {
  std::int64_t n = 0;
  for (VoxelStatus s : status) n += s == VoxelStatus::Accepted;
  return n;
}

VoxelMask ArrivalMap::accepted_mask() const {
  VoxelMask m(action.grid, false);
  for (std::size_t i = 0; i < status.size(); ++i) {
    if (status[i] == VoxelStatus::Accepted) m.values[i] = 1;
  }
  return m;
}

double baseline_increment(double phi, double ds) {
  if (!(phi > 0.0)) throw std::invalid_argument("phi must be positive");
  if (ds < 0.0) throw std::invalid_argument("ds must be non-negative");
  return phi * ds;
}

double baseline_dilation(double phi, double dS) {
  if (!(phi > 0.0)) throw std::invalid_argument("phi must be positive");
  if (dS < 0.0) throw std::invalid_argument("dS must be non-negative");
  return dS / phi;
}

double corrected_increment(double phi, double ds, double k, double lambda) {
  if (!(phi > 0.0)) throw std::invalid_argument("phi must be positive");
  if (ds < 0.0) throw std::invalid_argument("ds must be non-negative");
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda must be in [0,1]");
  double factor = 1.0 - lambda * k * ds;
  if (factor < 0.5) factor = 0.5;  // only reachable for k > 0
  return phi * ds * factor;
}

double corrected_dilation(double phi, double dS, double k) {
  if (!(phi > 0.0)) throw std::invalid_argument("phi must be positive");
  if (dS < 0.0) throw std::invalid_argument("dS must be non-negative");
  const double x = dS / phi;
  if (std::abs(k) < 1e-10) return x;  // series limit
  const double disc = 1.0 - 4.0 * k * x;
  if (disc < 0.0) return 2.0 * x;  // dilation cap; only possible for k > 0
  // (1 - sqrt(disc)) / (2k) rationalized; no cancellation as k -> 0, and it
  // meets the 2x cap continuously at disc = 0.
  return 2.0 * x / (1.0 + std::sqrt(disc));
}

double action_cap(double phi, double k) {
  if (!(phi > 0.0)) throw std::invalid_argument("phi must be positive");
  if (k <= 0.0) return kInfinity;
  return phi / (4.0 * k);
}

namespace {

struct NeighborStep {
  Vec3i offset;
  double length;  // world units
};

std::vector<NeighborStep> neighbor_table(const GridLayout& grid, int neighborhood) {
  if (neighborhood != 6 && neighborhood != 18 && neighborhood != 26) {
    throw std::invalid_argument("neighborhood must be 6, 18 or 26");
  }
  const int max_l1 = neighborhood == 6 ? 1 : neighborhood == 18 ? 2 : 3;
  std::vector<NeighborStep> table;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int l1 = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (l1 == 0 || l1 > max_l1) continue;
        const Vec3 step(dx * grid.spacing.x(), dy * grid.spacing.y(),
                        dz * grid.spacing.z());
        table.push_back({Vec3i(dx, dy, dz), step.norm()});
      }
  return table;
}

void validate_config(const SolverConfig& cfg) {
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0) {
    throw std::invalid_argument("lambda must be in [0,1]");
  }
  if (cfg.neighborhood != 6 && cfg.neighborhood != 18 && cfg.neighborhood != 26) {
    throw std::invalid_argument("neighborhood must be 6, 18 or 26");
  }
  if (!(cfg.delta_s_max > 0.0)) throw std::invalid_argument("delta_s_max must be positive");
  if (!(cfg.kappa_clamp > 0.0)) throw std::invalid_argument("kappa_clamp must be positive");
  if (cfg.stop.kind == StopRule::Kind::ActionLimit && !(cfg.stop.s_max > 0.0)) {
    throw std::invalid_argument("action limit must be positive");
  }
}

void validate_metric(const ScalarField3& metric) {
  for (double v : metric.values) {
    if (!(v > 0.0)) throw std::invalid_argument("metric must be strictly positive");
  }
}

}  // namespace

ArrivalMap init_zero_set(const ScalarField3& metric, const ZeroSet& zs, int neighborhood) {
  const GridLayout& grid = metric.grid;
  ArrivalMap map;
  map.action = ScalarField3(grid, kInfinity);
  map.status.assign(std::size_t(grid.voxel_count()), VoxelStatus::Far);
  map.accept_order.assign(std::size_t(grid.voxel_count()), -1);
  map.source_metric = std::make_shared<ScalarField3>(metric);

  std::vector<std::int64_t> seeds;
  if (zs.kind == ZeroSet::Kind::Ball) {
    if (!grid.contains(zs.center)) {
      throw std::invalid_argument("zero-set ball center outside grid");
    }
    if (zs.radius_voxels < 0.0) throw std::invalid_argument("zero-set radius must be >= 0");
    const int r = int(std::floor(zs.radius_voxels));
    const double r2 = zs.radius_voxels * zs.radius_voxels;
    for (int dz = -r; dz <= r; ++dz)
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          if (double(dx * dx + dy * dy + dz * dz) > r2) continue;
          const Vec3i i = zs.center + Vec3i(dx, dy, dz);
          if (grid.contains(i)) seeds.push_back(grid.linear_index(i));
        }
  } else {
    if (!zs.region.grid.same_shape(grid)) {
      throw std::invalid_argument("zero-set mask shape mismatch");
    }
    for (std::int64_t n = 0; n < grid.voxel_count(); ++n) {
      if (zs.region.test(n)) seeds.push_back(n);
    }
  }
  if (seeds.empty()) throw std::invalid_argument("zero set is empty");
  std::sort(seeds.begin(), seeds.end());

  std::int64_t rank = 0;
  for (std::int64_t n : seeds) {
    map.action.values[std::size_t(n)] = 0.0;
    map.status[std::size_t(n)] = VoxelStatus::Accepted;
    map.accept_order[std::size_t(n)] = rank++;
  }

  const std::vector<NeighborStep> nbr = neighbor_table(grid, neighborhood);
  for (std::int64_t n : seeds) {
    const Vec3i i = grid.unflatten(n);
    for (const NeighborStep& s : nbr) {
      const Vec3i j = i + s.offset;
      if (!grid.contains(j)) continue;
      const std::int64_t m = grid.linear_index(j);
      if (map.status[std::size_t(m)] == VoxelStatus::Far) {
        map.status[std::size_t(m)] = VoxelStatus::Trial;
      }
    }
  }
  return map;
}

ArrivalMap solve(const ScalarField3& metric, const ZeroSet& zs, const SolverConfig& cfg) {
  validate_config(cfg);
  validate_metric(metric);
  const GridLayout& grid = metric.grid;

  ArrivalMap map = init_zero_set(metric, zs, cfg.neighborhood);
  const std::vector<NeighborStep> nbr = neighbor_table(grid, cfg.neighborhood);

  VoxelMask accepted(grid, false);
  for (std::int64_t n = 0; n < grid.voxel_count(); ++n) {
    if (map.status[std::size_t(n)] == VoxelStatus::Accepted) accepted.set(n, true);
  }

  // Plane bookkeeping for the plane_reached stop rule.
  std::vector<std::uint8_t> on_plane;
  std::int64_t plane_remaining = 0;
  if (cfg.stop.kind == StopRule::Kind::PlaneReached) {
    on_plane.assign(std::size_t(grid.voxel_count()), 0);
    const std::vector<std::int64_t> pv = rasterize_plane(grid, cfg.stop.plane);
    if (pv.empty()) throw solver_error("plane does not intersect the grid");
    for (std::int64_t n : pv) {
      on_plane[std::size_t(n)] = 1;
      if (!accepted.test(n)) ++plane_remaining;
    }
    if (plane_remaining == 0) return map;
  }

  using Entry = std::pair<double, std::int64_t>;  // (action, voxel index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;

  // Curvature of the momentary front at the just-accepted source voxel;
  // falls back to 0 (baseline behavior) where the stencil is unusable.
  // Applied penalty-only (K clamped to <= 0): voxel-scale staircase lag on
  // lattice fronts reads as spurious positive curvature, and a positive K
  // would discount edges below their baseline cost, breaking the dominance
  // of corrected over baseline arrivals on convex fronts.
  const auto curvature_here = [&](const Vec3i& i) -> double {
    CurvatureSample k = sum_curvature_at(map.action, accepted, i, cfg.kappa_clamp);
    if (k.fallback) return 0.0;
    const double signed_k = cfg.curvature == CurvatureKind::Mean ? 0.5 * k.value : k.value;
    return std::min(signed_k, 0.0);
  };

  const auto relax_from = [&](std::int64_t n) {
    const Vec3i i = grid.unflatten(n);
    double k = 0.0;
    if (cfg.scheme == Scheme::Corrected) k = curvature_here(i);
    const double action_i = map.action.values[std::size_t(n)];
    const double phi_i = metric.values[std::size_t(n)];
    for (const NeighborStep& s : nbr) {
      const Vec3i j = i + s.offset;
      if (!grid.contains(j)) continue;
      const std::int64_t m = grid.linear_index(j);
      if (map.status[std::size_t(m)] == VoxelStatus::Accepted) continue;
      const double d = s.length;
      double factor = 1.0;
      if (cfg.scheme == Scheme::Corrected) {
        factor = 1.0 - cfg.lambda * k * d;
        if (factor < 0.5) factor = 0.5;
      }
      const double cost = 0.5 * (phi_i + metric.values[std::size_t(m)]) * d * factor;
      const double tentative = action_i + cost;
      if (tentative < map.action.values[std::size_t(m)]) {
        map.action.values[std::size_t(m)] = tentative;
        map.status[std::size_t(m)] = VoxelStatus::Trial;
        queue.push({tentative, m});
      }
    }
  };

  for (std::int64_t n = 0; n < grid.voxel_count(); ++n) {
    if (accepted.test(n)) relax_from(n);
  }

  std::int64_t rank = map.accepted_count();
  while (!queue.empty()) {
    const auto [value, n] = queue.top();
    queue.pop();
    if (map.status[std::size_t(n)] == VoxelStatus::Accepted) continue;
    if (value != map.action.values[std::size_t(n)]) continue;  // stale entry
    if (cfg.stop.kind == StopRule::Kind::ActionLimit && value > cfg.stop.s_max) break;

    map.status[std::size_t(n)] = VoxelStatus::Accepted;
    map.accept_order[std::size_t(n)] = rank++;
    accepted.set(n, true);

    if (cfg.stop.kind == StopRule::Kind::PlaneReached && on_plane[std::size_t(n)]) {
      if (--plane_remaining == 0) break;
    }
    relax_from(n);
  }

  if (cfg.stop.kind == StopRule::Kind::PlaneReached && plane_remaining > 0) {
    throw solver_error("plane unreachable: " + std::to_string(plane_remaining) +
                       " plane voxel(s) not reached");
  }
  return map;
}

Vec3Field unit_normal_field(const ArrivalMap& map) {
  return unit_normal_field(map.action, map.accepted_mask());
}

CurvatureSample sum_curvature_at(const ArrivalMap& map, const Vec3i& index,
                                 double kappa_clamp) {
  return sum_curvature_at(map.action, map.accepted_mask(), index, kappa_clamp);
}

CurvatureSample mean_curvature_at(const ArrivalMap& map, const Vec3i& index,
                                  double kappa_clamp) {
  return mean_curvature_at(map.action, map.accepted_mask(), index, kappa_clamp);
}

}  // namespace voxpath
