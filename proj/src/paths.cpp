#include "voxpath/paths.hpp"

#include "voxpath/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace voxpath {

double Path::euclidean_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
  return len;
}

std::size_t PathNetwork::converged_count() const {
  std::size_t n = 0;
  for (const Path& p : paths) n += !p.failed;
  return n;
}

std::size_t PathNetwork::failed_count() const { return paths.size() - converged_count(); }

namespace {

// ---- plane slice + marching squares -------------------------------------

struct PlaneBasis {
  Vec3 eu, ev;
};

PlaneBasis plane_basis(const PlaneSpec& plane) {
  int a = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(plane.normal[i]) < std::abs(plane.normal[a])) a = i;
  }
  Vec3 axis = Vec3::Zero();
  axis[a] = 1.0;
  PlaneBasis b;
  b.eu = plane.normal.cross(axis).normalized();
  b.ev = plane.normal.cross(b.eu);
  return b;
}

struct PlaneSlice {
  PlaneBasis basis;
  Vec3 anchor;   // world point of sample (0,0)
  double h = 1.0;
  int nu = 0, nv = 0;
  std::vector<double> values;  // u-fastest

  double at(int i, int j) const { return values[std::size_t(j) * nu + i]; }
  Vec3 world(double u, double v) const {
    return anchor + u * h * basis.eu + v * h * basis.ev;
  }
};

PlaneSlice sample_plane_slice(const ScalarField3& field, const PlaneSpec& plane) {
  PlaneSlice s;
  s.basis = plane_basis(plane);
  s.h = field.grid.min_spacing();

  const Vec3 lo = field.grid.world_min();
  const Vec3 hi = field.grid.world_max();
  double umin = kInfinity, umax = -kInfinity, vmin = kInfinity, vmax = -kInfinity;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner((c & 1) ? hi.x() : lo.x(), (c & 2) ? hi.y() : lo.y(),
                      (c & 4) ? hi.z() : lo.z());
    const Vec3 r = corner - plane.point;
    umin = std::min(umin, s.basis.eu.dot(r));
    umax = std::max(umax, s.basis.eu.dot(r));
    vmin = std::min(vmin, s.basis.ev.dot(r));
    vmax = std::max(vmax, s.basis.ev.dot(r));
  }
  // one sample of padding so contours can close on background
  umin -= s.h;
  vmin -= s.h;
  s.anchor = plane.point + umin * s.basis.eu + vmin * s.basis.ev;
  s.nu = int(std::ceil((umax - umin) / s.h)) + 2;
  s.nv = int(std::ceil((vmax - vmin) / s.h)) + 2;

  s.values.assign(std::size_t(s.nu) * s.nv, 0.0);
  for (int j = 0; j < s.nv; ++j) {
    for (int i = 0; i < s.nu; ++i) {
      const Vec3 p = s.world(double(i), double(j));
      bool inside = true;
      for (int a = 0; a < 3; ++a) {
        if (p[a] < lo[a] || p[a] > hi[a]) {
          inside = false;
          break;
        }
      }
      if (inside) s.values[std::size_t(j) * s.nu + i] = trilinear_sample(field, p);
    }
  }
  return s;
}

// Edge of the sample lattice: dir 0 joins (i,j)-(i+1,j), dir 1 joins
// (i,j)-(i,j+1).
std::int64_t edge_id(int nu, int i, int j, int dir) {
  return (std::int64_t(j) * nu + i) * 2 + dir;
}

struct SquaresResult {
  std::map<std::int64_t, Vec3> crossing;                     // edge -> uv point (z=0)
  std::map<std::int64_t, std::vector<std::int64_t>> links;   // edge adjacency
};

SquaresResult marching_squares(const PlaneSlice& s, double iso) {
  SquaresResult r;
  const auto in = [&](int i, int j) { return s.at(i, j) > iso; };

  struct Edge {
    int i, j, dir;
  };

  // Only called for edges whose endpoints straddle iso, so vb != va.
  const auto cross_point = [&](const Edge& e) {
    const double va = s.at(e.i, e.j);
    const double vb = e.dir == 0 ? s.at(e.i + 1, e.j) : s.at(e.i, e.j + 1);
    const double t = (iso - va) / (vb - va);
    return e.dir == 0 ? Vec3(e.i + t, e.j, 0.0) : Vec3(double(e.i), e.j + t, 0.0);
  };

  const auto add_segment = [&](const Edge& a, const Edge& b) {
    const std::int64_t ea = edge_id(s.nu, a.i, a.j, a.dir);
    const std::int64_t eb = edge_id(s.nu, b.i, b.j, b.dir);
    r.crossing.emplace(ea, cross_point(a));
    r.crossing.emplace(eb, cross_point(b));
    r.links[ea].push_back(eb);
    r.links[eb].push_back(ea);
  };

  for (int j = 0; j + 1 < s.nv; ++j) {
    for (int i = 0; i + 1 < s.nu; ++i) {
      const int code = (in(i, j) ? 1 : 0) | (in(i + 1, j) ? 2 : 0) |
                       (in(i + 1, j + 1) ? 4 : 0) | (in(i, j + 1) ? 8 : 0);
      if (code == 0 || code == 15) continue;

      const Edge B{i, j, 0};
      const Edge R{i + 1, j, 1};
      const Edge T{i, j + 1, 0};
      const Edge L{i, j, 1};

      switch (code) {
        case 1: case 14: add_segment(L, B); break;
        case 2: case 13: add_segment(B, R); break;
        case 3: case 12: add_segment(L, R); break;
        case 4: case 11: add_segment(R, T); break;
        case 6: case 9:  add_segment(B, T); break;
        case 7: case 8:  add_segment(L, T); break;
        case 5: case 10: {
          const double center =
              0.25 * (s.at(i, j) + s.at(i + 1, j) + s.at(i + 1, j + 1) + s.at(i, j + 1));
          const bool center_in = center > iso;
          const bool diag00 = (code == 5);  // inside corners on the 00-11 diagonal
          if (diag00 == center_in) {
            add_segment(B, R);
            add_segment(T, L);
          } else {
            add_segment(L, B);
            add_segment(R, T);
          }
          break;
        }
        default: break;
      }
    }
  }
  return r;
}

std::vector<std::vector<Vec3>> closed_loops(const SquaresResult& r) {
  std::vector<std::vector<Vec3>> loops;
  std::map<std::int64_t, bool> visited;
  for (const auto& [start, nbrs] : r.links) {
    if (visited[start] || nbrs.size() != 2) continue;
    std::vector<std::int64_t> chain{start};
    visited[start] = true;
    std::int64_t prev = start;
    std::int64_t cur = nbrs.front();
    bool closed = false;
    while (true) {
      if (cur == start) {
        closed = true;
        break;
      }
      const auto it = r.links.find(cur);
      if (it == r.links.end() || it->second.size() != 2) break;  // open end
      visited[cur] = true;
      chain.push_back(cur);
      const std::int64_t next =
          it->second.front() == prev ? it->second.back() : it->second.front();
      prev = cur;
      cur = next;
    }
    if (!closed || chain.size() < 3) continue;
    std::vector<Vec3> pts;
    pts.reserve(chain.size());
    for (std::int64_t e : chain) {
      const Vec3& p = r.crossing.at(e);
      if (!pts.empty() && (p - pts.back()).norm() < 1e-12) continue;
      pts.push_back(p);
    }
    if (pts.size() >= 2 && (pts.front() - pts.back()).norm() < 1e-12) pts.pop_back();
    if (pts.size() >= 3) loops.push_back(std::move(pts));
  }
  return loops;
}

double loop_length(const std::vector<Vec3>& pts) {
  double len = (pts.front() - pts.back()).norm();
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-24) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

Contour detect_plane_contour(const ScalarField3& intensity, const PlaneSpec& plane,
                             double iso) {
  const PlaneSlice slice = sample_plane_slice(intensity, plane);
  const SquaresResult squares = marching_squares(slice, iso);
  const std::vector<std::vector<Vec3>> loops = closed_loops(squares);
  if (loops.empty()) {
    throw detection_error("no closed iso-contour on the plane at iso=" + std::to_string(iso));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < loops.size(); ++i) {
    if (loop_length(loops[i]) > loop_length(loops[best])) best = i;
  }

  Contour c;
  c.closed = true;
  c.points.reserve(loops[best].size());
  for (const Vec3& uv : loops[best]) c.points.push_back(slice.world(uv.x(), uv.y()));
  c.degenerate = c.points.size() < 12;
  return c;
}

Contour resample_contour(const Contour& contour, int n) {
  if (contour.points.size() < 2) throw std::invalid_argument("contour too short to resample");
  if (n < 1) throw std::invalid_argument("resample count must be >= 1");
  const std::vector<Vec3>& pts = contour.points;
  const std::size_t m = pts.size();
  const std::size_t nseg = contour.closed ? m : m - 1;

  std::vector<double> cum(nseg + 1, 0.0);
  for (std::size_t i = 0; i < nseg; ++i) {
    cum[i + 1] = cum[i] + (pts[(i + 1) % m] - pts[i]).norm();
  }
  const double total = cum[nseg];

  Contour out;
  out.closed = contour.closed;
  out.points.reserve(std::size_t(n));
  std::size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double target = contour.closed ? total * k / n
                                         : (n == 1 ? 0.0 : total * k / (n - 1));
    while (seg + 1 < nseg && cum[seg + 1] < target) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
    out.points.push_back(pts[seg] + t * (pts[(seg + 1) % m] - pts[seg]));
  }
  out.degenerate = out.points.size() < 12;
  return out;
}

namespace {

Path backtrace_impl(const ArrivalMap& map, const VoxelMask& accepted, const Vec3& seed,
                    double step, double eps_stop, std::int64_t max_iters) {
  const GridLayout& grid = map.action.grid;
  const double h = grid.min_spacing();
  if (step <= 0.0) step = 0.5 * h;
  if (eps_stop <= 0.0) {
    if (!map.source_metric) {
      throw std::invalid_argument("eps_stop required for maps without a source metric");
    }
    const double phi_min =
        *std::min_element(map.source_metric->values.begin(), map.source_metric->values.end());
    eps_stop = 0.5 * h * phi_min;
  }
  if (max_iters <= 0) {
    const double extent = (grid.world_max() - grid.world_min()).maxCoeff();
    max_iters = std::int64_t(10.0 * extent / step) + 1;
  }

  const auto sample = [&](const Vec3& p) { return masked_trilinear_sample(map.action, accepted, p); };
  const Vec3 lo = grid.world_min();
  const Vec3 hi = grid.world_max();

  const std::optional<double> a0 = sample(seed);
  if (!a0) throw std::invalid_argument("backtrace seed outside accepted region");

  Path path;
  path.points.push_back(seed);
  path.action.push_back(*a0);
  Vec3 x = seed;
  double a = *a0;

  bool converged = a <= eps_stop;
  for (std::int64_t it = 0; it < max_iters && !converged; ++it) {
    bool moved = false;

    const std::optional<Vec3> g = masked_trilinear_gradient(map.action, accepted, x);
    if (g && g->norm() >= 1e-9) {
      const Vec3 dir = *g / g->norm();
      // The full step can overshoot the narrow action valley where the
      // metric jumps (object shells); retry at halved steps.
      for (double s = step; s >= 0.125 * step; s *= 0.5) {
        Vec3 next = x - s * dir;
        for (int axis = 0; axis < 3; ++axis) {
          next[axis] = std::clamp(next[axis], lo[axis], hi[axis]);
        }
        const std::optional<double> an = sample(next);
        if (!an || *an >= a) continue;
        x = next;
        a = *an;
        moved = true;
        break;
      }
    }

    if (!moved) {
      // Valley-bottom stall: along a cheap shell the tangential slope is
      // below the interpolation noise and gradient steps stop decreasing.
      // Hop to the lowest-action voxel center nearby; the ordered solver's
      // shortest-path tree guarantees strict descent from voxel centers.
      const Vec3i base(int(std::lround((x.x() - grid.origin.x()) / grid.spacing.x())),
                       int(std::lround((x.y() - grid.origin.y()) / grid.spacing.y())),
                       int(std::lround((x.z() - grid.origin.z()) / grid.spacing.z())));
      double best = a;
      Vec3i best_voxel;
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const Vec3i j = base + Vec3i(dx, dy, dz);
            if (!grid.contains(j) || !accepted.test(j)) continue;
            const double v = map.action.at(j);
            if (v < best) {
              best = v;
              best_voxel = j;
              moved = true;
            }
          }
      if (!moved) break;
      x = grid.position(best_voxel);
      a = best;
    }

    path.points.push_back(x);
    path.action.push_back(a);
    converged = a <= eps_stop;
  }
  path.failed = !converged;
  return path;
}

}  // namespace

Path backtrace(const ArrivalMap& map, const Vec3& seed, double step, double eps_stop,
               std::int64_t max_iters) {
  return backtrace_impl(map, map.accepted_mask(), seed, step, eps_stop, max_iters);
}

PathNetwork build_network(const ArrivalMap& map, const Contour& contour, double step,
                          double eps_stop) {
  if (contour.points.empty()) throw std::invalid_argument("contour has no seeds");
  const VoxelMask accepted = map.accepted_mask();

  PathNetwork net;
  net.seeds_closed = contour.closed;
  net.paths.reserve(contour.points.size());
  for (const Vec3& seed : contour.points) {
    try {
      net.paths.push_back(backtrace_impl(map, accepted, seed, step, eps_stop, 0));
    } catch (const std::invalid_argument&) {
      Path p;
      p.points.push_back(seed);
      p.failed = true;
      net.paths.push_back(std::move(p));
    }
  }

  const std::size_t failed = net.failed_count();
  if (failed * 5 > net.paths.size()) {
    throw solver_error("path network degenerate: " + std::to_string(failed) + " of " +
                       std::to_string(net.paths.size()) + " backtraces failed");
  }
  return net;
}

double network_energy(const PathNetwork& net, const ScalarField3& phi) {
  double total = 0.0;
  for (const Path& p : net.paths) {
    if (p.failed) continue;
    for (std::size_t i = 1; i < p.points.size(); ++i) {
      const Vec3 mid = 0.5 * (p.points[i] + p.points[i - 1]);
      total += trilinear_sample(phi, mid) * (p.points[i] - p.points[i - 1]).norm();
    }
  }
  return total;
}

double surface_coverage(const PathNetwork& net, const VoxelMask& surface, double radius) {
  if (surface.count() == 0) throw std::invalid_argument("surface mask is empty");
  if (!(radius > 0.0)) throw std::invalid_argument("coverage radius must be positive");

  const GridLayout& grid = surface.grid;
  VoxelMask covered(grid, false);
  for (const Path& p : net.paths) {
    if (p.failed) continue;
    for (std::size_t i = 1; i < p.points.size(); ++i) {
      const Vec3& a = p.points[i - 1];
      const Vec3& b = p.points[i];
      Vec3i lo, hi;
      for (int axis = 0; axis < 3; ++axis) {
        const double mn = std::min(a[axis], b[axis]) - radius;
        const double mx = std::max(a[axis], b[axis]) + radius;
        lo[axis] = std::max(0, int(std::ceil((mn - grid.origin[axis]) / grid.spacing[axis])));
        hi[axis] = std::min(grid.dims[axis] - 1,
                            int(std::floor((mx - grid.origin[axis]) / grid.spacing[axis])));
      }
      for (int z = lo.z(); z <= hi.z(); ++z)
        for (int y = lo.y(); y <= hi.y(); ++y)
          for (int x = lo.x(); x <= hi.x(); ++x) {
            const Vec3i v(x, y, z);
            if (covered.test(v)) continue;
            if (point_segment_distance(grid.position(v), a, b) <= radius) covered.set(v);
          }
    }
  }

  std::int64_t hit = 0;
  for (std::int64_t n = 0; n < grid.voxel_count(); ++n) {
    if (surface.test(n) && covered.test(n)) ++hit;
  }
  return double(hit) / double(surface.count());
}

VoxelMask reference_surface_mask(const std::vector<EllipsoidSpec>& specs, const Vec3i& dims,
                                 const Vec3& spacing, const Vec3& origin) {
  const GridLayout grid{dims, spacing, origin};
  validate_layout(grid);

  const auto inside = [&](const Vec3i& i) {
    const Vec3 p = grid.position(i);
    for (const EllipsoidSpec& e : specs) {
      if (e.contains(p)) return true;
    }
    return false;
  };

  static const Vec3i kFaceNbr[6] = {Vec3i(1, 0, 0),  Vec3i(-1, 0, 0), Vec3i(0, 1, 0),
                                    Vec3i(0, -1, 0), Vec3i(0, 0, 1),  Vec3i(0, 0, -1)};

  VoxelMask out(grid, false);
  for (int z = 0; z < dims.z(); ++z)
    for (int y = 0; y < dims.y(); ++y)
      for (int x = 0; x < dims.x(); ++x) {
        const Vec3i i(x, y, z);
        if (!inside(i)) continue;
        for (const Vec3i& d : kFaceNbr) {
          const Vec3i j = i + d;
          if (grid.contains(j) && !inside(j)) {
            out.set(i);
            break;
          }
        }
      }
  return out;
}

}  // namespace voxpath
