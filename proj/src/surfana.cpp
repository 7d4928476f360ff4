#include "voxpath/surfana.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace voxpath {

double equidistant_area_factor(double div_m, double k_gauss, double s) {
  return 1.0 + s * div_m + s * s * k_gauss;
}

double immediate_area_ratio(double k_sum, double ds) { return 1.0 - k_sum * ds; }

double mean_distance_ratio(double k_sum, double ds) { return 1.0 - 0.5 * k_sum * ds; }

double cumulative_area(double initial, const std::vector<double>& integrand_samples,
                       double s_max) {
  if (integrand_samples.size() < 2) {
    throw std::invalid_argument("cumulative_area needs at least two samples");
  }
  for (double v : integrand_samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("integrand samples must be finite");
  }
  const std::size_t n = integrand_samples.size();
  const double dh = s_max / double(n - 1);
  double integral = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    integral += 0.5 * (integrand_samples[i - 1] + integrand_samples[i]) * dh;
  }
  return initial * std::exp(-integral);
}

namespace {

struct SurfacePartials {
  std::vector<Vec3> du, dv;
};

SurfacePartials surface_partials(const ParametricSurfaceSamples& s) {
  SurfacePartials out;
  if (!s.du.empty() && !s.dv.empty()) {
    out.du = s.du;
    out.dv = s.dv;
    return out;
  }
  const double hu = s.ustep();
  const double hv = s.vstep();
  out.du.resize(s.positions.size());
  out.dv.resize(s.positions.size());
  for (int i = 0; i < s.nu; ++i) {
    for (int j = 0; j < s.nv; ++j) {
      Vec3& du = out.du[std::size_t(i) * s.nv + j];
      if (i == 0) du = (s.at(1, j) - s.at(0, j)) / hu;
      else if (i == s.nu - 1) du = (s.at(i, j) - s.at(i - 1, j)) / hu;
      else du = (s.at(i + 1, j) - s.at(i - 1, j)) / (2.0 * hu);

      Vec3& dv = out.dv[std::size_t(i) * s.nv + j];
      if (s.v_periodic) {
        const int jp = (j + 1) % s.nv;
        const int jm = (j + s.nv - 1) % s.nv;
        dv = (s.at(i, jp) - s.at(i, jm)) / (2.0 * hv);
      } else if (j == 0) {
        dv = (s.at(i, 1) - s.at(i, 0)) / hv;
      } else if (j == s.nv - 1) {
        dv = (s.at(i, j) - s.at(i, j - 1)) / hv;
      } else {
        dv = (s.at(i, j + 1) - s.at(i, j - 1)) / (2.0 * hv);
      }
    }
  }
  return out;
}

}  // namespace

SurfaceActionResult isotropic_surface_action(const ParametricSurfaceSamples& surf,
                                             const std::function<double(const Vec3&)>& Phi) {
  if (surf.nu < 2 || surf.nv < 2) throw std::invalid_argument("need at least 2x2 samples");
  if (surf.positions.size() != std::size_t(surf.nu) * surf.nv) {
    throw std::invalid_argument("sample count does not match nu*nv");
  }
  const SurfacePartials partials = surface_partials(surf);

  bool orthogonal = true;
  for (std::size_t k = 0; k < surf.positions.size(); ++k) {
    const Vec3& su = partials.du[k];
    const Vec3& sv = partials.dv[k];
    const double nu_ = su.norm();
    const double nv_ = sv.norm();
    if (su.cross(sv).norm() < 1e-15) {
      throw std::invalid_argument("degenerate surface sample (|S_u x S_v| = 0)");
    }
    if (std::abs(su.dot(sv)) > 1e-6 * nu_ * nv_) orthogonal = false;
  }

  const double hu = surf.ustep();
  const double hv = surf.vstep();
  double total = 0.0;
  for (int i = 0; i < surf.nu; ++i) {
    const double wu = (i == 0 || i == surf.nu - 1) ? 0.5 : 1.0;
    for (int j = 0; j < surf.nv; ++j) {
      const double wv = (!surf.v_periodic && (j == 0 || j == surf.nv - 1)) ? 0.5 : 1.0;
      const std::size_t k = std::size_t(i) * surf.nv + j;
      const Vec3& su = partials.du[k];
      const Vec3& sv = partials.dv[k];
      const double weight = orthogonal ? su.norm() * sv.norm() : su.cross(sv).norm();
      total += wu * wv * Phi(surf.positions[k]) * weight;
    }
  }
  return {total * hu * hv, orthogonal};
}

namespace {

double point_polyline_distance(const Vec3& p, const Path& path) {
  if (path.points.size() == 1) return (p - path.points.front()).norm();
  double best = kInfinity;
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    const Vec3& a = path.points[i - 1];
    const Vec3& b = path.points[i];
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double d;
    if (len2 < 1e-24) {
      d = (p - a).norm();
    } else {
      const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
      d = (p - (a + t * ab)).norm();
    }
    best = std::min(best, d);
  }
  return best;
}

}  // namespace

NetworkResidualReport network_action_residual(const PathNetwork& net,
                                              const ScalarField3& phi) {
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < net.paths.size(); ++i) {
    if (!net.paths[i].failed && net.paths[i].points.size() >= 2) alive.push_back(i);
  }
  if (alive.size() < 8) {
    throw std::invalid_argument("network_action_residual needs at least 8 converged paths");
  }

  NetworkResidualReport rep;
  rep.s_net = network_energy(net, phi);
  rep.spacing_min = kInfinity;
  rep.spacing_max = 0.0;
  rep.per_path_mean_spacing.assign(net.paths.size(), 0.0);

  double spacing_sum = 0.0;
  std::size_t spacing_count = 0;
  const std::size_t m = alive.size();
  for (std::size_t a = 0; a < m; ++a) {
    // adjacency follows the seed-contour order; wrap when the contour closed
    std::vector<const Path*> nbrs;
    if (net.seeds_closed || a > 0) nbrs.push_back(&net.paths[alive[(a + m - 1) % m]]);
    if (net.seeds_closed || a + 1 < m) nbrs.push_back(&net.paths[alive[(a + 1) % m]]);

    const Path& path = net.paths[alive[a]];
    double path_sum = 0.0;
    std::size_t path_count = 0;
    for (std::size_t i = 1; i < path.points.size(); ++i) {
      const Vec3 mid = 0.5 * (path.points[i] + path.points[i - 1]);
      const double seg = (path.points[i] - path.points[i - 1]).norm();
      double spacing = kInfinity;
      for (const Path* nb : nbrs) spacing = std::min(spacing, point_polyline_distance(mid, *nb));
      if (!std::isfinite(spacing)) spacing = 0.0;
      rep.weighted_estimate += trilinear_sample(phi, mid) * seg * spacing;
      rep.spacing_min = std::min(rep.spacing_min, spacing);
      rep.spacing_max = std::max(rep.spacing_max, spacing);
      path_sum += spacing;
      ++path_count;
      spacing_sum += spacing;
      ++spacing_count;
    }
    if (path_count > 0) rep.per_path_mean_spacing[alive[a]] = path_sum / double(path_count);
  }
  rep.spacing_mean = spacing_count ? spacing_sum / double(spacing_count) : 0.0;
  if (!std::isfinite(rep.spacing_min)) rep.spacing_min = 0.0;
  return rep;
}

}  // namespace voxpath
