#pragma once

#include "voxpath/grid.hpp"
#include "voxpath/paths.hpp"

#include <functional>
#include <vector>

namespace voxpath {

/// Regular samples of a parametric surface S(u,v) on a tensor grid. Partials
/// are finite-differenced when not supplied. When v_periodic is set the last
/// v sample is the one before the wrap (node spacing (v1-v0)/nv); otherwise
/// nodes span [v0,v1] inclusive, and likewise for u.
struct ParametricSurfaceSamples {
  int nu = 0, nv = 0;
  double u0 = 0.0, u1 = 1.0;
  double v0 = 0.0, v1 = 1.0;
  bool v_periodic = false;
  std::vector<Vec3> positions;  // v-fastest: index = j + nv * i
  std::vector<Vec3> du, dv;     // optional analytic partials, same layout

  const Vec3& at(int i, int j) const { return positions[std::size_t(i) * nv + j]; }
  double ustep() const { return (u1 - u0) / (nu - 1); }
  double vstep() const { return v_periodic ? (v1 - v0) / nv : (v1 - v0) / (nv - 1); }
};

/// Area magnification of the equidistant surface at normal offset s:
/// |M|/|M0| = 1 + s*div_m + s^2*K_gauss. Exact for spheres, where it equals
/// ((R+s)/R)^2.
double equidistant_area_factor(double div_m, double k_gauss, double s);

/// First-order area change of an evolving front over a normal step ds:
/// 1 - K_sum * ds.
double immediate_area_ratio(double k_sum, double ds);

/// Companion mean-elementary-distance rate 1 - H*ds with H = K_sum/2.
double mean_distance_ratio(double k_sum, double ds);

/// Cumulative form initial * exp(-integral of K_sum * ds/dS), trapezoid
/// integration of uniformly spaced integrand samples over [0, s_max].
/// Shipped as a cross-check oracle for products of immediate ratios.
double cumulative_area(double initial, const std::vector<double>& integrand_samples,
                       double s_max);

struct SurfaceActionResult {
  double value = 0.0;
  bool orthogonal_form = false;  // |S_u||S_v| was used instead of |S_u x S_v|
};

/// Surface action integral of Phi over the sampled surface by tensor-product
/// trapezoid quadrature (periodic rule in v when flagged). Uses the
/// |S_u||S_v| weight when the parameter lines are orthogonal within 1e-6
/// everywhere, the general |S_u x S_v| weight otherwise. Throws
/// std::invalid_argument on degenerate samples (|N| = 0).
SurfaceActionResult isotropic_surface_action(const ParametricSurfaceSamples& surf,
                                             const std::function<double(const Vec3&)>& Phi);

struct NetworkResidualReport {
  double s_net = 0.0;             // plain weighted length of the network
  double weighted_estimate = 0.0; // segments weighted by inter-path spacing
  double spacing_mean = 0.0;
  double spacing_min = 0.0;
  double spacing_max = 0.0;
  std::vector<double> per_path_mean_spacing;
};

/// Diagnostic comparison of the network energy against a surface-action
/// estimate where every path segment is additionally weighted by the
/// distance to the nearest adjacent path. Requires at least 8 paths.
NetworkResidualReport network_action_residual(const PathNetwork& net,
                                              const ScalarField3& phi);

}  // namespace voxpath
