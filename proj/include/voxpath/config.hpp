#pragma once

#include "voxpath/eikonal.hpp"
#include "voxpath/phantom.hpp"
#include "voxpath/plane.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace voxpath {

/// Declarative description of one compare experiment. All solver and metric
/// parameters surface here with their default values.
struct CompareConfig {
  // phantom
  Vec3i dims = Vec3i(96, 96, 96);
  Vec3 spacing = Vec3::Ones();
  Vec3 origin = Vec3::Zero();
  double noise_sigma = 0.02;
  std::uint64_t noise_seed = 7;
  std::vector<EllipsoidSpec> ellipsoids;

  // metric
  MetricParams metric;

  // zero set and plane
  Vec3 seed_point = Vec3::Zero();
  double zero_radius_voxels = 3.0;
  PlaneSpec plane;

  // solver
  CurvatureKind curvature = CurvatureKind::Sum;
  double lambda = 1.0;
  int neighborhood = 26;
  double kappa_clamp = 0.5;
  double delta_s_max = 1.0;

  // tracing and scoring
  double contour_iso = 0.3;
  int seed_count = 64;  // 0 keeps every detected contour point
  double trace_step = 0.0;      // 0 -> h/2
  double trace_eps_stop = 0.0;  // 0 -> 0.5*h*phi_min
  double tube_radius = 1.5;

  // exports
  std::vector<std::string> formats = {"csv", "ply"};
};

/// The default desk-scale experiment: two overlapping inhomogeneous
/// ellipsoids, seed ball on top of the larger one, plane cutting both.
CompareConfig default_compare_config();

/// Schema-versioned JSON round-trip. Parsing validates and throws
/// voxpath::config_error with the offending key.
nlohmann::ordered_json config_to_json(const CompareConfig& cfg);
CompareConfig config_from_json(const nlohmann::ordered_json& doc);
CompareConfig load_config(const std::filesystem::path& path);

}  // namespace voxpath
