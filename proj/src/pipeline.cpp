#include "voxpath/pipeline.hpp"

#include "voxpath/errors.hpp"
#include "voxpath/volume_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

namespace voxpath {

using nlohmann::ordered_json;

namespace {

Vec3i nearest_voxel(const GridLayout& grid, const Vec3& p) {
  Vec3i v;
  for (int a = 0; a < 3; ++a) {
    v[a] = int(std::lround((p[a] - grid.origin[a]) / grid.spacing[a]));
    v[a] = std::clamp(v[a], 0, grid.dims[a] - 1);
  }
  return v;
}

template <typename F>
auto stage(const std::string& name, F&& fn) {
  try {
    return fn();
  } catch (const config_error& e) {
    throw config_error("[" + name + "] " + e.what());
  } catch (const io_error& e) {
    throw io_error("[" + name + "] " + e.what());
  } catch (const detection_error& e) {
    throw detection_error("[" + name + "] " + e.what());
  } catch (const solver_error& e) {
    throw solver_error("[" + name + "] " + e.what());
  } catch (const std::invalid_argument& e) {
    throw solver_error("[" + name + "] " + e.what());
  } catch (const std::out_of_range& e) {
    throw solver_error("[" + name + "] " + e.what());
  }
}

}  // namespace

ordered_json RunReport::to_json(bool include_timings) const {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["config"] = config_to_json(config);
  doc["environment"] = ordered_json{{"compiler",
#if defined(__clang__)
                                     "clang " __clang_version__
#elif defined(__GNUC__)
                                     "gcc " __VERSION__
#else
                                     "unknown"
#endif
                                    },
                                    {"float_format", "ieee754-binary64"}};

  const auto scheme_json = [&](const SchemeReport& s) {
    ordered_json j;
    j["accepted_voxels"] = s.accepted_voxels;
    j["s_net"] = s.s_net;
    j["coverage"] = s.coverage;
    j["failed_paths"] = s.failed_paths;
    j["contour_seeds"] = s.contour_seeds;
    if (include_timings) j["wall_ms"] = s.wall_ms;
    return j;
  };
  doc["baseline"] = scheme_json(baseline);
  doc["corrected"] = scheme_json(corrected);
  doc["coverage_gap"] = coverage_gap;
  return doc;
}

RunReport run_compare(const CompareConfig& cfg, const std::filesystem::path& out_dir,
                      bool include_timings) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw io_error("cannot create output directory " + out_dir.string());

  const ScalarField3 intensity = stage("phantom", [&] {
    return make_phantom(cfg.ellipsoids, cfg.dims, cfg.spacing, cfg.noise_sigma,
                        cfg.noise_seed, cfg.origin);
  });
  const ScalarField3 metric = stage("metric", [&] { return build_metric(intensity, cfg.metric); });

  const ZeroSet zs = ZeroSet::ball(nearest_voxel(intensity.grid, cfg.seed_point),
                                   cfg.zero_radius_voxels);

  const Contour detected = stage("contour", [&] {
    return detect_plane_contour(intensity, cfg.plane, cfg.contour_iso);
  });
  const Contour seeds = cfg.seed_count > 0 && detected.points.size() > std::size_t(cfg.seed_count)
                            ? resample_contour(detected, cfg.seed_count)
                            : detected;

  const VoxelMask surface = stage("surface", [&] {
    return reference_surface_mask(cfg.ellipsoids, cfg.dims, cfg.spacing, cfg.origin);
  });

  RunReport report;
  report.config = cfg;

  const bool want_csv = std::find(cfg.formats.begin(), cfg.formats.end(), "csv") != cfg.formats.end();
  const bool want_ply = std::find(cfg.formats.begin(), cfg.formats.end(), "ply") != cfg.formats.end();

  save_volume(intensity, out_dir / "phantom");
  save_volume(metric, out_dir / "metric");

  for (const Scheme scheme : {Scheme::Baseline, Scheme::Corrected}) {
    const std::string tag = scheme == Scheme::Baseline ? "baseline" : "corrected";
    const auto t0 = std::chrono::steady_clock::now();

    SolverConfig solver;
    solver.scheme = scheme;
    solver.curvature = cfg.curvature;
    solver.lambda = cfg.lambda;
    solver.neighborhood = cfg.neighborhood;
    solver.kappa_clamp = cfg.kappa_clamp;
    solver.delta_s_max = cfg.delta_s_max;
    solver.stop = StopRule::plane_reached(cfg.plane);

    const ArrivalMap map = stage("solve-" + tag, [&] { return solve(metric, zs, solver); });
    const PathNetwork net = stage("trace-" + tag, [&] {
      return build_network(map, seeds, cfg.trace_step, cfg.trace_eps_stop);
    });

    SchemeReport& sr = scheme == Scheme::Baseline ? report.baseline : report.corrected;
    sr.accepted_voxels = map.accepted_count();
    sr.s_net = network_energy(net, metric);
    sr.coverage = stage("coverage-" + tag, [&] {
      return surface_coverage(net, surface, cfg.tube_radius);
    });
    sr.failed_paths = std::int64_t(net.failed_count());
    sr.contour_seeds = std::int64_t(seeds.points.size());

    save_volume(map.action, out_dir / ("action_" + tag));
    if (want_csv) export_network_csv(net, out_dir / ("network_" + tag + ".csv"));
    if (want_ply) export_network_ply(net, out_dir / ("network_" + tag + ".ply"));

    const auto t1 = std::chrono::steady_clock::now();
    sr.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }

  report.coverage_gap = report.corrected.coverage - report.baseline.coverage;

  std::ofstream out(out_dir / "report.json");
  if (!out) throw io_error("cannot write report.json");
  out << report.to_json(include_timings).dump(2) << "\n";
  if (!out) throw io_error("write failed: report.json");
  return report;
}

}  // namespace voxpath
