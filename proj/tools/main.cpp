#include "voxpath/config.hpp"
#include "voxpath/errors.hpp"
#include "voxpath/pipeline.hpp"
#include "voxpath/surfana.hpp"
#include "voxpath/volume_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>

namespace {

using namespace voxpath;
using nlohmann::ordered_json;

Vec3 to_vec3(const std::vector<double>& v) { return Vec3(v[0], v[1], v[2]); }

Vec3i nearest_voxel(const GridLayout& grid, const Vec3& p) {
  Vec3i v;
  for (int a = 0; a < 3; ++a) {
    const int i = int(std::lround((p[a] - grid.origin[a]) / grid.spacing[a]));
    v[a] = std::clamp(i, 0, grid.dims[a] - 1);
  }
  return v;
}

// Status volumes ride along as f32 payloads with values {0,1,2}.
void save_status(const ArrivalMap& map, const std::filesystem::path& stem) {
  ScalarField3 st(map.action.grid);
  for (std::size_t i = 0; i < map.status.size(); ++i) {
    st.values[i] = double(static_cast<int>(map.status[i]));
  }
  save_volume(st, stem);
}

ArrivalMap load_arrival(const std::filesystem::path& action_stem,
                        const std::filesystem::path& metric_path) {
  ArrivalMap map;
  map.action = load_volume(action_stem);
  map.source_metric = std::make_shared<ScalarField3>(load_volume(metric_path));

  std::filesystem::path status_stem = action_stem;
  status_stem += "_status";
  const ScalarField3 st = load_volume(status_stem);
  if (!st.grid.same_shape(map.action.grid)) {
    throw io_error("status volume shape does not match action volume");
  }
  map.status.resize(st.values.size());
  map.accept_order.assign(st.values.size(), -1);
  for (std::size_t i = 0; i < st.values.size(); ++i) {
    const int s = int(std::lround(st.values[i]));
    if (s < 0 || s > 2) throw io_error("status volume holds a value outside {0,1,2}");
    map.status[i] = static_cast<VoxelStatus>(s);
  }
  return map;
}

int run_phantom(const std::string& config_path, const std::string& out) {
  const CompareConfig cfg = config_path.empty() ? default_compare_config()
                                                : load_config(config_path);
  const ScalarField3 vol = make_phantom(cfg.ellipsoids, cfg.dims, cfg.spacing,
                                        cfg.noise_sigma, cfg.noise_seed, cfg.origin);
  save_volume(vol, out);
  std::cout << "wrote " << out << ".raw (" << vol.grid.dims.x() << "x" << vol.grid.dims.y()
            << "x" << vol.grid.dims.z() << ")\n";
  return 0;
}

int run_metric(const std::string& input, const std::string& out, const MetricParams& params) {
  const ScalarField3 intensity = load_volume(input);
  const ScalarField3 phi = build_metric(intensity, params);
  save_volume(phi, out);
  std::cout << "wrote " << out << ".raw\n";
  return 0;
}

int run_solve(const std::string& metric_path, const std::string& out,
              const std::vector<double>& seed, double radius, const std::string& scheme,
              const std::string& curvature, double lambda, int neighborhood,
              double kappa_clamp, const std::string& stop,
              const std::vector<double>& plane_point,
              const std::vector<double>& plane_normal, double s_max) {
  const ScalarField3 metric = load_volume(metric_path);

  SolverConfig cfg;
  cfg.scheme = scheme == "corrected" ? Scheme::Corrected : Scheme::Baseline;
  cfg.curvature = curvature == "mean" ? CurvatureKind::Mean : CurvatureKind::Sum;
  cfg.lambda = lambda;
  cfg.neighborhood = neighborhood;
  cfg.kappa_clamp = kappa_clamp;
  if (stop == "plane") {
    cfg.stop = StopRule::plane_reached(PlaneSpec::make(to_vec3(plane_point), to_vec3(plane_normal)));
  } else if (stop == "action") {
    cfg.stop = StopRule::action_limit(s_max);
  } else {
    cfg.stop = StopRule::full_grid();
  }

  const ZeroSet zs = ZeroSet::ball(nearest_voxel(metric.grid, to_vec3(seed)), radius);
  const ArrivalMap map = solve(metric, zs, cfg);
  save_volume(map.action, out);
  save_status(map, out + "_status");
  std::cout << "wrote " << out << ".raw, " << out << "_status.raw ("
            << map.accepted_count() << " accepted voxels)\n";
  return 0;
}

int run_trace(const std::string& action_path, const std::string& metric_path,
              const std::string& intensity_path, const std::vector<double>& plane_point,
              const std::vector<double>& plane_normal, double iso, int seed_count,
              double step, double eps_stop, const std::string& out,
              const std::vector<std::string>& formats) {
  const ArrivalMap map = load_arrival(action_path, metric_path);
  const ScalarField3 intensity = load_volume(intensity_path);
  const PlaneSpec plane = PlaneSpec::make(to_vec3(plane_point), to_vec3(plane_normal));

  Contour contour = detect_plane_contour(intensity, plane, iso);
  if (seed_count > 0 && contour.points.size() > std::size_t(seed_count)) {
    contour = resample_contour(contour, seed_count);
  }
  const PathNetwork net = build_network(map, contour, step, eps_stop);

  for (const std::string& f : formats) {
    if (f == "csv") export_network_csv(net, out + ".csv");
    else if (f == "ply") export_network_ply(net, out + ".ply");
    else throw config_error("unknown export format: " + f);
  }

  ordered_json stats;
  stats["contour_seeds"] = contour.points.size();
  stats["failed_paths"] = net.failed_count();
  stats["s_net"] = network_energy(net, *map.source_metric);
  std::cout << stats.dump(2) << "\n";
  return 0;
}

int run_compare_cmd(const std::string& config_path, const std::string& out_dir,
                    bool timings, bool dump_default) {
  if (dump_default) {
    std::cout << config_to_json(default_compare_config()).dump(2) << "\n";
    return 0;
  }
  const CompareConfig cfg = config_path.empty() ? default_compare_config()
                                                : load_config(config_path);
  const RunReport report = run_compare(cfg, out_dir, timings);
  std::cout << report.to_json(timings).dump(2) << "\n";
  return 0;
}

int run_analyze(const std::string& network_path, const std::string& metric_path,
                bool sphere_check, bool closed_seeds) {
  ordered_json doc;
  if (sphere_check) {
    // Analytic identities on spheres: area magnification and quadrature.
    const double radius = 2.0;
    const double offset = 0.5;
    doc["equidistant_area_factor"] = equidistant_area_factor(2.0 / radius, 1.0 / (radius * radius), offset);
    doc["sphere_exact"] = ((radius + offset) / radius) * ((radius + offset) / radius);

    const int nu = 256, nv = 512;
    ParametricSurfaceSamples sphere;
    sphere.nu = nu;
    sphere.nv = nv;
    sphere.u0 = std::numbers::pi / (2.0 * nu);
    sphere.u1 = std::numbers::pi - sphere.u0;
    sphere.v0 = 0.0;
    sphere.v1 = 2.0 * std::numbers::pi;
    sphere.v_periodic = true;
    sphere.positions.reserve(std::size_t(nu) * nv);
    for (int i = 0; i < nu; ++i) {
      const double th = sphere.u0 + i * (sphere.u1 - sphere.u0) / (nu - 1);
      for (int j = 0; j < nv; ++j) {
        const double ph = 2.0 * std::numbers::pi * j / nv;
        sphere.positions.emplace_back(std::sin(th) * std::cos(ph),
                                      std::sin(th) * std::sin(ph), std::cos(th));
      }
    }
    const SurfaceActionResult area =
        isotropic_surface_action(sphere, [](const Vec3&) { return 1.0; });
    doc["unit_sphere_area"] = area.value;
    doc["unit_sphere_exact"] = 4.0 * std::numbers::pi;
    std::cout << doc.dump(2) << "\n";
    return 0;
  }

  PathNetwork net = import_network_csv(network_path);
  net.seeds_closed = closed_seeds;
  const ScalarField3 phi = load_volume(metric_path);
  doc["paths"] = net.paths.size();
  doc["s_net"] = network_energy(net, phi);
  const NetworkResidualReport rep = network_action_residual(net, phi);
  doc["weighted_estimate"] = rep.weighted_estimate;
  doc["spacing_mean"] = rep.spacing_mean;
  doc["spacing_min"] = rep.spacing_min;
  doc["spacing_max"] = rep.spacing_max;
  std::cout << doc.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxel minimal-path toolkit"};
  app.require_subcommand(1);

  std::string config_path, out, input, metric_path, action_path, intensity_path, network_path;
  std::vector<double> seed{0, 0, 0}, plane_point{0, 0, 0}, plane_normal{0, 0, 1};
  double radius = 3.0, lambda = 1.0, kappa_clamp = 0.5, s_max = 0.0;
  double iso = 0.3, step = 0.0, eps_stop = 0.0;
  int neighborhood = 26, seed_count = 64;
  std::string scheme = "baseline", curvature = "sum", stop = "full";
  std::vector<std::string> formats{"csv", "ply"};
  bool timings = false, dump_default = false, sphere_check = false, closed_seeds = true;
  MetricParams metric_params;
  std::string variant = "convex_combination";

  CLI::App* phantom = app.add_subcommand("phantom", "synthesize the test volume");
  phantom->add_option("-c,--config", config_path, "config JSON (defaults used when absent)");
  phantom->add_option("-o,--output", out, "output volume stem")->required();

  CLI::App* metric = app.add_subcommand("metric", "build the slowness phi from an intensity volume");
  metric->add_option("-i,--input", input, "intensity volume")->required();
  metric->add_option("-o,--output", out, "output volume stem")->required();
  metric->add_option("--alpha", metric_params.alpha, "edge floor alpha");
  metric->add_option("--beta", metric_params.beta, "gradient sensitivity beta");
  metric->add_option("--variant", variant, "convex_combination|paper_literal");
  metric->add_option("--epsilon-floor", metric_params.epsilon_floor, "positivity floor");

  CLI::App* solve_cmd = app.add_subcommand("solve", "propagate the arrival map");
  solve_cmd->add_option("-m,--metric", metric_path, "metric volume")->required();
  solve_cmd->add_option("-o,--output", out, "output stem (also writes <out>_status)")->required();
  solve_cmd->add_option("--seed", seed, "seed point (world)")->expected(3);
  solve_cmd->add_option("--radius", radius, "zero-set ball radius in voxels");
  solve_cmd->add_option("--scheme", scheme, "baseline|corrected");
  solve_cmd->add_option("--curvature", curvature, "sum|mean");
  solve_cmd->add_option("--lambda", lambda, "correction strength in [0,1]");
  solve_cmd->add_option("--neighborhood", neighborhood, "6|18|26");
  solve_cmd->add_option("--kappa-clamp", kappa_clamp, "curvature clamp (units 1/h)");
  solve_cmd->add_option("--stop", stop, "full|plane|action");
  solve_cmd->add_option("--plane-point", plane_point, "plane point")->expected(3);
  solve_cmd->add_option("--plane-normal", plane_normal, "plane normal")->expected(3);
  solve_cmd->add_option("--s-max", s_max, "action limit for --stop action");

  CLI::App* trace = app.add_subcommand("trace", "detect the contour and backtrace the network");
  trace->add_option("-a,--action", action_path, "action volume stem from solve")->required();
  trace->add_option("-m,--metric", metric_path, "metric volume")->required();
  trace->add_option("-i,--intensity", intensity_path, "intensity volume")->required();
  trace->add_option("--plane-point", plane_point, "plane point")->expected(3);
  trace->add_option("--plane-normal", plane_normal, "plane normal")->expected(3);
  trace->add_option("--iso", iso, "contour iso value");
  trace->add_option("--seeds", seed_count, "resampled seed count (0 = all contour points)");
  trace->add_option("--step", step, "descent step (0 = h/2)");
  trace->add_option("--eps-stop", eps_stop, "stop action (0 = 0.5*h*phi_min)");
  trace->add_option("-o,--output", out, "output network stem")->required();
  trace->add_option("--formats", formats, "csv ply");

  CLI::App* compare = app.add_subcommand("compare", "run both schemes end to end and report");
  compare->add_option("-c,--config", config_path, "config JSON (defaults used when absent)");
  compare->add_option("-o,--output", out, "output directory")->required();
  compare->add_flag("--timings", timings, "include wall times in report.json");
  compare->add_flag("--dump-default-config", dump_default, "print the default config and exit");

  CLI::App* analyze = app.add_subcommand("analyze", "network spacing diagnostics and sphere identities");
  analyze->add_option("--network", network_path, "network CSV from trace/compare");
  analyze->add_option("--metric", metric_path, "metric volume");
  analyze->add_flag("--sphere-check", sphere_check, "print analytic sphere identities");
  analyze->add_flag("--open-seeds{false}", closed_seeds, "seed contour was not closed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (phantom->parsed()) return run_phantom(config_path, out);
    if (metric->parsed()) {
      if (variant == "paper_literal") metric_params.variant = MetricVariant::PaperLiteral;
      else if (variant == "convex_combination") metric_params.variant = MetricVariant::ConvexCombination;
      else throw config_error("unknown metric variant: " + variant);
      return run_metric(input, out, metric_params);
    }
    if (solve_cmd->parsed()) {
      return run_solve(metric_path, out, seed, radius, scheme, curvature, lambda,
                       neighborhood, kappa_clamp, stop, plane_point, plane_normal, s_max);
    }
    if (trace->parsed()) {
      return run_trace(action_path, metric_path, intensity_path, plane_point, plane_normal,
                       iso, seed_count, step, eps_stop, out, formats);
    }
    if (compare->parsed()) return run_compare_cmd(config_path, out, timings, dump_default);
    if (analyze->parsed()) {
      if (!sphere_check && (network_path.empty() || metric_path.empty())) {
        throw config_error("analyze needs --network and --metric, or --sphere-check");
      }
      return run_analyze(network_path, metric_path, sphere_check, closed_seeds);
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const io_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
