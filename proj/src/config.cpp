#include "voxpath/config.hpp"

#include "voxpath/errors.hpp"

#include <fstream>

namespace voxpath {

using nlohmann::ordered_json;

CompareConfig default_compare_config() {
  CompareConfig cfg;
  cfg.dims = Vec3i(96, 96, 96);

  EllipsoidSpec a;
  a.center = Vec3(42.0, 48.0, 46.0);
  a.semi_axes = Vec3(18.0, 12.0, 10.0);
  a.intensity_base = 0.8;
  a.intensity_gradient = Vec3(0.004, 0.002, 0.0);

  EllipsoidSpec b;
  b.center = Vec3(58.0, 50.0, 44.0);
  b.semi_axes = Vec3(12.0, 10.0, 8.0);
  b.intensity_base = 0.6;
  b.intensity_gradient = Vec3(0.0, 0.003, 0.002);

  cfg.ellipsoids = {a, b};
  cfg.seed_point = Vec3(42.0, 48.0, 56.0);  // on top of ellipsoid A
  cfg.plane = PlaneSpec::make(Vec3(48.0, 48.0, 42.0), Vec3(0.0, 0.0, 1.0));
  return cfg;
}

namespace {

ordered_json vec_json(const Vec3& v) { return ordered_json{v.x(), v.y(), v.z()}; }
ordered_json vec_json(const Vec3i& v) { return ordered_json{v.x(), v.y(), v.z()}; }

Vec3 vec_from(const ordered_json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3) throw config_error(key + " must be a 3-array");
  for (int a = 0; a < 3; ++a) {
    if (!j.at(a).is_number()) throw config_error(key + " must contain numbers");
  }
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

Vec3i vec3i_from(const ordered_json& j, const std::string& key) {
  const Vec3 v = vec_from(j, key);
  return Vec3i(int(v.x()), int(v.y()), int(v.z()));
}

}  // namespace

ordered_json config_to_json(const CompareConfig& cfg) {
  ordered_json doc;
  doc["version"] = 1;

  ordered_json phantom;
  phantom["dims"] = vec_json(cfg.dims);
  phantom["spacing"] = vec_json(cfg.spacing);
  phantom["origin"] = vec_json(cfg.origin);
  phantom["noise_sigma"] = cfg.noise_sigma;
  phantom["noise_seed"] = cfg.noise_seed;
  ordered_json ellipsoids = ordered_json::array();
  for (const EllipsoidSpec& e : cfg.ellipsoids) {
    ordered_json ej;
    ej["center"] = vec_json(e.center);
    ej["semi_axes"] = vec_json(e.semi_axes);
    ej["intensity_base"] = e.intensity_base;
    ej["intensity_gradient"] = vec_json(e.intensity_gradient);
    ellipsoids.push_back(ej);
  }
  phantom["ellipsoids"] = ellipsoids;
  doc["phantom"] = phantom;

  ordered_json metric;
  metric["alpha"] = cfg.metric.alpha;
  metric["beta"] = cfg.metric.beta;
  metric["variant"] = cfg.metric.variant == MetricVariant::ConvexCombination
                          ? "convex_combination"
                          : "paper_literal";
  metric["epsilon_floor"] = cfg.metric.epsilon_floor;
  doc["metric"] = metric;

  doc["seed_point"] = vec_json(cfg.seed_point);
  doc["zero_radius_voxels"] = cfg.zero_radius_voxels;

  ordered_json plane;
  plane["point"] = vec_json(cfg.plane.point);
  plane["normal"] = vec_json(cfg.plane.normal);
  doc["plane"] = plane;

  ordered_json solver;
  solver["curvature"] = cfg.curvature == CurvatureKind::Sum ? "sum" : "mean";
  solver["lambda"] = cfg.lambda;
  solver["neighborhood"] = cfg.neighborhood;
  solver["kappa_clamp"] = cfg.kappa_clamp;
  solver["delta_s_max"] = cfg.delta_s_max;
  doc["solver"] = solver;

  ordered_json trace;
  trace["contour_iso"] = cfg.contour_iso;
  trace["seed_count"] = cfg.seed_count;
  trace["step"] = cfg.trace_step;
  trace["eps_stop"] = cfg.trace_eps_stop;
  trace["tube_radius"] = cfg.tube_radius;
  doc["trace"] = trace;

  doc["output"] = ordered_json{{"formats", cfg.formats}};
  return doc;
}

CompareConfig config_from_json(const ordered_json& doc) {
  CompareConfig cfg = default_compare_config();
  try {
    if (doc.contains("version") && doc.at("version").get<int>() != 1) {
      throw config_error("unsupported config version");
    }

    if (doc.contains("phantom")) {
      const auto& p = doc.at("phantom");
      if (p.contains("dims")) cfg.dims = vec3i_from(p.at("dims"), "phantom.dims");
      if (p.contains("spacing")) cfg.spacing = vec_from(p.at("spacing"), "phantom.spacing");
      if (p.contains("origin")) cfg.origin = vec_from(p.at("origin"), "phantom.origin");
      if (p.contains("noise_sigma")) cfg.noise_sigma = p.at("noise_sigma").get<double>();
      if (p.contains("noise_seed")) cfg.noise_seed = p.at("noise_seed").get<std::uint64_t>();
      if (p.contains("ellipsoids")) {
        cfg.ellipsoids.clear();
        for (const auto& ej : p.at("ellipsoids")) {
          EllipsoidSpec e;
          e.center = vec_from(ej.at("center"), "ellipsoid.center");
          e.semi_axes = vec_from(ej.at("semi_axes"), "ellipsoid.semi_axes");
          if (ej.contains("intensity_base")) e.intensity_base = ej.at("intensity_base").get<double>();
          if (ej.contains("intensity_gradient")) {
            e.intensity_gradient = vec_from(ej.at("intensity_gradient"), "ellipsoid.intensity_gradient");
          }
          cfg.ellipsoids.push_back(e);
        }
      }
    }

    if (doc.contains("metric")) {
      const auto& m = doc.at("metric");
      if (m.contains("alpha")) cfg.metric.alpha = m.at("alpha").get<double>();
      if (m.contains("beta")) cfg.metric.beta = m.at("beta").get<double>();
      if (m.contains("epsilon_floor")) cfg.metric.epsilon_floor = m.at("epsilon_floor").get<double>();
      if (m.contains("variant")) {
        const std::string v = m.at("variant").get<std::string>();
        if (v == "convex_combination") cfg.metric.variant = MetricVariant::ConvexCombination;
        else if (v == "paper_literal") cfg.metric.variant = MetricVariant::PaperLiteral;
        else throw config_error("metric.variant must be convex_combination or paper_literal");
      }
    }

    if (doc.contains("seed_point")) cfg.seed_point = vec_from(doc.at("seed_point"), "seed_point");
    if (doc.contains("zero_radius_voxels")) {
      cfg.zero_radius_voxels = doc.at("zero_radius_voxels").get<double>();
    }

    if (doc.contains("plane")) {
      const auto& pl = doc.at("plane");
      cfg.plane = PlaneSpec::make(vec_from(pl.at("point"), "plane.point"),
                                  vec_from(pl.at("normal"), "plane.normal"));
    }

    if (doc.contains("solver")) {
      const auto& s = doc.at("solver");
      if (s.contains("curvature")) {
        const std::string c = s.at("curvature").get<std::string>();
        if (c == "sum") cfg.curvature = CurvatureKind::Sum;
        else if (c == "mean") cfg.curvature = CurvatureKind::Mean;
        else throw config_error("solver.curvature must be sum or mean");
      }
      if (s.contains("lambda")) cfg.lambda = s.at("lambda").get<double>();
      if (s.contains("neighborhood")) cfg.neighborhood = s.at("neighborhood").get<int>();
      if (s.contains("kappa_clamp")) cfg.kappa_clamp = s.at("kappa_clamp").get<double>();
      if (s.contains("delta_s_max")) cfg.delta_s_max = s.at("delta_s_max").get<double>();
    }

    if (doc.contains("trace")) {
      const auto& t = doc.at("trace");
      if (t.contains("contour_iso")) cfg.contour_iso = t.at("contour_iso").get<double>();
      if (t.contains("seed_count")) cfg.seed_count = t.at("seed_count").get<int>();
      if (t.contains("step")) cfg.trace_step = t.at("step").get<double>();
      if (t.contains("eps_stop")) cfg.trace_eps_stop = t.at("eps_stop").get<double>();
      if (t.contains("tube_radius")) cfg.tube_radius = t.at("tube_radius").get<double>();
    }

    if (doc.contains("output") && doc.at("output").contains("formats")) {
      cfg.formats = doc.at("output").at("formats").get<std::vector<std::string>>();
    }
  } catch (const config_error&) {
    throw;
  } catch (const std::exception& e) {
    throw config_error(std::string("malformed config: ") + e.what());
  }

  // validation beyond what downstream modules check themselves
  if (cfg.ellipsoids.empty()) throw config_error("phantom.ellipsoids must be non-empty");
  if (cfg.dims.minCoeff() < 16) throw config_error("phantom.dims must be >= 16 per axis");
  if (!(cfg.metric.alpha > 0.0 && cfg.metric.alpha < 1.0)) {
    throw config_error("metric.alpha must be in (0,1)");
  }
  if (!(cfg.metric.beta > 0.0)) throw config_error("metric.beta must be > 0");
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0) throw config_error("solver.lambda must be in [0,1]");
  if (cfg.neighborhood != 6 && cfg.neighborhood != 18 && cfg.neighborhood != 26) {
    throw config_error("solver.neighborhood must be 6, 18 or 26");
  }
  if (cfg.zero_radius_voxels < 0.0) throw config_error("zero_radius_voxels must be >= 0");
  if (!(cfg.tube_radius > 0.0)) throw config_error("trace.tube_radius must be > 0");
  if (cfg.seed_count < 0) throw config_error("trace.seed_count must be >= 0");
  for (const std::string& f : cfg.formats) {
    if (f != "csv" && f != "ply") throw config_error("output.formats entries must be csv or ply");
  }
  return cfg;
}

CompareConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read config " + path.string());
  ordered_json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw config_error("config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(doc);
}

}  // namespace voxpath
