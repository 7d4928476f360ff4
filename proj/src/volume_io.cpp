#include "voxpath/volume_io.hpp"

#include "voxpath/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace voxpath {

namespace {

using nlohmann::ordered_json;

struct VolumePaths {
  std::filesystem::path raw;
  std::filesystem::path sidecar;
};

VolumePaths volume_paths(const std::filesystem::path& path) {
  std::filesystem::path stem = path;
  const std::string ext = path.extension().string();
  if (ext == ".raw" || ext == ".json") stem.replace_extension();
  VolumePaths p;
  p.raw = stem;
  p.raw += ".raw";
  p.sidecar = stem;
  p.sidecar += ".json";
  return p;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ScalarField3 load_volume(const std::filesystem::path& path) {
  const VolumePaths p = volume_paths(path);

  std::ifstream side(p.sidecar);
  if (!side) throw io_error("missing volume sidecar: " + p.sidecar.string());
  ordered_json header;
  try {
    side >> header;
  } catch (const std::exception& e) {
    throw io_error("bad volume sidecar " + p.sidecar.string() + ": " + e.what());
  }

  GridLayout grid;
  std::string dtype_name;
  try {
    for (int a = 0; a < 3; ++a) {
      grid.dims[a] = header.at("dims").at(a).get<int>();
      grid.spacing[a] = header.at("spacing").at(a).get<double>();
      grid.origin[a] = header.at("origin").at(a).get<double>();
    }
    dtype_name = header.at("dtype").get<std::string>();
    if (header.at("byte_order").get<std::string>() != "little") {
      throw io_error("unsupported byte order in " + p.sidecar.string());
    }
  } catch (const io_error&) {
    throw;
  } catch (const std::exception& e) {
    throw io_error("bad volume sidecar " + p.sidecar.string() + ": " + e.what());
  }
  VolumeDtype dtype;
  if (dtype_name == "f32") dtype = VolumeDtype::F32;
  else if (dtype_name == "u8") dtype = VolumeDtype::U8;
  else throw io_error("bad dtype '" + dtype_name + "' in " + p.sidecar.string());

  try {
    validate_layout(grid);
  } catch (const std::exception& e) {
    throw io_error("bad volume header " + p.sidecar.string() + ": " + e.what());
  }

  std::ifstream raw(p.raw, std::ios::binary);
  if (!raw) throw io_error("missing volume payload: " + p.raw.string());
  raw.seekg(0, std::ios::end);
  const std::int64_t actual = raw.tellg();
  raw.seekg(0, std::ios::beg);

  const std::int64_t count = grid.voxel_count();
  const std::int64_t element = dtype == VolumeDtype::F32 ? 4 : 1;
  const std::int64_t expected = count * element;
  if (actual != expected) {
    throw io_error("volume size mismatch in " + p.raw.string() + ": expected " +
                   std::to_string(expected) + " bytes, found " + std::to_string(actual));
  }

  ScalarField3 field(grid);
  if (dtype == VolumeDtype::F32) {
    std::vector<float> buf(static_cast<std::size_t>(count));
    raw.read(reinterpret_cast<char*>(buf.data()), expected);
    if (!raw) throw io_error("short read from " + p.raw.string());
    for (std::int64_t i = 0; i < count; ++i) {
      const float v = buf[std::size_t(i)];
      if (std::isnan(v)) throw io_error("NaN at element " + std::to_string(i) + " of " + p.raw.string());
      field.values[std::size_t(i)] = double(v);
    }
  } else {
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(count));
    raw.read(reinterpret_cast<char*>(buf.data()), expected);
    if (!raw) throw io_error("short read from " + p.raw.string());
    for (std::int64_t i = 0; i < count; ++i) {
      field.values[std::size_t(i)] = double(buf[std::size_t(i)]) / 255.0;
    }
  }
  return field;
}

void save_volume(const ScalarField3& field, const std::filesystem::path& path,
                 VolumeDtype dtype) {
  const VolumePaths p = volume_paths(path);

  ordered_json header;
  header["dims"] = {field.grid.dims.x(), field.grid.dims.y(), field.grid.dims.z()};
  header["spacing"] = {field.grid.spacing.x(), field.grid.spacing.y(), field.grid.spacing.z()};
  header["origin"] = {field.grid.origin.x(), field.grid.origin.y(), field.grid.origin.z()};
  header["dtype"] = dtype == VolumeDtype::F32 ? "f32" : "u8";
  header["byte_order"] = "little";

  std::ofstream side(p.sidecar);
  if (!side) throw io_error("cannot write " + p.sidecar.string());
  side << header.dump(2) << "\n";
  if (!side) throw io_error("write failed: " + p.sidecar.string());

  std::ofstream raw(p.raw, std::ios::binary);
  if (!raw) throw io_error("cannot write " + p.raw.string());
  if (dtype == VolumeDtype::F32) {
    std::vector<float> buf(field.values.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = float(field.values[i]);
    raw.write(reinterpret_cast<const char*>(buf.data()),
              std::streamsize(buf.size() * sizeof(float)));
  } else {
    std::vector<std::uint8_t> buf(field.values.size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const double v = std::clamp(field.values[i], 0.0, 1.0);
      buf[i] = std::uint8_t(std::lround(v * 255.0));
    }
    raw.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  }
  if (!raw) throw io_error("write failed: " + p.raw.string());
}

void export_network_csv(const PathNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << "path_id,point_index,x,y,z,action\n";
  for (std::size_t pid = 0; pid < net.paths.size(); ++pid) {
    const Path& p = net.paths[pid];
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      const double action = i < p.action.size() ? p.action[i] : 0.0;
      out << pid << ',' << i << ',' << fmt(p.points[i].x()) << ',' << fmt(p.points[i].y())
          << ',' << fmt(p.points[i].z()) << ',' << fmt(action) << '\n';
    }
  }
  if (!out) throw io_error("write failed: " + path.string());
}

PathNetwork import_network_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty network file " + path.string());

  PathNetwork net;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    long pid = -1, idx = -1;
    double x = 0, y = 0, z = 0, action = 0;
    if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%lf,%lf,%lf", &pid, &idx, &x, &y, &z,
                    &action) != 6 ||
        pid < 0) {
      throw io_error("bad network row at line " + std::to_string(lineno) + " of " +
                     path.string());
    }
    if (std::size_t(pid) >= net.paths.size()) net.paths.resize(std::size_t(pid) + 1);
    net.paths[std::size_t(pid)].points.emplace_back(x, y, z);
    net.paths[std::size_t(pid)].action.push_back(action);
  }
  return net;
}

void export_network_ply(const PathNetwork& net, const std::filesystem::path& path) {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  for (const Path& p : net.paths) {
    vertices += p.points.size();
    if (p.points.size() > 1) edges += p.points.size() - 1;
  }

  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << vertices << "\n";
  out << "property float x\nproperty float y\nproperty float z\nproperty float action\n";
  out << "element edge " << edges << "\n";
  out << "property int vertex1\nproperty int vertex2\n";
  out << "end_header\n";

  for (const Path& p : net.paths) {
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      const double action = i < p.action.size() ? p.action[i] : 0.0;
      out << fmt(p.points[i].x()) << ' ' << fmt(p.points[i].y()) << ' '
          << fmt(p.points[i].z()) << ' ' << fmt(action) << '\n';
    }
  }
  std::size_t base = 0;
  for (const Path& p : net.paths) {
    for (std::size_t i = 1; i < p.points.size(); ++i) {
      out << base + i - 1 << ' ' << base + i << '\n';
    }
    base += p.points.size();
  }
  if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace voxpath
