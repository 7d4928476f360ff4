#include "voxpath/grid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace voxpath {

namespace {

std::string index_string(const Vec3i& i) {
  return "(" + std::to_string(i.x()) + ", " + std::to_string(i.y()) + ", " +
         std::to_string(i.z()) + ")";
}

void require_inside(const GridLayout& grid, const Vec3i& index) {
  if (!grid.contains(index)) {
    throw std::out_of_range("voxel index " + index_string(index) + " outside grid");
  }
}

// Per-axis difference of a per-voxel quantity with the shared fallback rules:
// central where both neighbors are usable, else one-sided, else nullopt.
// `sample` returns nullopt for unusable voxels.
template <typename Sampler>
std::optional<double> axis_difference(const GridLayout& grid, const Vec3i& index,
                                      int axis, Sampler&& sample) {
  Vec3i plus = index;
  plus[axis] += 1;
  Vec3i minus = index;
  minus[axis] -= 1;

  const std::optional<double> vp = sample(plus);
  const std::optional<double> vm = sample(minus);
  const double h = grid.spacing[axis];

  if (vp && vm) return (*vp - *vm) / (2.0 * h);
  const std::optional<double> vc = sample(index);
  if (!vc) return std::nullopt;
  if (vp) return (*vp - *vc) / h;
  if (vm) return (*vc - *vm) / h;
  return std::nullopt;
}

}  // namespace

void validate_layout(const GridLayout& grid) {
  if (grid.dims.x() <= 0 || grid.dims.y() <= 0 || grid.dims.z() <= 0) {
    throw std::invalid_argument("grid dims must be positive");
  }
  if (!(grid.spacing.x() > 0.0) || !(grid.spacing.y() > 0.0) || !(grid.spacing.z() > 0.0)) {
    throw std::invalid_argument("grid spacing must be strictly positive");
  }
}

ScalarField3::ScalarField3(const GridLayout& g, double fill) : grid(g) {
  validate_layout(g);
  values.assign(std::size_t(g.voxel_count()), fill);
}

Vec3Field::Vec3Field(const GridLayout& g, const Vec3& fill) : grid(g) {
  validate_layout(g);
  values.assign(std::size_t(g.voxel_count()), fill);
}

VoxelMask::VoxelMask(const GridLayout& g, bool fill) : grid(g) {
  validate_layout(g);
  values.assign(std::size_t(g.voxel_count()), fill ? 1 : 0);
}

std::int64_t VoxelMask::count() const {
  std::int64_t n = 0;
  for (std::uint8_t v : values) n += v != 0;
  return n;
}

Vec3 gradient_at(const ScalarField3& field, const Vec3i& index, const VoxelMask* mask) {
  require_inside(field.grid, index);
  const auto sample = [&](const Vec3i& j) -> std::optional<double> {
    if (!field.grid.contains(j)) return std::nullopt;
    if (mask && !mask->test(j)) return std::nullopt;
    return field.at(j);
  };

  Vec3 g = Vec3::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    const std::optional<double> d = axis_difference(field.grid, index, axis, sample);
    if (!d) return Vec3::Zero();  // undefined
    g[axis] = *d;
  }
  return g;
}

std::optional<double> divergence_at(const Vec3Field& vf, const Vec3i& index,
                                    const VoxelMask* mask) {
  require_inside(vf.grid, index);
  double div = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const auto component = [&](const Vec3i& j) -> std::optional<double> {
      if (!vf.grid.contains(j)) return std::nullopt;
      if (mask && !mask->test(j)) return std::nullopt;
      return vf.at(j)[axis];
    };
    const std::optional<double> d = axis_difference(vf.grid, index, axis, component);
    if (!d) return std::nullopt;
    div += *d;
  }
  return div;
}

namespace {

constexpr double kNormalEps = 1e-12;

// Unit normal at a voxel, or nullopt where the masked gradient is undefined
// or numerically zero.
std::optional<Vec3> normal_at(const ScalarField3& field, const VoxelMask& mask,
                              const Vec3i& index) {
  if (!field.grid.contains(index) || !mask.test(index)) return std::nullopt;
  const Vec3 g = gradient_at(field, index, &mask);
  const double n = g.norm();
  if (n < kNormalEps) return std::nullopt;
  return Vec3(g / n);
}

}  // namespace

Vec3Field unit_normal_field(const ScalarField3& field, const VoxelMask& mask) {
  Vec3Field out(field.grid, Vec3::Zero());
  const Vec3i d = field.grid.dims;
  for (int z = 0; z < d.z(); ++z) {
    for (int y = 0; y < d.y(); ++y) {
      for (int x = 0; x < d.x(); ++x) {
        const Vec3i i(x, y, z);
        if (!mask.test(i)) continue;
        if (auto m = normal_at(field, mask, i)) out.at(i) = *m;
      }
    }
  }
  return out;
}

CurvatureSample sum_curvature_at(const ScalarField3& field, const VoxelMask& mask,
                                 const Vec3i& index, double kappa_clamp) {
  require_inside(field.grid, index);

  // div(m) as the trace of a least-squares affine fit of the normal field
  // over the masked 3x3x3 window. Per-axis differences of normalized
  // one-sided gradients are sign-unstable on the faceted fronts an ordered
  // solver produces; the windowed fit keeps expanding convex fronts at
  // K <= 0 and tracks -2/r on spheres.
  Vec3 off_sum = Vec3::Zero();
  Vec3 m_sum = Vec3::Zero();
  Vec3 offs[27];
  Vec3 ms[27];
  int count = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const Vec3i j = index + Vec3i(dx, dy, dz);
        if (!field.grid.contains(j) || !mask.test(j)) continue;
        const std::optional<Vec3> m = normal_at(field, mask, j);
        if (!m) continue;
        offs[count] = Vec3(dx * field.grid.spacing.x(), dy * field.grid.spacing.y(),
                           dz * field.grid.spacing.z());
        ms[count] = *m;
        off_sum += offs[count];
        m_sum += ms[count];
        ++count;
      }
  if (count < 7) return {0.0, true};

  const Vec3 off_mean = off_sum / double(count);
  const Vec3 m_mean = m_sum / double(count);
  Eigen::Matrix3d lhs = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d rhs = Eigen::Matrix3d::Zero();
  for (int i = 0; i < count; ++i) {
    const Vec3 o = offs[i] - off_mean;
    lhs += o * o.transpose();
    rhs += o * (ms[i] - m_mean).transpose();
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(lhs);
  if (!lu.isInvertible()) return {0.0, true};
  const Eigen::Matrix3d jac = lu.solve(rhs);  // jac(i,k) = d m_k / d x_i
  const double div = jac.trace();

  const double k_max = kappa_clamp / field.grid.min_spacing();
  const double k = std::clamp(-div, -k_max, k_max);
  return {k, false};
}

CurvatureSample mean_curvature_at(const ScalarField3& field, const VoxelMask& mask,
                                  const Vec3i& index, double kappa_clamp) {
  CurvatureSample s = sum_curvature_at(field, mask, index, kappa_clamp);
  s.value *= 0.5;
  return s;
}

namespace {

struct CellLocation {
  Vec3i base;   // lower corner voxel of the cell
  Vec3 frac;    // in [0,1]^3
};

constexpr double kBoxEps = 1e-9;

CellLocation locate(const GridLayout& grid, const Vec3& point) {
  CellLocation loc;
  for (int a = 0; a < 3; ++a) {
    const double t = (point[a] - grid.origin[a]) / grid.spacing[a];
    const double top = double(grid.dims[a] - 1);
    if (t < -kBoxEps || t > top + kBoxEps) {
      throw std::out_of_range("sample point outside grid bounding box");
    }
    double c = std::floor(t);
    if (c > top - 1.0) c = top - 1.0;  // dims>=2 assumed for interpolation
    if (c < 0.0) c = 0.0;
    loc.base[a] = int(c);
    loc.frac[a] = std::clamp(t - c, 0.0, 1.0);
  }
  return loc;
}

double corner_weight(const Vec3& f, int cx, int cy, int cz) {
  return (cx ? f.x() : 1.0 - f.x()) * (cy ? f.y() : 1.0 - f.y()) *
         (cz ? f.z() : 1.0 - f.z());
}

}  // namespace

double trilinear_sample(const ScalarField3& field, const Vec3& point) {
  const CellLocation loc = locate(field.grid, point);
  double v = 0.0;
  for (int cz = 0; cz < 2; ++cz)
    for (int cy = 0; cy < 2; ++cy)
      for (int cx = 0; cx < 2; ++cx)
        v += corner_weight(loc.frac, cx, cy, cz) *
             field.at(loc.base + Vec3i(cx, cy, cz));
  return v;
}

Vec3 trilinear_gradient(const ScalarField3& field, const Vec3& point) {
  const CellLocation loc = locate(field.grid, point);
  Vec3 g = Vec3::Zero();
  for (int cz = 0; cz < 2; ++cz)
    for (int cy = 0; cy < 2; ++cy)
      for (int cx = 0; cx < 2; ++cx)
        g += corner_weight(loc.frac, cx, cy, cz) *
             gradient_at(field, loc.base + Vec3i(cx, cy, cz));
  return g;
}

std::optional<double> masked_trilinear_sample(const ScalarField3& field,
                                              const VoxelMask& mask, const Vec3& point) {
  CellLocation loc;
  try {
    loc = locate(field.grid, point);
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
  double v = 0.0;
  double wsum = 0.0;
  for (int cz = 0; cz < 2; ++cz)
    for (int cy = 0; cy < 2; ++cy)
      for (int cx = 0; cx < 2; ++cx) {
        const Vec3i c = loc.base + Vec3i(cx, cy, cz);
        if (!mask.test(c)) continue;
        const double w = corner_weight(loc.frac, cx, cy, cz);
        v += w * field.at(c);
        wsum += w;
      }
  if (wsum < kNormalEps) return std::nullopt;
  return v / wsum;
}

std::optional<Vec3> masked_trilinear_gradient(const ScalarField3& field,
                                              const VoxelMask& mask, const Vec3& point) {
  CellLocation loc;
  try {
    loc = locate(field.grid, point);
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
  Vec3 g = Vec3::Zero();
  double wsum = 0.0;
  for (int cz = 0; cz < 2; ++cz)
    for (int cy = 0; cy < 2; ++cy)
      for (int cx = 0; cx < 2; ++cx) {
        const Vec3i c = loc.base + Vec3i(cx, cy, cz);
        if (!mask.test(c)) continue;
        const double w = corner_weight(loc.frac, cx, cy, cz);
        g += w * gradient_at(field, c, &mask);
        wsum += w;
      }
  if (wsum < kNormalEps) return std::nullopt;
  return Vec3(g / wsum);
}

ScalarField3 gaussian_smooth3(const ScalarField3& field, double sigma_voxels,
                              const VoxelMask* mask) {
  if (!(sigma_voxels > 0.0)) throw std::invalid_argument("sigma must be positive");
  ScalarField3 out = field;
  const Vec3i d = field.grid.dims;
  const double inv2s2 = 1.0 / (2.0 * sigma_voxels * sigma_voxels);
  for (int z = 0; z < d.z(); ++z) {
    for (int y = 0; y < d.y(); ++y) {
      for (int x = 0; x < d.x(); ++x) {
        const Vec3i i(x, y, z);
        if (mask && !mask->test(i)) continue;
        double acc = 0.0;
        double wsum = 0.0;
        for (int dz = -1; dz <= 1; ++dz)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const Vec3i j = i + Vec3i(dx, dy, dz);
              if (!field.grid.contains(j)) continue;
              if (mask && !mask->test(j)) continue;
              const double w = std::exp(-double(dx * dx + dy * dy + dz * dz) * inv2s2);
              acc += w * field.at(j);
              wsum += w;
            }
        out.at(i) = acc / wsum;  // wsum >= center weight 1
      }
    }
  }
  return out;
}

}  // namespace voxpath
