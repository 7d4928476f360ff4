#include "voxpath/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace voxpath {

namespace {

// Box-Muller on top of mt19937_64 keeps phantom generation bit-reproducible
// for a given seed; std::normal_distribution is implementation-defined.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 1e-300);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double uniform01() {
    return double(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

ScalarField3 make_phantom(const std::vector<EllipsoidSpec>& specs, const Vec3i& dims,
                          const Vec3& spacing, double noise_sigma, std::uint64_t seed,
                          const Vec3& origin) {
  if (specs.empty()) throw std::invalid_argument("phantom needs at least one ellipsoid");
  if (dims.minCoeff() < 16) throw std::invalid_argument("phantom dims must be >= 16 per axis");
  if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
  for (const EllipsoidSpec& e : specs) {
    if (!(e.semi_axes.minCoeff() > 0.0)) {
      throw std::invalid_argument("ellipsoid semi-axes must be positive");
    }
  }

  ScalarField3 out(GridLayout{dims, spacing, origin});
  const Vec3i d = dims;
  std::int64_t n = 0;
  for (int z = 0; z < d.z(); ++z) {
    for (int y = 0; y < d.y(); ++y) {
      for (int x = 0; x < d.x(); ++x, ++n) {
        const Vec3 p = out.grid.position(Vec3i(x, y, z));
        double v = 0.0;
        for (const EllipsoidSpec& e : specs) {
          if (!e.contains(p)) continue;
          const double shade =
              clip01(e.intensity_base + e.intensity_gradient.dot(p - e.center));
          v = std::max(v, shade);
        }
        out.values[std::size_t(n)] = v;
      }
    }
  }

  if (noise_sigma > 0.0) {
    GaussianStream noise(seed);
    for (double& v : out.values) v = clip01(v + noise_sigma * noise.next());
  }
  return out;
}

ScalarField3 gradient_magnitude(const ScalarField3& intensity) {
  ScalarField3 out(intensity.grid);
  const Vec3i d = intensity.grid.dims;
  for (int z = 0; z < d.z(); ++z)
    for (int y = 0; y < d.y(); ++y)
      for (int x = 0; x < d.x(); ++x) {
        const Vec3i i(x, y, z);
        out.at(i) = gradient_at(intensity, i).norm();
      }
  return out;
}

ScalarField3 build_metric(const ScalarField3& intensity, const MetricParams& params) {
  if (!(params.alpha > 0.0) || !(params.alpha < 1.0)) {
    throw std::invalid_argument("metric alpha must be in (0,1)");
  }
  if (!(params.beta > 0.0)) throw std::invalid_argument("metric beta must be > 0");
  if (!(params.epsilon_floor > 0.0)) {
    throw std::invalid_argument("metric epsilon_floor must be > 0");
  }

  const ScalarField3 gm = gradient_magnitude(intensity);
  ScalarField3 phi(intensity.grid);
  const double a = params.alpha;
  const double b = params.beta;
  for (std::size_t i = 0; i < gm.values.size(); ++i) {
    const double e = std::exp(-b * gm.values[i]);
    const double v = params.variant == MetricVariant::ConvexCombination
                         ? a + (1.0 - a) * e
                         : a + (1.0 - a * e);
    phi.values[i] = std::max(v, params.epsilon_floor);
  }
  return phi;
}

}  // namespace voxpath
