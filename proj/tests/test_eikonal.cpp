#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "voxpath/eikonal.hpp"
#include "voxpath/errors.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace voxpath;

namespace {

GridLayout cube(int n, double h = 1.0) {
  return GridLayout{Vec3i(n, n, n), Vec3(h, h, h), Vec3::Zero()};
}

// Independent O(V^2) Dijkstra used as the baseline-solver oracle. Shares no
// code with the solver; the cost formula is written out plainly.
std::vector<double> brute_force_dijkstra(const ScalarField3& metric,
                                         const std::vector<std::int64_t>& seeds,
                                         int neighborhood) {
  const GridLayout& g = metric.grid;
  const std::int64_t count = g.voxel_count();
  std::vector<double> dist(std::size_t(count), kInfinity);
  std::vector<int> state(std::size_t(count), 0);  // 0 far, 1 trial, 2 done

  std::vector<Vec3i> offsets;
  std::vector<double> lengths;
  const int max_l1 = neighborhood == 6 ? 1 : neighborhood == 18 ? 2 : 3;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int l1 = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (l1 == 0 || l1 > max_l1) continue;
        offsets.emplace_back(dx, dy, dz);
        const double sx = dx * g.spacing.x();
        const double sy = dy * g.spacing.y();
        const double sz = dz * g.spacing.z();
        lengths.push_back(std::sqrt(sx * sx + sy * sy + sz * sz));
      }

  for (std::int64_t s : seeds) {
    dist[std::size_t(s)] = 0.0;
    state[std::size_t(s)] = 1;
  }
  while (true) {
    std::int64_t best = -1;
    for (std::int64_t n = 0; n < count; ++n) {
      if (state[std::size_t(n)] != 1) continue;
      if (best < 0 || dist[std::size_t(n)] < dist[std::size_t(best)]) best = n;
    }
    if (best < 0) break;
    state[std::size_t(best)] = 2;
    const Vec3i i = g.unflatten(best);
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const Vec3i j = i + offsets[k];
      if (!g.contains(j)) continue;
      const std::int64_t m = g.linear_index(j);
      if (state[std::size_t(m)] == 2) continue;
      const double cost =
          0.5 * (metric.values[std::size_t(best)] + metric.values[std::size_t(m)]) *
          lengths[k] * 1.0;
      const double tentative = dist[std::size_t(best)] + cost;
      if (tentative < dist[std::size_t(m)]) {
        dist[std::size_t(m)] = tentative;
        state[std::size_t(m)] = 1;
      }
    }
  }
  return dist;
}

// The closed-form dilation written independently for the spherical oracle
// (K < 0 there, so the textbook root is stable).
double dilation_closed_form(double phi, double dS, double k) {
  if (k == 0.0) return dS / phi;
  return (1.0 - std::sqrt(1.0 - 4.0 * k * dS / phi)) / (2.0 * k);
}

}  // namespace

TEST_CASE("baseline increment and dilation") {
  CHECK(baseline_increment(1.0, 0.5) == 0.5);
  CHECK(baseline_increment(2.0, 0.1) == doctest::Approx(0.2));
  CHECK(baseline_dilation(2.0, baseline_increment(2.0, 0.37)) ==
        doctest::Approx(0.37).epsilon(1e-15));
  CHECK_THROWS_AS(baseline_increment(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(baseline_increment(-1.0, 0.5), std::invalid_argument);
}

TEST_CASE("corrected dilation closed-form values") {
  CHECK(corrected_dilation(1.0, 0.1, 0.0) == doctest::Approx(0.1).epsilon(1e-15));
  // discriminant exactly zero: the dilation cap 2 dS/phi = 1/(2K)
  CHECK(corrected_dilation(1.0, 0.1, 2.5) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(corrected_dilation(2.0, 0.2, -1.0) ==
        doctest::Approx((std::sqrt(1.4) - 1.0) / 2.0).epsilon(1e-6));
  CHECK(corrected_dilation(1.0, 0.1, 1.0) ==
        doctest::Approx((1.0 - std::sqrt(0.6)) / 2.0).epsilon(1e-6));
  CHECK(corrected_dilation(1.0, 0.1, 1.0) == doctest::Approx(0.112702).epsilon(1e-5));
  CHECK_THROWS_AS(corrected_dilation(0.0, 0.1, 1.0), std::invalid_argument);
}

TEST_CASE("corrected increment matches the spec'd hand evaluations") {
  CHECK(corrected_increment(1.0, 0.112702, 1.0, 1.0) == doctest::Approx(0.1).epsilon(1e-5));
  CHECK(corrected_increment(2.0, 0.0916080, -1.0, 1.0) == doctest::Approx(0.2).epsilon(1e-5));
  // lambda = 0 switches the correction off exactly
  for (double ds : {0.0, 0.05, 0.3, 1.5}) {
    CHECK(corrected_increment(1.7, ds, 3.0, 0.0) == baseline_increment(1.7, ds));
  }
  CHECK_THROWS_AS(corrected_increment(1.0, 0.1, 0.0, 1.5), std::invalid_argument);
}

TEST_CASE("action cap") {
  CHECK(action_cap(1.0, 2.5) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(action_cap(2.0, 4.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(action_cap(1.0, 0.0) == kInfinity);
  CHECK(action_cap(1.0, -3.0) == kInfinity);
  CHECK_THROWS_AS(action_cap(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("forward/inverse roundtrip within 1e-12") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> uphi(0.01, 10.0);
  std::uniform_real_distribution<double> uk(-5.0, 5.0);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  for (int rep = 0; rep < 20000; ++rep) {
    const double phi = uphi(rng);
    const double k = uk(rng);
    const double cap = k > 0.0 ? phi / (4.0 * k) : 10.0 * phi;
    const double dS = ut(rng) * cap;
    const double ds = corrected_dilation(phi, dS, k);
    const double back = corrected_increment(phi, ds, k, 1.0);
    CHECK(std::abs(back - dS) <= 1e-12 * std::max(1.0, std::abs(dS)));
  }
}

TEST_CASE("limit continuity near K = 0") {
  // |ds - x| <= 2|K| x^2 whenever |K| x <= 0.1, x = dS/phi
  for (double phi : {0.01, 0.5, 1.0, 4.0}) {
    for (double k : {-4.0, -0.3, -1e-6, 1e-6, 0.3, 4.0}) {
      for (double t = 0.05; t <= 1.0; t += 0.05) {
        const double x = 0.1 * t / std::abs(k);
        const double ds = corrected_dilation(phi, x * phi, k);
        CHECK(std::abs(ds - x) <= 2.0 * std::abs(k) * x * x + 1e-15);
      }
    }
  }
}

TEST_CASE("ordering of the corrected dilation (cases a and b)") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uphi(0.05, 5.0);
  std::uniform_real_distribution<double> ux(0.001, 0.5);
  std::uniform_real_distribution<double> uk(0.01, 4.0);
  for (int rep = 0; rep < 2000; ++rep) {
    const double phi = uphi(rng);
    const double x = ux(rng);
    const double k = uk(rng);
    // stretching forward (K < 0): corrected advance is smaller
    CHECK(corrected_dilation(phi, x * phi, -k) < x);
    // lagging behind (K > 0): corrected advance is larger
    if (4.0 * k * x <= 1.0) CHECK(corrected_dilation(phi, x * phi, k) > x);
    CHECK(corrected_dilation(phi, x * phi, 0.0) == doctest::Approx(x).epsilon(1e-15));
  }
}

TEST_CASE("zero-set ball voxel counts") {
  const GridLayout g = cube(32);
  const ScalarField3 metric(g, 1.0);

  const ArrivalMap m3 = init_zero_set(metric, ZeroSet::ball(Vec3i(16, 16, 16), 3.0));
  // brute-force lattice count of x^2+y^2+z^2 <= 9
  std::int64_t expected = 0;
  for (int dz = -3; dz <= 3; ++dz)
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx) expected += dx * dx + dy * dy + dz * dz <= 9;
  CHECK(expected == 123);
  CHECK(m3.accepted_count() == expected);

  const ArrivalMap m0 = init_zero_set(metric, ZeroSet::ball(Vec3i(16, 16, 16), 0.0));
  CHECK(m0.accepted_count() == 1);

  CHECK_THROWS_AS(init_zero_set(metric, ZeroSet::ball(Vec3i(40, 16, 16), 3.0)),
                  std::invalid_argument);
}

TEST_CASE("zero-set invariants: action zero, first ranks, trial ring") {
  const GridLayout g = cube(16);
  const ScalarField3 metric(g, 1.0);
  const ArrivalMap m = init_zero_set(metric, ZeroSet::ball(Vec3i(8, 8, 8), 2.0));

  std::int64_t max_rank = -1;
  for (std::int64_t n = 0; n < g.voxel_count(); ++n) {
    if (m.status[std::size_t(n)] == VoxelStatus::Accepted) {
      CHECK(m.action.values[std::size_t(n)] == 0.0);
      max_rank = std::max(max_rank, m.accept_order[std::size_t(n)]);
    }
  }
  CHECK(max_rank == m.accepted_count() - 1);
  CHECK(m.status[std::size_t(g.linear_index(Vec3i(8, 8, 11)))] == VoxelStatus::Trial);
  CHECK(m.status[std::size_t(g.linear_index(Vec3i(0, 0, 0)))] == VoxelStatus::Far);
}

TEST_CASE("baseline solve: exact along axes, chamfer diagonal value") {
  const GridLayout g = cube(13);
  const ScalarField3 metric(g, 1.0);
  SolverConfig cfg;
  cfg.stop = StopRule::full_grid();
  const ArrivalMap m = solve(metric, ZeroSet::ball(Vec3i(6, 6, 6), 0.0), cfg);

  CHECK(m.action.at(Vec3i(11, 6, 6)) == 5.0);  // exact along the axis
  CHECK(m.action.at(Vec3i(6, 1, 6)) == 5.0);
  CHECK(m.action.at(Vec3i(9, 10, 6)) ==
        doctest::Approx(3.0 * std::sqrt(2.0) + 1.0).epsilon(1e-12));
}

TEST_CASE("baseline solve equals the brute-force oracle bit for bit") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int rep = 0; rep < 3; ++rep) {
    const int neighborhood = rep == 0 ? 6 : rep == 1 ? 18 : 26;
    const GridLayout g = cube(9);
    ScalarField3 metric(g);
    for (double& v : metric.values) v = u(rng);

    const Vec3i center(4, 4, 4);
    SolverConfig cfg;
    cfg.neighborhood = neighborhood;
    const ArrivalMap m = solve(metric, ZeroSet::ball(center, 0.0), cfg);

    const std::vector<double> oracle =
        brute_force_dijkstra(metric, {g.linear_index(center)}, neighborhood);
    for (std::int64_t n = 0; n < g.voxel_count(); ++n) {
      CHECK(m.action.values[std::size_t(n)] == oracle[std::size_t(n)]);
    }
  }
}

TEST_CASE("causality: accepted actions never decrease with rank") {
  const GridLayout g = cube(24);
  ScalarField3 metric(g);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (double& v : metric.values) v = u(rng);

  for (const Scheme scheme : {Scheme::Baseline, Scheme::Corrected}) {
    SolverConfig cfg;
    cfg.scheme = scheme;
    const ArrivalMap m = solve(metric, ZeroSet::ball(Vec3i(12, 12, 12), 2.0), cfg);

    std::vector<double> by_rank(std::size_t(m.accepted_count()), 0.0);
    for (std::int64_t n = 0; n < g.voxel_count(); ++n) {
      if (m.accept_order[std::size_t(n)] >= 0) {
        by_rank[std::size_t(m.accept_order[std::size_t(n)])] = m.action.values[std::size_t(n)];
      }
    }
    for (std::size_t i = 1; i < by_rank.size(); ++i) CHECK(by_rank[i] >= by_rank[i - 1]);
  }
}

TEST_CASE("convex front: corrected arrivals dominate baseline arrivals") {
  const GridLayout g = cube(40);
  const ScalarField3 metric(g, 1.0);
  const ZeroSet zs = ZeroSet::ball(Vec3i(20, 20, 20), 3.0);

  SolverConfig cfg;
  const ArrivalMap base = solve(metric, zs, cfg);
  cfg.scheme = Scheme::Corrected;
  const ArrivalMap corr = solve(metric, zs, cfg);

  double worst = 0.0;
  for (std::int64_t n = 0; n < g.voxel_count(); ++n) {
    worst = std::max(worst,
                     base.action.values[std::size_t(n)] - corr.action.values[std::size_t(n)]);
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("corrected solve matches the 1D spherical recurrence within 10%") {
  const GridLayout g = cube(48);
  const ScalarField3 metric(g, 1.0);
  const Vec3 center(24, 24, 24);

  SolverConfig cfg;
  cfg.scheme = Scheme::Corrected;
  cfg.stop = StopRule::action_limit(10.8);
  const ArrivalMap m = solve(metric, ZeroSet::ball(Vec3i(24, 24, 24), 3.0), cfg);

  // oracle: r_{k+1} = r_k + dilation(1, dS, -2/r_k), dS = sqrt(3) (the
  // largest per-step increment of the 26-neighborhood at phi = 1)
  const double dS = std::sqrt(3.0);
  std::vector<double> r_at{3.0};
  std::vector<double> s_at{0.0};
  while (s_at.back() < 11.0) {
    r_at.push_back(r_at.back() + dilation_closed_form(1.0, dS, -2.0 / r_at.back()));
    s_at.push_back(s_at.back() + dS);
  }
  const auto oracle_radius = [&](double s) {
    std::size_t i = 1;
    while (i + 1 < s_at.size() && s_at[i] < s) ++i;
    const double t = (s - s_at[i - 1]) / (s_at[i] - s_at[i - 1]);
    return r_at[i - 1] + t * (r_at[i] - r_at[i - 1]);
  };

  static const Vec3i face[6] = {Vec3i(1, 0, 0),  Vec3i(-1, 0, 0), Vec3i(0, 1, 0),
                                Vec3i(0, -1, 0), Vec3i(0, 0, 1),  Vec3i(0, 0, -1)};
  for (double s : {5.0, 7.5, 10.0}) {
    double sum = 0.0;
    std::int64_t cnt = 0;
    for (std::int64_t n = 0; n < g.voxel_count(); ++n) {
      if (!(m.action.values[std::size_t(n)] <= s)) continue;
      const Vec3i i = g.unflatten(n);
      bool on_front = false;
      for (const Vec3i& d : face) {
        const Vec3i j = i + d;
        if (!g.contains(j) || m.action.at(j) > s) {
          on_front = true;
          break;
        }
      }
      if (!on_front) continue;
      sum += (g.position(i) - center).norm();
      ++cnt;
    }
    REQUIRE(cnt > 0);
    const double mean_r = sum / double(cnt);
    const double expect = oracle_radius(s);
    CHECK(std::abs(mean_r - expect) <= 0.10 * expect);
  }
}

TEST_CASE("lambda = 0 makes the corrected solver identical to baseline") {
  const GridLayout g = cube(20);
  ScalarField3 metric(g);
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  for (double& v : metric.values) v = u(rng);
  const ZeroSet zs = ZeroSet::ball(Vec3i(10, 10, 10), 1.0);

  SolverConfig cfg;
  const ArrivalMap base = solve(metric, zs, cfg);
  cfg.scheme = Scheme::Corrected;
  cfg.lambda = 0.0;
  const ArrivalMap corr = solve(metric, zs, cfg);
  CHECK(base.action.values == corr.action.values);
  CHECK(base.accept_order == corr.accept_order);
}

TEST_CASE("identical inputs give bit-identical maps") {
  const GridLayout g = cube(18);
  ScalarField3 metric(g);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  for (double& v : metric.values) v = u(rng);
  const ZeroSet zs = ZeroSet::ball(Vec3i(9, 9, 9), 2.0);

  SolverConfig cfg;
  cfg.scheme = Scheme::Corrected;
  const ArrivalMap a = solve(metric, zs, cfg);
  const ArrivalMap b = solve(metric, zs, cfg);
  CHECK(a.action.values == b.action.values);
  CHECK(a.accept_order == b.accept_order);
}

TEST_CASE("stop rules: action limit and plane reached") {
  const GridLayout g = cube(24);
  const ScalarField3 metric(g, 1.0);
  const ZeroSet zs = ZeroSet::ball(Vec3i(12, 12, 12), 1.0);

  SolverConfig cfg;
  cfg.stop = StopRule::action_limit(4.0);
  const ArrivalMap limited = solve(metric, zs, cfg);
  for (std::int64_t n = 0; n < g.voxel_count(); ++n) {
    if (limited.status[std::size_t(n)] == VoxelStatus::Accepted) {
      CHECK(limited.action.values[std::size_t(n)] <= 4.0);
    }
  }
  CHECK(limited.accepted_count() < g.voxel_count());

  cfg.stop = StopRule::plane_reached(PlaneSpec::make(Vec3(12, 12, 18), Vec3(0, 0, 1)));
  const ArrivalMap planar = solve(metric, zs, cfg);
  for (std::int64_t n : rasterize_plane(g, cfg.stop.plane)) {
    CHECK(planar.status[std::size_t(n)] == VoxelStatus::Accepted);
  }
  CHECK(planar.accepted_count() < g.voxel_count());

  cfg.stop = StopRule::plane_reached(PlaneSpec::make(Vec3(12, 12, 200), Vec3(0, 0, 1)));
  CHECK_THROWS_AS(solve(metric, zs, cfg), solver_error);
}

TEST_CASE("solver argument validation") {
  const GridLayout g = cube(16);
  ScalarField3 metric(g, 1.0);
  metric.at(Vec3i(3, 3, 3)) = 0.0;
  SolverConfig cfg;
  CHECK_THROWS_AS(solve(metric, ZeroSet::ball(Vec3i(8, 8, 8), 1.0), cfg),
                  std::invalid_argument);

  const ScalarField3 good(g, 1.0);
  cfg.lambda = 2.0;
  CHECK_THROWS_AS(solve(good, ZeroSet::ball(Vec3i(8, 8, 8), 1.0), cfg),
                  std::invalid_argument);
  cfg = SolverConfig{};
  cfg.neighborhood = 14;
  CHECK_THROWS_AS(solve(good, ZeroSet::ball(Vec3i(8, 8, 8), 1.0), cfg),
                  std::invalid_argument);
}

TEST_CASE("arrival-map wrappers expose normals and curvature") {
  const GridLayout g = cube(24);
  const ScalarField3 metric(g, 1.0);
  SolverConfig cfg;
  const ArrivalMap m = solve(metric, ZeroSet::ball(Vec3i(12, 12, 12), 3.0), cfg);

  const Vec3Field normals = unit_normal_field(m);
  const Vec3 n = normals.at(Vec3i(19, 12, 12));
  CHECK((n - Vec3(1, 0, 0)).norm() < 0.2);

  const CurvatureSample k = sum_curvature_at(m, Vec3i(19, 12, 12));
  CHECK_FALSE(k.fallback);
  CHECK(k.value < 0.0);
}
