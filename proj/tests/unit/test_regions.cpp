#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pq/regions.hpp"

using namespace pq;
using pq::testing::vec;

namespace {

EvaluationGrid square_grid(Index m) { return tensor_grid(vec({0, 0}), vec({1, 1}), {m, m}); }

bool subset(const Region& a, const Region& b) {
  for (std::size_t i = 0; i < a.membership.size(); ++i)
    if (a.membership[i] && !b.membership[i]) return false;
  return true;
}

Index find_point(const EvaluationGrid& g, double x, double y) {
  for (Index i = 0; i < g.size(); ++i)
    if (std::abs(g.points(i, 0) - x) < 1e-12 && std::abs(g.points(i, 1) - y) < 1e-12) return i;
  return -1;
}

}  // namespace

TEST_SUITE("regions") {

TEST_CASE("tensor grid layout and volumes") {
  auto g = tensor_grid(vec({0, 0}), vec({1, 2}), {3, 5});
  CHECK(g.size() == 15);
  CHECK(g.points.row(0) == vec({0, 0}).transpose());
  CHECK(g.points.row(1) == vec({0, 0.5}).transpose());
  CHECK(g.points.row(5) == vec({0.5, 0}).transpose());
  double total = 0;
  for (double v : g.volumes) total += v;
  CHECK(total == doctest::Approx(2.0));
  CHECK(g.volumes[0] == doctest::Approx(0.25 * 0.25));
  CHECK_THROWS_AS(tensor_grid(vec({0}), vec({1}), {0}), Error);
}

TEST_CASE("membership rule") {
  CHECK(region_member(0.5, 0.5, 0.5, 0.0, 0.0));
  CHECK_FALSE(region_member(0.6, 0.5, 0.5, 0.1, 0.0));
  CHECK(region_member(0.6, 0.5, 0.5, 0.2, 0.0));
  CHECK_FALSE(region_member(0.5, 0.2, 0.5, 0.0, 0.5));
  CHECK(region_member(0.5, 0.25, 0.5, 0.0, 0.5));
  CHECK_FALSE(region_member(std::nan(""), 0.0, 0.5, 0.9, 0.9));
  CHECK(region_member(std::nan(""), 0.0, 0.5, 1.0, 1.0));
}

TEST_CASE("endpoints on the unit square") {
  auto ev = RegionEvaluator::from_model(UniformUnitSquare{}, square_grid(201));
  auto r0 = ev.region(0.0, 0.0);
  REQUIRE(r0.count() == 1);
  const Index centre = find_point(ev.grid(), 0.5, 0.5);
  REQUIRE(centre >= 0);
  CHECK(r0.membership[static_cast<std::size_t>(centre)]);
  auto r1 = ev.region(1.0, 1.0);
  CHECK(r1.count() == ev.grid().size());
  CHECK(r1.coverage_hat == doctest::Approx(1.0));
}

TEST_CASE("band shape at theta = eta = 0.6") {
  auto g = square_grid(200);
  auto r = region(UniformUnitSquare{}, 0.6, 0.6, g);
  CHECK_FALSE(r.membership[static_cast<std::size_t>(find_point(g, 0, 1))]);
  CHECK_FALSE(r.membership[static_cast<std::size_t>(find_point(g, 1, 0))]);
  // Diagonal grid points with index in [0.2, 0.8] are quantile points.
  int on_band = 0;
  for (Index k = 0; k < 200; ++k) {
    const double x = g.points(find_point(g, k / 199.0, k / 199.0), 0);
    const double tau = testing::square_tau(x, x);
    if (tau < 0.2 || tau > 0.8) continue;
    CHECK(r.membership[static_cast<std::size_t>(find_point(g, x, x))]);
    ++on_band;
  }
  CHECK(on_band > 50);
}

TEST_CASE("nested property, ordering and comparability") {
  auto ev = RegionEvaluator::from_model(UniformUnitSquare{}, square_grid(60));
  const std::vector<double> levels{0.0, 0.25, 0.5, 0.75, 1.0};
  for (double t1 : levels)
    for (double e1 : levels)
      for (double t2 : levels)
        for (double e2 : levels) {
          if (t1 > t2 || e1 > e2) continue;
          REQUIRE(subset(ev.region(t1, e1), ev.region(t2, e2)));
        }

  const auto& tab = ev.grid_table();
  auto r = ev.region(0.4, 0.3);
  for (std::size_t i = 0; i < r.membership.size(); ++i) {
    if (!r.membership[i]) continue;
    CHECK(std::abs(tab.tau[i] - 0.5) <= 0.2 + 1e-12);
    CHECK(tab.p[i] >= 0.7 * tab.p_tau_at[i] - 1e-12);
  }
  double last = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double c = ev.coverage(k / 20.0, k / 20.0);
    CHECK(c >= last - 1e-15);
    last = c;
  }
}

TEST_CASE("calibration") {
  auto ev = RegionEvaluator::from_model(UniformUnitSquare{}, square_grid(201));
  auto zero = calibrate_kappa(ev, 0.0);
  CHECK(zero.theta_star == 0.0);
  CHECK(zero.region.count() == 1);
  auto one = calibrate_kappa(ev, 1.0);
  CHECK(one.theta_star == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(one.region.count() == ev.grid().size());

  auto half = calibrate_kappa(RegionEvaluator::from_model(UniformUnitSquare{}, square_grid(200)), 0.5);
  CHECK(half.region.coverage_hat >= 0.5);
  CHECK(half.region.coverage_hat <= 0.55);

  CHECK_THROWS_AS(calibrate_kappa(ev, 0.5, [](double t) { return 1 - t; }), Error);
  CHECK_THROWS_AS(calibrate_kappa(ev, 0.5, [](double t) { return t < 0.5 ? t : 0.3; }), Error);
  auto sq = calibrate_kappa(ev, 0.5, [](double t) { return t * t; });
  CHECK(sq.region.coverage_hat >= 0.5);
}

TEST_CASE("complete order reduces to the univariate quantile interval") {
  const auto law = Marginal::normal(0, 1);
  PopulationModel m = CompleteOrderScore{vec({1}), law};
  auto g = tensor_grid(vec({-4}), vec({4}), {801});
  const double step = 8.0 / 800;
  for (double theta : {0.2, 0.5, 0.8}) {
    auto r = region(m, theta, 0.0, g);
    double lo = 1e9, hi = -1e9;
    for (Index i = 0; i < g.size(); ++i)
      if (r.membership[static_cast<std::size_t>(i)]) lo = std::min(lo, g.points(i, 0)), hi = std::max(hi, g.points(i, 0));
    CHECK(std::abs(lo - law.quantile(0.5 - theta / 2)) <= step);
    CHECK(std::abs(hi - law.quantile(0.5 + theta / 2)) <= step);
    // Contiguous: every grid point between the ends is inside.
    for (Index i = 0; i < g.size(); ++i)
      if (g.points(i, 0) > lo && g.points(i, 0) < hi) CHECK(r.membership[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("sample regions") {
  auto rng = make_rng(61);
  Sample s(testing::uniform_points(2000, 2, rng), PartialOrder::orthant(2));
  auto ev = RegionEvaluator::from_sample(s, square_grid(40));
  auto r = ev.region(0.6, 0.6);
  // Coverage is the share of observations in the region, by direct check.
  auto at_obs = RegionEvaluator::from_sample(s, point_grid(s.observations()));
  auto ro = at_obs.region(0.6, 0.6);
  CHECK(r.coverage_hat == doctest::Approx(static_cast<double>(ro.count()) / 2000));
  CHECK(std::abs(r.coverage_hat - RegionEvaluator::from_model(UniformUnitSquare{}, square_grid(200)).coverage(0.6, 0.6)) <
        0.1);
  CHECK(ev.region(1.0, 1.0).coverage_hat == doctest::Approx(1.0));
}

}  // TEST_SUITE
