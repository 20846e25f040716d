#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "pq/monotonize.hpp"

using namespace pq;

namespace {

QuantileCurve make_curve(std::vector<double> taus, Eigen::MatrixXd points) {
  QuantileCurve c;
  c.tau_grid = std::move(taus);
  c.points = std::move(points);
  c.p_values.assign(c.tau_grid.size(), 1.0);
  return c;
}

std::vector<double> uniform_grid(int t) {
  std::vector<double> g;
  for (int k = 1; k <= t; ++k) g.push_back(static_cast<double>(k) / (t + 1));
  return g;
}

std::vector<double> random_grid(int t, Rng& rng) {
  std::vector<double> g;
  while (static_cast<int>(g.size()) < t) {
    double u = 0.01 + 0.98 * uniform01(rng);
    if (std::find(g.begin(), g.end(), u) == g.end()) g.push_back(u);
  }
  std::sort(g.begin(), g.end());
  return g;
}

QuantileCurve random_monotone(const std::vector<double>& grid, Index d, Rng& rng) {
  Eigen::MatrixXd p(static_cast<Index>(grid.size()), d);
  for (Index j = 0; j < d; ++j) {
    double level = uniform01(rng);
    for (Index k = 0; k < p.rows(); ++k) {
      level += uniform01(rng) * uniform01(rng);
      p(k, j) = level;
    }
  }
  return make_curve(grid, p);
}

QuantileCurve perturb(const QuantileCurve& c, double scale, Rng& rng) {
  QuantileCurve out = c;
  std::normal_distribution<double> noise(0.0, scale);
  for (Index k = 0; k < out.points.rows(); ++k)
    for (Index j = 0; j < out.points.cols(); ++j) out.points(k, j) += noise(rng);
  return out;
}

// Independent L_κ on a common grid with equal weights: both curves are
// step functions on the same cells.
double equal_weight_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double kappa) {
  double sum = 0.0;
  for (Index k = 0; k < a.rows(); ++k)
    for (Index j = 0; j < a.cols(); ++j) sum += std::pow(std::abs(a(k, j) - b(k, j)), kappa);
  return std::pow(sum / a.rows(), 1.0 / kappa);
}

bool coordinatewise_nondecreasing(const Eigen::MatrixXd& p) {
  for (Index k = 1; k < p.rows(); ++k)
    if (((p.row(k) - p.row(k - 1)).array() < 0).any()) return false;
  return true;
}

}  // namespace

TEST_SUITE("monotonize") {

TEST_CASE("cell weights") {
  auto w = cell_weights(uniform_grid(9));
  for (double x : w) CHECK(x == doctest::Approx(1.0 / 9));
  auto v = cell_weights({0.1, 0.2, 0.6});
  CHECK(std::accumulate(v.begin(), v.end(), 0.0) == doctest::Approx(1.0));
  CHECK(v[2] > v[0]);
  CHECK(cell_weights({0.4}).at(0) == doctest::Approx(1.0));
}

TEST_CASE("monotone input is left alone") {
  auto rng = make_rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = random_monotone(random_grid(7, rng), 3, rng);
    auto env = majorant_minorant(c);
    CHECK(env.meet.points == c.points);
    CHECK(env.join.points == c.points);
    CHECK(rearrange(c).points == c.points);
    auto imp = rearrangement_improvement(c, c, 2.0);
    CHECK(imp.rearranged == doctest::Approx(imp.original));
  }
  auto single = make_curve({0.5}, (Eigen::MatrixXd(1, 2) << 3, 1).finished());
  CHECK(majorant_minorant(single).meet.points == single.points);
  CHECK(rearrange(single).points == single.points);
}

TEST_CASE("envelopes of a two-level violation") {
  auto c = make_curve({0.35, 0.40}, (Eigen::MatrixXd(2, 2) << 0.39, 0.44, 0.47, 0.42).finished());
  auto env = majorant_minorant(c, PartialOrder::orthant(2));
  CHECK(env.join.points(1, 0) == doctest::Approx(0.47));
  CHECK(env.join.points(1, 1) == doctest::Approx(0.44));
  CHECK(env.meet.points(0, 0) == doctest::Approx(0.39));
  CHECK(env.meet.points(0, 1) == doctest::Approx(0.42));
}

TEST_CASE("sorting a scalar curve") {
  auto c = make_curve({0.25, 0.5, 0.75}, (Eigen::MatrixXd(3, 1) << 3, 1, 2).finished());
  auto r = rearrange(c);
  CHECK(r.points(0, 0) == 1);
  CHECK(r.points(1, 0) == 2);
  CHECK(r.points(2, 0) == 3);
}

TEST_CASE("only the violating stretch moves") {
  Eigen::MatrixXd p(6, 2);
  p << 0.1, 0.1, 0.2, 0.2, 0.39, 0.44, 0.47, 0.42, 0.6, 0.6, 0.8, 0.8;
  auto c = make_curve(uniform_grid(6), p);
  auto r = rearrange(c);
  for (Index k : {0, 1, 4, 5}) CHECK(r.points.row(k) == p.row(k));
  CHECK(r.points(2, 1) == doctest::Approx(0.42));
  CHECK(r.points(3, 1) == doctest::Approx(0.44));
  CHECK(r.points.col(0) == p.col(0));
}

TEST_CASE("properties over random curves") {
  auto rng = make_rng(52);
  for (int trial = 0; trial < 1000; ++trial) {
    const int t = 2 + static_cast<int>(uniform01(rng) * 15);
    const Index d = 1 + static_cast<Index>(uniform01(rng) * 3);
    const auto grid = trial % 2 ? uniform_grid(t) : random_grid(t, rng);
    const auto truth = random_monotone(grid, d, rng);
    const auto est = perturb(truth, 0.05 + uniform01(rng), rng);

    auto env = majorant_minorant(est);
    auto r = rearrange(est);
    REQUIRE(coordinatewise_nondecreasing(env.meet.points));
    REQUIRE(coordinatewise_nondecreasing(env.join.points));
    REQUIRE(coordinatewise_nondecreasing(r.points));
    REQUIRE(is_partial_monotone(r, PartialOrder::orthant(d)));
    REQUIRE((env.meet.points.array() <= est.points.array()).all());
    REQUIRE((est.points.array() <= env.join.points.array()).all());
    REQUIRE((env.meet.points.array() <= r.points.array()).all());
    REQUIRE((r.points.array() <= env.join.points.array()).all());
    REQUIRE(rearrange(r).points == r.points);

    for (double kappa : {1.0, 2.0, 4.0}) {
      auto imp = rearrangement_improvement(est, truth, kappa);
      REQUIRE(imp.rearranged <= imp.original * (1 + 1e-12) + 1e-15);
      if (trial % 2) {
        CHECK(imp.original == doctest::Approx(equal_weight_distance(est.points, truth.points, kappa)));
        CHECK(imp.rearranged == doctest::Approx(equal_weight_distance(r.points, truth.points, kappa)));
      }
    }
  }
}

TEST_CASE("rearrangement keeps each coordinate's values") {
  auto rng = make_rng(53);
  const auto grid = uniform_grid(11);
  auto est = perturb(random_monotone(grid, 2, rng), 0.5, rng);
  auto r = rearrange(est);
  for (Index j = 0; j < 2; ++j) {
    std::vector<double> a(est.points.col(j).data(), est.points.col(j).data() + 11);
    std::sort(a.begin(), a.end());
    for (Index k = 0; k < 11; ++k) CHECK(r.points(k, j) == a[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("diagnostic") {
  auto rng = make_rng(54);
  auto c = random_monotone(uniform_grid(9), 2, rng);
  auto same = monotonicity_diagnostic(c, 2.0, 0.01);
  CHECK(same.distance == 0.0);
  CHECK(same.verdict == MonotonicityVerdict::Inconclusive);

  // One coordinate carries a large reversal, the other is fine.
  Eigen::MatrixXd p(4, 2);
  p << 0, 8, 1, 1, 2, 10, 3, 2;
  auto bad = make_curve({0.2, 0.4, 0.6, 0.8}, p);
  auto d = monotonicity_diagnostic(bad, 1.0, 0.1);
  CHECK(d.distance > 2 * 0.1);
  CHECK(d.verdict == MonotonicityVerdict::EvidenceNotMonotone);
  CHECK(monotonicity_diagnostic(bad, 1.0, 100.0).verdict == MonotonicityVerdict::Inconclusive);
  CHECK(std::string(MonotonicityDiagnostic::kCaveat).find("heuristic") != std::string::npos);
}

TEST_CASE("errors") {
  auto a = make_curve({0.2, 0.4}, Eigen::MatrixXd::Zero(2, 1));
  auto b = make_curve({0.2, 0.5}, Eigen::MatrixXd::Zero(2, 1));
  try {
    rearrangement_improvement(a, b, 2.0);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
  CHECK_THROWS_AS(lkappa_distance(a, a, 0.5), Error);
  Eigen::MatrixXd gens(2, 2);
  gens << 1, 0, 1, 1;
  auto c2 = make_curve({0.2, 0.4}, Eigen::MatrixXd::Zero(2, 2));
  try {
    majorant_minorant(c2, PartialOrder::cone(gens));
    FAIL("expected NotALattice");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotALattice);
  }
  auto cyc = PartialOrder::dag({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}}, false);
  auto c1 = make_curve({0.2, 0.4}, Eigen::MatrixXd::Zero(2, 1));
  try {
    rearrange(c1, cyc);
    FAIL("expected NotAPartialOrder");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAPartialOrder);
  }
  auto unsorted = make_curve({0.4, 0.2}, Eigen::MatrixXd::Zero(2, 1));
  CHECK_THROWS_AS(unsorted.validate(), Error);
}

}  // TEST_SUITE
