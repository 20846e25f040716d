#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "pq/estimator.hpp"
#include "pq/finite.hpp"
#include "pq/population.hpp"
#include "pq/thks.hpp"

using namespace pq;
using pq::testing::vec;

namespace {

Sample square_sample(Index n, std::uint64_t seed) {
  auto rng = make_rng(seed);
  return Sample(testing::uniform_points(n, 2, rng), PartialOrder::orthant(2));
}

// The whole THKS population, one row per person.
Sample thks_population() {
  const auto order = thks::order();
  const auto& counts = thks::counts();
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  Eigen::MatrixXd obs(total, 1);
  Index row = 0;
  for (std::size_t k = 0; k < counts.size(); ++k)
    for (std::int64_t i = 0; i < counts[k]; ++i) obs(row++, 0) = static_cast<double>(order.dag()->index_of(thks::labels()[k]));
  return Sample(obs, order);
}

// Direct counting with no shared machinery.
std::pair<double, double> naive_index(const Eigen::MatrixXd& obs, const PartialOrder& o, const Eigen::VectorXd& x) {
  double below = 0, comp = 0;
  for (Index i = 0; i < obs.rows(); ++i) {
    const bool le = o.precedes_or_equal(obs.row(i).transpose(), x);
    const bool ge = o.precedes_or_equal(x, obs.row(i).transpose());
    below += le;
    comp += le || ge;
  }
  return {comp > 0 ? below / comp : std::nan(""), comp / obs.rows()};
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("two-point samples") {
  Eigen::MatrixXd a(2, 2);
  a << 0, 0, 1, 1;
  auto e = estimate_index(Sample(a, PartialOrder::orthant(2)), vec({0.5, 0.5}));
  CHECK(e.p_hat == 1.0);
  CHECK(*e.tau_hat == 0.5);

  Eigen::MatrixXd b(2, 2);
  b << 0, 1, 1, 0;
  auto f = estimate_index(Sample(b, PartialOrder::orthant(2)), vec({0.5, 0.5}));
  CHECK(f.p_hat == 0.0);
  CHECK_FALSE(f.tau_hat.has_value());
  CHECK_FALSE(f.se_tau.has_value());
}

TEST_CASE("single observation at itself") {
  Eigen::MatrixXd a(1, 2);
  a << 0.3, 0.6;
  Sample s(a, PartialOrder::orthant(2));
  auto field = estimate_index_field(s, a);
  CHECK(*field[0].tau_hat == 1.0);
  CHECK(field[0].counts.below == 1);
  CHECK(field[0].counts.above == 1);
  CHECK(field[0].counts.comparable == 1);
  CHECK_THROWS_AS(estimate_index_field(s, Eigen::MatrixXd(0, 2)), Error);
}

TEST_CASE("sample median index near one half") {
  auto s = square_sample(5000, 31);
  auto e = estimate_index(s, vec({0.5, 0.5}));
  CHECK(std::abs(*e.tau_hat - 0.5) <= 3 * *e.se_tau);
  CHECK(*e.se_tau == doctest::Approx(std::sqrt(*e.tau_hat * (1 - *e.tau_hat) / (5000 * e.p_hat))));
}

TEST_CASE("field matches naive counting on tied lattice data") {
  auto rng = make_rng(32);
  const Eigen::MatrixXd obs = testing::lattice_points(400, 3, 4, rng);
  Sample s(obs, PartialOrder::orthant(3));
  const Eigen::MatrixXd grid = testing::lattice_points(200, 3, 4, rng);
  auto field = estimate_index_field(s, grid);
  for (Index g = 0; g < grid.rows(); ++g) {
    auto [tau, p] = naive_index(obs, s.order(), grid.row(g).transpose());
    CHECK(field[static_cast<std::size_t>(g)].p_hat == doctest::Approx(p));
    if (p > 0) CHECK(*field[static_cast<std::size_t>(g)].tau_hat == doctest::Approx(tau));
  }
}

TEST_CASE("general cone and score kernels match naive counting") {
  auto rng = make_rng(33);
  const Eigen::MatrixXd obs = testing::uniform_points(300, 2, rng);
  Eigen::MatrixXd gens(2, 2);
  gens << 1, 0, 1, 1;
  for (const auto& o : {PartialOrder::cone(gens), PartialOrder::linear_score(vec({1, 2}))}) {
    Sample s(obs, o);
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd x = testing::uniform_points(1, 2, rng).row(0).transpose();
      auto e = estimate_index(s, x);
      auto [tau, p] = naive_index(obs, o, x);
      CHECK(e.p_hat == doctest::Approx(p));
      if (p > 0) CHECK(*e.tau_hat == doctest::Approx(tau));
    }
  }
}

TEST_CASE("full-population THKS sample reproduces the exact table") {
  auto s = thks_population();
  const auto exact = finite_exact_quantiles(thks::distribution<double>(), thks::order(), std::vector<double>{0.25, 0.5, 0.75});
  const auto order = thks::order();
  const auto* dag = order.dag();
  for (const auto& atom : exact.atoms) {
    auto e = estimate_index(s, vec({static_cast<double>(dag->index_of(atom.label))}));
    CHECK(e.p_hat == doctest::Approx(atom.comparable).epsilon(1e-15));
    CHECK(*e.tau_hat == doctest::Approx(*atom.tau).epsilon(1e-15));
  }
  CHECK(default_slack(s) == 0.0);
  auto curve = estimate_points(s, {0.25, 0.5, 0.75});
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& lvl = exact.levels[k];
    REQUIRE(lvl.points.size() == 1);
    CHECK(dag->label(static_cast<Index>(curve[k].x_hat[0])) == exact.atoms[lvl.points[0]].label);
    CHECK(curve[k].p_hat == doctest::Approx(*lvl.p_tau).epsilon(1e-15));
    CHECK(curve[k].feasible);
  }
}

TEST_CASE("default slack") {
  CHECK(default_slack(square_sample(5000, 34)) == doctest::Approx(0.0008));
  auto rng = make_rng(35);
  Eigen::MatrixXd iv = testing::uniform_points(100, 2, rng);
  for (Index i = 0; i < iv.rows(); ++i)
    if (iv(i, 0) > iv(i, 1)) std::swap(iv(i, 0), iv(i, 1));
  CHECK(default_slack(Sample(iv, PartialOrder::interval_inclusion())) ==
        doctest::Approx(std::sqrt(std::log(100.0) / 100.0)));
  CHECK(std::sqrt(std::log(100.0) / 100.0) == doctest::Approx(0.2146).epsilon(1e-3));
}

TEST_CASE("point estimate on the unit square") {
  auto s = square_sample(5000, 36);
  auto e = estimate_point(s, 0.5);
  CHECK(e.feasible);
  CHECK((e.x_hat - vec({0.5, 0.5})).norm() <= 0.1);
  CHECK(e.bias() == doctest::Approx(e.tau_hat_at_x - 0.5));
  auto lat = estimate_point(s, 0.5, CandidateStrategy::sample_plus_lattice());
  CHECK(lat.p_hat >= e.p_hat);
  CHECK_THROWS_AS(estimate_point(s, 1.2), Error);
}

TEST_CASE("complete-order samples give sample quantiles with p = 1") {
  auto rng = make_rng(37);
  const Eigen::MatrixXd obs = testing::uniform_points(501, 2, rng);
  const Eigen::VectorXd w = vec({1, 1});
  Sample s(obs, PartialOrder::linear_score(w));
  std::vector<double> scores(static_cast<std::size_t>(obs.rows()));
  for (Index i = 0; i < obs.rows(); ++i) scores[static_cast<std::size_t>(i)] = obs.row(i).dot(w);
  std::sort(scores.begin(), scores.end());
  for (double tau : {0.1, 0.5, 0.9}) {
    auto e = estimate_point(s, tau);
    CHECK(e.p_hat == 1.0);
    const double u = e.x_hat.dot(w);
    const auto rank = std::lower_bound(scores.begin(), scores.end(), u) - scores.begin();
    CHECK(std::abs(static_cast<double>(rank) / 501 - tau) <= 2.0 / 501 + e.epsilon_n);
  }
  CHECK(estimate_comparability(s, {0.1, 0.3, 0.5, 0.7, 0.9}).value == 1.0);
}

TEST_CASE("feasible estimates respect the tie-aware slack bound") {
  auto rng = make_rng(38);
  for (int rep = 0; rep < 40; ++rep) {
    const Eigen::MatrixXd obs = testing::lattice_points(150, 2, 5, rng);
    Sample s(obs, PartialOrder::orthant(2));
    for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      auto e = estimate_point(s, tau);
      if (!e.feasible) continue;
      double ties = 0;
      for (Index i = 0; i < obs.rows(); ++i) ties += obs.row(i).transpose() == e.x_hat;
      const double bound = (e.epsilon_n + ties / obs.rows()) / e.p_hat;
      CHECK(std::abs(e.tau_hat_at_x - tau) <= bound + 1e-12);
      CHECK(e.tau_hat_at_x >= tau - e.epsilon_n / e.p_hat - 1e-12);
    }
  }
  auto s = square_sample(800, 39);
  for (double tau : {0.2, 0.5, 0.8}) {
    auto e = estimate_point(s, tau);
    REQUIRE(e.feasible);
    CHECK(std::abs(e.tau_hat_at_x - tau) <= (e.epsilon_n + 1.0 / 800) / e.p_hat + 1e-12);
  }
}

TEST_CASE("estimated indices are monotone along the order") {
  auto rng = make_rng(40);
  int violations = 0, checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd obs = rep % 2 ? testing::lattice_points(300, 2, 6, rng) : testing::uniform_points(300, 2, rng);
    Sample s(obs, PartialOrder::orthant(2));
    for (int k = 0; k < 500; ++k) {
      Eigen::VectorXd y = testing::uniform_points(1, 2, rng).row(0).transpose() * 5;
      Eigen::VectorXd x = y + testing::uniform_points(1, 2, rng).row(0).transpose() * 2;
      if (rep % 2) {
        y = y.array().round();
        x = x.array().round();
      }
      auto ex = estimate_index(s, x), ey = estimate_index(s, y);
      if (!ex.tau_hat || !ey.tau_hat) continue;
      ++checked;
      if (*ex.tau_hat < *ey.tau_hat) ++violations;
    }
  }
  CHECK(checked > 1000);
  CHECK(violations == 0);
}

TEST_CASE("equivariance under increasing coordinate maps") {
  auto s = square_sample(500, 41);
  Eigen::MatrixXd mapped = s.observations();
  mapped.col(0) = mapped.col(0).array().exp();
  mapped.col(1) = mapped.col(1).array().cube();
  Sample t(mapped, PartialOrder::orthant(2));
  auto rng = make_rng(42);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd x = testing::uniform_points(1, 2, rng).row(0).transpose();
    Eigen::VectorXd hx(2);
    hx << std::exp(x[0]), x[1] * x[1] * x[1];
    auto a = estimate_index(s, x), b = estimate_index(t, hx);
    CHECK(a.p_hat == b.p_hat);
    CHECK(a.tau_hat == b.tau_hat);
  }
  for (double tau : {0.25, 0.5, 0.75}) {
    auto a = estimate_point(s, tau), b = estimate_point(t, tau);
    CHECK(b.x_hat[0] == doctest::Approx(std::exp(a.x_hat[0])));
    CHECK(b.x_hat[1] == doctest::Approx(a.x_hat[1] * a.x_hat[1] * a.x_hat[1]));
  }
}

TEST_CASE("curves and comparability") {
  auto s = square_sample(2000, 43);
  std::vector<double> grid;
  for (int k = 1; k < 20; ++k) grid.push_back(k * 0.05);
  auto curve = estimate_curve(s, grid);
  CHECK(curve.size() == 19);
  CHECK(curve.monotone_flag == is_partial_monotone(curve, s.order()));
  auto c = estimate_comparability(s, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  CHECK(std::abs(c.value - 0.5) < 0.08);
  CHECK(c.se == doctest::Approx(std::sqrt(c.value * (1 - c.value) / 2000)));
  double smallest = 1.0;
  for (const auto& p : c.points) smallest = std::min(smallest, p.p_hat);
  CHECK(c.value == smallest);

  QuantileCurve mono{{0.25, 0.5, 0.75}, (Eigen::MatrixXd(3, 2) << 0, 0, 1, 1, 2, 2).finished(), {1, 1, 1}, true};
  CHECK(is_partial_monotone(mono, PartialOrder::orthant(2)));
  CHECK_THROWS_AS(check_tau_grid({0.5, 0.4}), Error);
  CHECK_THROWS_AS(check_tau_grid({0.0, 0.4}), Error);
}

TEST_CASE("influence values") {
  auto o = PartialOrder::orthant(2);
  auto self = influence(o, vec({0.5, 0.5}), vec({0.5, 0.5}), 0.5, 0.5);
  CHECK(self.p == doctest::Approx(0.5));
  CHECK(self.tau == doctest::Approx(1.0));
  auto inc = influence(o, vec({0.5, 0.5}), vec({0.1, 0.9}), 0.5, 0.5);
  CHECK(inc.p == doctest::Approx(-0.5));
  CHECK(inc.tau == 0.0);
  auto above = influence(o, vec({0.5, 0.5}), vec({0.9, 0.9}), 0.3, 0.4);
  CHECK(above.tau == doctest::Approx(-0.3 / 0.4));
  CHECK_THROWS_AS(influence(o, vec({0.5, 0.5}), vec({0.9, 0.9}), 0.3, 0.0), Error);

  // Influence values average to zero under the population law.
  auto rng = make_rng(44);
  const Eigen::MatrixXd draws = testing::uniform_points(200000, 2, rng);
  const Eigen::VectorXd x = vec({0.3, 0.6});
  const double tau = testing::square_tau(0.3, 0.6), p = testing::square_p(0.3, 0.6);
  double mean_tau = 0, mean_p = 0;
  for (Index i = 0; i < draws.rows(); ++i) {
    auto v = influence(o, x, draws.row(i).transpose(), tau, p);
    mean_tau += v.tau;
    mean_p += v.p;
  }
  CHECK(std::abs(mean_tau / draws.rows()) < 0.01);
  CHECK(std::abs(mean_p / draws.rows()) < 0.005);
}

TEST_CASE("index covariance") {
  auto s = square_sample(5000, 45);
  const auto z = vec({0.3, 0.3}), y = vec({0.7, 0.7});
  auto ez = estimate_index(s, z);
  CHECK(index_se_covariance(s, z, z) == doctest::Approx(*ez.tau_hat * (1 - *ez.tau_hat) / ez.p_hat));
  CHECK(index_se_covariance(s, z, y) == doctest::Approx(index_se_covariance(s, y, z)));

  // Bootstrap oracle for the cross term.
  const Eigen::MatrixXd& obs = s.observations();
  const Index n = obs.rows();
  std::vector<char> zl(n), zc(n), yl(n), yc(n);
  for (Index i = 0; i < n; ++i) {
    const Eigen::VectorXd o = obs.row(i).transpose();
    zl[i] = s.order().precedes_or_equal(o, z);
    zc[i] = zl[i] || s.order().precedes_or_equal(z, o);
    yl[i] = s.order().precedes_or_equal(o, y);
    yc[i] = yl[i] || s.order().precedes_or_equal(y, o);
  }
  auto rng = make_rng(46);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  const int B = 2000;
  std::vector<double> tz(B), ty(B);
  for (int b = 0; b < B; ++b) {
    double a1 = 0, c1 = 0, a2 = 0, c2 = 0;
    for (Index i = 0; i < n; ++i) {
      const Index j = pick(rng);
      a1 += zl[j];
      c1 += zc[j];
      a2 += yl[j];
      c2 += yc[j];
    }
    tz[b] = a1 / c1;
    ty[b] = a2 / c2;
  }
  double mz = 0, my = 0;
  for (int b = 0; b < B; ++b) mz += tz[b], my += ty[b];
  mz /= B;
  my /= B;
  double cov = 0, vz = 0;
  for (int b = 0; b < B; ++b) cov += (tz[b] - mz) * (ty[b] - my), vz += (tz[b] - mz) * (tz[b] - mz);
  cov = cov / (B - 1) * n;
  vz = vz / (B - 1) * n;
  const double omega = index_se_covariance(s, z, y);
  CHECK(std::abs(omega - cov) <= 0.2 * std::abs(omega));
  CHECK(std::abs(index_se_covariance(s, z, z) - vz) <= 0.2 * index_se_covariance(s, z, z));

  Eigen::MatrixXd b(2, 2);
  b << 0, 1, 1, 0;
  CHECK_THROWS_AS(index_se_covariance(Sample(b, PartialOrder::orthant(2)), vec({0.5, 0.5}), vec({0, 1})), Error);
}

TEST_CASE("index covariance matches a replication study") {
  const auto z = vec({0.3, 0.3}), y = vec({0.7, 0.7});
  const double tz = testing::square_tau(0.3, 0.3), ty = testing::square_tau(0.7, 0.7);
  // 2000 replications: at 500 the Monte Carlo error of the covariance is
  // itself close to 20% of its value.
  const int R = 2000;
  const double n = 5000;
  std::vector<double> dz(R), dy(R);
  double omega = 0;
  for (int r = 0; r < R; ++r) {
    auto s = square_sample(5000, 1000 + static_cast<std::uint64_t>(r));
    dz[r] = std::sqrt(n) * (*estimate_index(s, z).tau_hat - tz);
    dy[r] = std::sqrt(n) * (*estimate_index(s, y).tau_hat - ty);
    omega += index_se_covariance(s, z, y) / R;
  }
  double mz = 0, my = 0;
  for (int r = 0; r < R; ++r) mz += dz[r] / R, my += dy[r] / R;
  double cov = 0;
  for (int r = 0; r < R; ++r) cov += (dz[r] - mz) * (dy[r] - my) / (R - 1);
  CHECK(std::abs(omega - cov) <= 0.2 * std::abs(omega));
}

}  // TEST_SUITE
