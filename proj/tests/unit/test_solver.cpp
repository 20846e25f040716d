#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pq/solver.hpp"

using namespace pq;
using pq::testing::vec;

namespace {

Eigen::VectorXd body_point(double v, double x1, double x2) { return vec({v, x1, x2}); }

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("membership in the lifted body") {
  auto problem = problem_from_model(UniformUnitSquare{}, 0.5, 0.3);
  auto body = reformulate(problem).body;
  CHECK(body.dimension() == 3);
  CHECK(body.contains(body_point(std::log(0.45), 0.5, 0.5)));
  CHECK(body.contains(body_point(std::log(0.5) - 1e-12, 0.5, 0.5)));
  CHECK_FALSE(body.contains(body_point(std::log(0.55), 0.5, 0.5)));
  CHECK_FALSE(body.contains(body_point(std::log(0.29), 0.5, 0.5)));
  CHECK_FALSE(body.contains(body_point(0.1, 0.5, 0.5)));
  CHECK_FALSE(body.contains(body_point(std::log(0.31), 0.05, 0.95)));
  CHECK(body.lift(vec({0.5, 0.5})) == doctest::Approx(std::log(0.5)));
  CHECK(body.lift(vec({0.2, 0.2})) ==
        doctest::Approx(std::min(std::log(0.64) - std::log(0.5), std::log(0.04) - std::log(0.5))));
  CHECK(body.oracle_calls() > 0);
  CHECK_THROWS_AS(body.contains(vec({0.0, 0.5})), Error);
}

TEST_CASE("convexity of the body") {
  auto problem = problem_from_model(UniformUnitSquare{}, 0.3, 0.2);
  auto body = reformulate(problem).body;
  auto rng = make_rng(71);
  int pairs = 0;
  std::vector<Eigen::VectorXd> inside;
  while (inside.size() < 2000) {
    Eigen::VectorXd z(3);
    z << std::log(0.2) * uniform01(rng), uniform01(rng), uniform01(rng);
    if (body.contains(z)) inside.push_back(z);
  }
  for (std::size_t k = 0; k + 1 < inside.size(); k += 2) {
    REQUIRE(body.contains(0.5 * (inside[k] + inside[k + 1])));
    ++pairs;
  }
  CHECK(pairs == 1000);
}

TEST_CASE("hit-and-run steps") {
  auto rng = make_rng(72);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(1, 1);
  auto unit = [](const Eigen::VectorXd& z) { return z[0] >= 0.0 && z[0] <= 1.0; };

  // Flat target: every move is a uniform draw from the chord [0, 1].
  Eigen::VectorXd z = vec({0.3});
  double sum = 0;
  const int steps = 10000;
  for (int i = 0; i < steps; ++i) {
    z = hit_and_run_step(z, cov, unit, [](const Eigen::VectorXd&) { return 0.0; }, rng);
    REQUIRE(unit(z));
    sum += z[0];
  }
  CHECK(std::abs(sum / steps - 0.5) < 0.01);

  // Exponential target e^{a z}: mean 1/(1 − e^{−a}) − 1/a.
  const double a = 5.0;
  sum = 0;
  for (int i = 0; i < steps; ++i) {
    z = hit_and_run_step(z, cov, unit, [a](const Eigen::VectorXd& w) { return a * w[0]; }, rng);
    sum += z[0];
  }
  CHECK(std::abs(sum / steps - (1 / (1 - std::exp(-a)) - 1 / a)) < 0.01);

  // Degenerate chord: the body is a single point.
  const Eigen::VectorXd p = vec({0.2, 0.7});
  auto point_only = [&p](const Eigen::VectorXd& w) { return (w - p).norm() == 0.0; };
  auto next = hit_and_run_step(p, Eigen::MatrixXd::Identity(2, 2), point_only,
                               [](const Eigen::VectorXd&) { return 0.0; }, rng);
  CHECK(next == p);

  CHECK_THROWS_AS(hit_and_run_step(vec({2.0}), cov, unit, [](const Eigen::VectorXd&) { return 0.0; }, rng), Error);
}

TEST_CASE("annealing on the unit square") {
  auto problem = problem_from_model(UniformUnitSquare{}, 0.5, 0.3);
  SolverOptions opt;
  opt.seed = 5;
  auto r = anneal_optimize(problem, opt);
  CHECK((r.x - vec({0.5, 0.5})).norm() <= 0.05);
  CHECK(r.p_star >= 0.475);
  CHECK(r.p_star <= 0.5 + 1e-12);
  CHECK(r.tau_x == doctest::Approx(0.5).epsilon(0.05));
  for (std::size_t i = 1; i < r.best_v_trace.size(); ++i) CHECK(r.best_v_trace[i] >= r.best_v_trace[i - 1]);
  CHECK(reformulate(problem).body.contains(vec({r.v, r.x[0], r.x[1]})));
  CHECK(r.chains == 8);
  CHECK(r.walk_length == 90);

  auto again = anneal_optimize(problem, opt);
  CHECK(again.x == r.x);
  CHECK(again.best_v_trace == r.best_v_trace);
  opt.seed = 6;
  CHECK(anneal_optimize(problem, opt).x != r.x);
}

TEST_CASE("annealing at other levels and dimensions") {
  SolverOptions opt;
  opt.seed = 9;
  auto high = anneal_optimize(problem_from_model(UniformUnitSquare{}, 0.99, 0.5), opt);
  const double p99 = 1 / (1 + 2 * std::sqrt(0.99 * 0.01));
  CHECK(high.p_star >= 0.95 * p99);
  CHECK(high.p_star <= p99 + 1e-12);

  PopulationModel cube = IndependentProduct{{Marginal::uniform(0, 1), Marginal::uniform(0, 1), Marginal::uniform(0, 1)}};
  auto r = anneal_optimize(problem_from_model(cube, 0.5, 0.15), opt);
  CHECK(r.p_star >= 0.95 * 0.25);
  CHECK((r.x - Eigen::VectorXd::Constant(3, 0.5)).norm() < 0.1);
}

TEST_CASE("infeasible pbar and bad problems") {
  try {
    anneal_optimize(problem_from_model(UniformUnitSquare{}, 0.5, 0.6));
    FAIL("expected InfeasiblePbar");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasiblePbar);
  }
  CHECK_THROWS_AS(problem_from_model(UniformUnitSquare{}, 1.5, 0.3), Error);
  CHECK_THROWS_AS(problem_from_model(IntervalCovering{}, 0.5, 0.3), Error);
  auto p = problem_from_model(UniformUnitSquare{}, 0.5, 0.3);
  p.cone = PartialOrder::interval_inclusion();
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("Monte Carlo probability oracle") {
  auto rng = make_rng(73);
  PopulationModel sq = UniformUnitSquare{};
  auto o = PartialOrder::orthant(2);
  auto e = mc_probability_oracle(sq, o, vec({0.5, 0.5}), 100000, rng);
  CHECK(std::abs(e.below - 0.25) <= 3 * e.se_below);
  CHECK(std::abs(e.above - 0.25) <= 3 * e.se_above);
  CHECK(e.se_below == doctest::Approx(std::sqrt(e.below * (1 - e.below) / 100000)));
  auto out = mc_probability_oracle(sq, o, vec({2, 2}), 1000, rng);
  CHECK(out.above == 0.0);
  CHECK(out.below == 1.0);
  PopulationModel line = IndependentProduct{{Marginal::uniform(0, 1)}};
  auto med = mc_probability_oracle(line, PartialOrder::orthant(1), vec({0.5}), 100000, rng);
  CHECK(std::abs(med.below - 0.5) < 0.01);
  CHECK(std::abs(med.above - 0.5) < 0.01);

  // Pooled oracle feeds a shrunken body into the solver.
  PooledProbabilityOracle pooled(sq, o, 50000, rng);
  auto raw = pooled.raw(vec({0.5, 0.5}));
  auto pair = pooled(vec({0.5, 0.5}));
  CHECK(pair.below == raw.below);
  CHECK(pair.se_above == raw.se_above);
  auto problem = problem_from_model(sq, 0.5, 0.3);
  problem.probabilities = pooled;
  const double shrunk = std::min(std::log(raw.above - 3 * raw.se_above), std::log(raw.below - 3 * raw.se_below));
  CHECK(reformulate(problem).body.lift(vec({0.5, 0.5})) == doctest::Approx(shrunk - std::log(0.5)));
  SolverOptions opt;
  opt.seed = 2;
  auto r = anneal_optimize(problem, opt);
  CHECK((r.x - vec({0.5, 0.5})).norm() < 0.1);
  CHECK(r.p_star > 0.4);
}

}  // TEST_SUITE
