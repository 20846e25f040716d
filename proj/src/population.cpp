#include "pq/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Uniform law on an axis-aligned box, as (P(X ⪯ x), P(X ⪰ x)).
std::pair<double, double> box_probabilities(const Eigen::Ref<const Eigen::VectorXd>& x,
                                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  double below = 1.0;
  double above = 1.0;
  for (Index j = 0; j < x.size(); ++j) {
    const double w = hi[j] - lo[j];
    below *= clamp01((x[j] - lo[j]) / w);
    above *= clamp01((hi[j] - x[j]) / w);
  }
  return {below, above};
}

/// Root of c s^2 + s - 1 = 0 in (0,1], written without cancellation near c = 0.
double aligned_root(double c) { return 2.0 / (std::sqrt(1.0 + 4.0 * c) + 1.0); }

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::TauOutOfRange, "tau must lie in (0,1)");
}

CdfPair make_pair(double below, double above, double comparable) {
  CdfPair out{below, above, comparable, std::nullopt};
  if (comparable > 0.0) out.tau = below / comparable;
  return out;
}

}  // namespace

PopulationModel::PopulationModel(Repr repr) : repr_(std::move(repr)) {
  if (const auto* p = as<IndependentProduct>(); p && p->marginals.empty())
    throw Error(ErrorCode::InvalidArgument, "independent product needs at least one marginal");
  if (const auto* s = as<UniformSimplex>(); s && s->dimension < 2)
    throw Error(ErrorCode::InvalidArgument, "simplex needs dimension >= 2");
  if (const auto* f = as<FiniteModel>()) {
    f->distribution.validate();
    if (!f->order.dag()) throw Error(ErrorCode::InvalidArgument, "finite model needs a DAG-type relation");
  }
}

std::string PopulationModel::name() const {
  return std::visit(overloaded{[](const UniformUnitSquare&) { return std::string("unit-square"); },
                               [](const TwoSquaresDisjoint&) { return std::string("two-squares-disjoint"); },
                               [](const TwoSquaresAligned&) { return std::string("two-squares-aligned"); },
                               [](const IndependentProduct&) { return std::string("independent-product"); },
                               [](const IntervalCovering&) { return std::string("interval-covering"); },
                               [](const CompleteOrderScore&) { return std::string("complete-order"); },
                               [](const UniformSimplex&) { return std::string("simplex"); },
                               [](const FiniteModel&) { return std::string("finite"); }},
                    repr_);
}

Index PopulationModel::dimension() const {
  return std::visit(overloaded{[](const IndependentProduct& m) { return static_cast<Index>(m.marginals.size()); },
                               [](const CompleteOrderScore& m) { return m.weights.size(); },
                               [](const UniformSimplex& m) { return m.dimension; },
                               [](const FiniteModel&) { return Index{1}; },
                               [](const auto&) { return Index{2}; }},
                    repr_);
}

PartialOrder PopulationModel::order() const {
  if (as<IntervalCovering>()) return PartialOrder::interval_inclusion();
  if (const auto* c = as<CompleteOrderScore>()) return PartialOrder::linear_score(c->weights);
  if (const auto* f = as<FiniteModel>()) return f->order;
  return PartialOrder::orthant(dimension());
}

bool PopulationModel::has_sampler() const noexcept { return !as<CompleteOrderScore>(); }

Eigen::MatrixXd PopulationModel::sample(Index n, Rng& rng) const {
  if (!has_sampler()) throw Error(ErrorCode::NoSampler, name() + " has no direct sampler");
  const Index d = dimension();
  Eigen::MatrixXd out(n, d);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  std::visit(
      overloaded{
          [&](const UniformUnitSquare&) {
            for (Index i = 0; i < n; ++i) out.row(i) << u01(rng), u01(rng);
          },
          [&](const TwoSquaresDisjoint&) {
            for (Index i = 0; i < n; ++i) {
              const bool upper_left = coin(rng);
              const double a = -1.0 + 2.0 * u01(rng);
              const double b = 1.0 + 2.0 * u01(rng);
              if (upper_left) out.row(i) << a, b; else out.row(i) << b, a;
            }
          },
          [&](const TwoSquaresAligned&) {
            for (Index i = 0; i < n; ++i) {
              const double shift = coin(rng) ? 1.0 : 0.0;
              const double a = u01(rng);
              const double b = u01(rng);
              out.row(i) << a + shift, b + shift;
            }
          },
          [&](const IndependentProduct& m) {
            for (Index i = 0; i < n; ++i)
              for (Index j = 0; j < d; ++j) out(i, j) = m.marginals[static_cast<std::size_t>(j)].sample(rng);
          },
          [&](const IntervalCovering&) {
            for (Index i = 0; i < n; ++i) {
              const double a = u01(rng);
              const double b = u01(rng);
              out.row(i) << std::min(a, b), std::max(a, b);
            }
          },
          [&](const CompleteOrderScore&) {},
          [&](const UniformSimplex&) {
            std::exponential_distribution<double> e(1.0);
            for (Index i = 0; i < n; ++i) {
              for (Index j = 0; j < d; ++j) out(i, j) = e(rng);
              out.row(i) /= out.row(i).sum();
            }
          },
          [&](const FiniteModel& m) {
            const auto& dist = m.distribution;
            std::discrete_distribution<std::size_t> pick(dist.masses.begin(), dist.masses.end());
            const DagOrder& dag = *m.order.dag();
            for (Index i = 0; i < n; ++i)
              out(i, 0) = static_cast<double>(dag.index_of(dist.labels[pick(rng)]));
          }},
      repr_);
  return out;
}

bool PopulationModel::has_density() const noexcept {
  return !as<CompleteOrderScore>() && !as<UniformSimplex>() && !as<FiniteModel>();
}

double PopulationModel::density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!has_density()) throw Error(ErrorCode::UnsupportedPoint, name() + " has no Lebesgue density");
  if (x.size() != dimension()) throw Error(ErrorCode::DimensionMismatch, "density point dimension");
  auto in = [](double v, double a, double b) { return v >= a && v <= b; };
  return std::visit(
      overloaded{
          [&](const UniformUnitSquare&) { return in(x[0], 0, 1) && in(x[1], 0, 1) ? 1.0 : 0.0; },
          [&](const TwoSquaresDisjoint&) {
            const bool a = in(x[0], -1, 1) && in(x[1], 1, 3);
            const bool b = in(x[0], 1, 3) && in(x[1], -1, 1);
            return (a || b) ? 0.125 : 0.0;
          },
          [&](const TwoSquaresAligned&) {
            const bool a = in(x[0], 0, 1) && in(x[1], 0, 1);
            const bool b = in(x[0], 1, 2) && in(x[1], 1, 2);
            return (a || b) ? 0.5 : 0.0;
          },
          [&](const IndependentProduct& m) {
            double f = 1.0;
            for (Index j = 0; j < x.size(); ++j) f *= m.marginals[static_cast<std::size_t>(j)].density(x[j]);
            return f;
          },
          [&](const IntervalCovering&) {
            return (x[0] >= 0.0 && x[0] <= x[1] && x[1] <= 1.0) ? 2.0 : 0.0;
          },
          [&](const auto&) { return 0.0; }},
      repr_);
}

Eigen::VectorXd PopulationModel::support_lower() const {
  const Index d = dimension();
  return std::visit(
      overloaded{[&](const TwoSquaresDisjoint&) { return Eigen::VectorXd::Constant(d, -1.0).eval(); },
                 [&](const IndependentProduct& m) {
                   Eigen::VectorXd lo(d);
                   for (Index j = 0; j < d; ++j) lo[j] = m.marginals[static_cast<std::size_t>(j)].lower_bound();
                   return lo;
                 },
                 [&](const CompleteOrderScore&) -> Eigen::VectorXd {
                   throw Error(ErrorCode::UnsupportedPoint, "score models carry no support box");
                 },
                 [&](const auto&) { return Eigen::VectorXd::Zero(d).eval(); }},
      repr_);
}

Eigen::VectorXd PopulationModel::support_upper() const {
  const Index d = dimension();
  return std::visit(
      overloaded{[&](const TwoSquaresDisjoint&) { return Eigen::VectorXd::Constant(d, 3.0).eval(); },
                 [&](const TwoSquaresAligned&) { return Eigen::VectorXd::Constant(d, 2.0).eval(); },
                 [&](const IndependentProduct& m) {
                   Eigen::VectorXd hi(d);
                   for (Index j = 0; j < d; ++j) hi[j] = m.marginals[static_cast<std::size_t>(j)].upper_bound();
                   return hi;
                 },
                 [&](const CompleteOrderScore&) -> Eigen::VectorXd {
                   throw Error(ErrorCode::UnsupportedPoint, "score models carry no support box");
                 },
                 [&](const FiniteModel& m) {
                   return Eigen::VectorXd::Constant(1, static_cast<double>(m.order.dag()->size() - 1)).eval();
                 },
                 [&](const auto&) { return Eigen::VectorXd::Ones(d).eval(); }},
      repr_);
}

// ---------------------------------------------------------------------------

CdfPair cdf_pair(const PopulationModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.dimension())
    throw Error(ErrorCode::DimensionMismatch, "point dimension does not match the model");
  if (!x.allFinite()) throw Error(ErrorCode::UnsupportedPoint, "non-finite coordinates");

  return std::visit(
      overloaded{
          [&](const UniformUnitSquare&) {
            const auto [below, above] =
                box_probabilities(x, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
            return make_pair(below, above, below + above);
          },
          [&](const TwoSquaresDisjoint&) {
            const auto [b1, a1] = box_probabilities(x, Eigen::Vector2d(-1, 1), Eigen::Vector2d(1, 3));
            const auto [b2, a2] = box_probabilities(x, Eigen::Vector2d(1, -1), Eigen::Vector2d(3, 1));
            const double below = 0.5 * (b1 + b2);
            const double above = 0.5 * (a1 + a2);
            return make_pair(below, above, below + above);
          },
          [&](const TwoSquaresAligned&) {
            const auto [b1, a1] = box_probabilities(x, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
            const auto [b2, a2] = box_probabilities(x, Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 2));
            const double below = 0.5 * (b1 + b2);
            const double above = 0.5 * (a1 + a2);
            return make_pair(below, above, below + above);
          },
          [&](const IndependentProduct& m) {
            double below = 1.0;
            double above = 1.0;
            for (Index j = 0; j < x.size(); ++j) {
              const auto& marginal = m.marginals[static_cast<std::size_t>(j)];
              below *= marginal.cdf(x[j]);
              above *= marginal.survival(x[j]);
            }
            return make_pair(below, above, below + above);
          },
          [&](const IntervalCovering&) {
            if (x[0] > x[1]) throw Error(ErrorCode::UnsupportedPoint, "interval with a > b");
            const double a = clamp01(x[0]);
            const double b = clamp01(x[1]);
            const double above = 2.0 * a * (1.0 - b);
            const double below = (b - a) * (b - a);
            return make_pair(below, above, below + above);
          },
          [&](const CompleteOrderScore& m) {
            const double u = m.weights.dot(x);
            return make_pair(m.score_law.cdf(u), m.score_law.survival(u), 1.0);
          },
          [&](const UniformSimplex& m) {
            const bool on_simplex = (x.array() >= 0.0).all() && std::abs(x.sum() - 1.0) <= 1e-12;
            if (on_simplex) return make_pair(0.0, 0.0, 0.0);
            if (m.dimension == 2) {
              const double below = std::max(0.0, std::min(1.0, x[0]) - std::max(0.0, 1.0 - x[1]));
              const double above = std::max(0.0, std::min(1.0, 1.0 - x[1]) - std::max(0.0, x[0]));
              return make_pair(below, above, below + above);
            }
            throw Error(ErrorCode::UnsupportedPoint, "simplex closed form off the simplex needs d = 2");
          },
          [&](const FiniteModel& m) {
            const DagOrder& dag = *m.order.dag();
            m.order.check_point(x);
            const auto node = static_cast<Index>(x[0]);
            double below = 0.0;
            double above = 0.0;
            double comparable = 0.0;
            for (std::size_t k = 0; k < m.distribution.size(); ++k) {
              const Index y = dag.index_of(m.distribution.labels[k]);
              const bool le = dag.precedes_or_equal(y, node);
              const bool ge = dag.precedes_or_equal(node, y);
              if (le) below += m.distribution.masses[k];
              if (ge) above += m.distribution.masses[k];
              if (le || ge) comparable += m.distribution.masses[k];
            }
            return make_pair(below, above, comparable);
          }},
      model.repr());
}

PartialQuantileResult partial_quantile(const PopulationModel& model, double tau) {
  check_tau(tau);
  PartialQuantileResult out{tau, {}, 0.0, {}, false, false};

  std::visit(
      overloaded{
          [&](const UniformUnitSquare&) {
            const double a = std::sqrt(tau);
            const double b = std::sqrt(1.0 - tau);
            out.points.push_back(Eigen::Vector2d::Constant(a / (a + b)));
            out.p_tau = 1.0 / (1.0 + 2.0 * std::sqrt(tau * (1.0 - tau)));
          },
          [&](const TwoSquaresDisjoint&) {
            // Each square on its own is a half-mass copy of the unit square.
            const double a = std::sqrt(tau);
            const double b = std::sqrt(1.0 - tau);
            const double s = a / (a + b);
            out.points.push_back(Eigen::Vector2d(-1.0 + 2.0 * s, 1.0 + 2.0 * s));
            out.points.push_back(Eigen::Vector2d(1.0 + 2.0 * s, -1.0 + 2.0 * s));
            out.p_tau = 0.5 / (1.0 + 2.0 * std::sqrt(tau * (1.0 - tau)));
          },
          [&](const TwoSquaresAligned&) {
            double s = 1.0;
            if (tau < 0.5) {
              s = aligned_root(1.0 / (2.0 * tau) - 1.0);
              out.points.push_back(Eigen::Vector2d::Constant(s));
            } else if (tau > 0.5) {
              s = aligned_root(1.0 / (2.0 * (1.0 - tau)) - 1.0);
              out.points.push_back(Eigen::Vector2d::Constant(2.0 - s));
            } else {
              out.points.push_back(Eigen::Vector2d::Ones());
            }
            out.p_tau = (1.0 + (1.0 - s) * (1.0 - s) + s * s) / 2.0;
          },
          [&](const IndependentProduct& m) {
            const auto d = static_cast<double>(m.marginals.size());
            const double a = std::pow(tau, 1.0 / d);
            const double b = std::pow(1.0 - tau, 1.0 / d);
            const double level = a / (a + b);
            Eigen::VectorXd x(m.marginals.size());
            for (std::size_t j = 0; j < m.marginals.size(); ++j)
              x[static_cast<Index>(j)] = m.marginals[j].quantile(level);
            out.points.push_back(std::move(x));
            out.p_tau = std::pow(a + b, -d);
          },
          [&](const IntervalCovering&) {
            const double a = std::sqrt(2.0 * (1.0 - tau) / tau);
            const double half = 1.0 / (2.0 + 2.0 * a);
            out.points.push_back(Eigen::Vector2d(0.5 - half, 0.5 + half));
            const double r = 1.0 / (1.0 + a);
            out.p_tau = r * r + 2.0 * (0.5 - half) * (0.5 - half);
          },
          [&](const CompleteOrderScore& m) {
            // The whole level set {x : w'x = q(τ)} qualifies; report its point
            // closest to the origin.
            const double level = m.score_law.quantile(tau);
            out.points.push_back(m.weights * (level / m.weights.squaredNorm()));
            out.p_tau = 1.0;
          },
          [&](const UniformSimplex& m) {
            // p_x = 0 on the whole support; with both conditional probabilities
            // set to one every point of the simplex is a partial quantile.
            out.points.push_back(Eigen::VectorXd::Constant(m.dimension, 1.0 / static_cast<double>(m.dimension)));
            out.p_tau = 0.0;
            out.whole_support = true;
          },
          [&](const FiniteModel& m) {
            const auto table = finite_exact_quantiles(m.distribution, m.order, std::vector<double>{tau});
            const auto& level = table.levels.front();
            const DagOrder& dag = *m.order.dag();
            if (!level.p_tau) {
              out.empty = true;
              return;
            }
            out.p_tau = *level.p_tau;
            for (auto k : level.points) {
              const auto& label = m.distribution.labels[k];
              out.points.push_back(Eigen::VectorXd::Constant(1, static_cast<double>(dag.index_of(label))));
              out.labels.push_back(label);
            }
          }},
      model.repr());
  return out;
}

ComparabilityResult comparability(const PopulationModel& model) {
  if (model.as<UniformUnitSquare>()) return {0.5, 0.5, true};
  if (const auto* m = model.as<IndependentProduct>())
    return {std::pow(0.5, static_cast<double>(m->marginals.size()) - 1.0), 0.5, true};
  if (model.as<TwoSquaresAligned>()) return {0.75, 1.0 / 6.0, true};
  if (model.as<TwoSquaresDisjoint>()) return {0.25, 0.5, true};
  if (model.as<CompleteOrderScore>()) return {1.0, 0.5, true};
  if (model.as<UniformSimplex>()) return {0.0, 0.5, true};

  ComparabilityResult best{std::numeric_limits<double>::infinity(), 0.5, false};
  const auto steps = static_cast<int>(std::lround(1.0 / kComparabilityGridStep));
  for (int k = 1; k < steps; ++k) {
    const double tau = k * kComparabilityGridStep;
    const auto q = partial_quantile(model, tau);
    if (q.empty) continue;
    if (q.p_tau < best.value) {
      best.value = q.p_tau;
      best.tau_star = tau;
    }
  }
  if (!std::isfinite(best.value)) best.value = 0.0;
  return best;
}

double tau_index_law_cdf(Index d, double tau) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  check_tau(tau);
  if (d == 1) return tau;

  // Gil-Pelaez inversion with the real, even characteristic function
  // φ(t) = πt / sinh(πt) of the standard logistic law:
  //   F(s) = 1/2 + (1/π) ∫_0^∞ sin(ts) φ(t)^d / t dt.
  const double s = std::log(tau / (1.0 - tau));
  const auto dd = static_cast<double>(d);
  auto integrand = [&](double t) {
    if (t == 0.0) return s;
    const double phi = M_PI * t / std::sinh(M_PI * t);
    return std::sin(t * s) * std::pow(phi, dd) / t;
  };
  // φ(t)^d < 1e-17 beyond t = 14 for every d >= 1.
  constexpr double upper = 14.0;
  double error = 0.0;
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, upper, 20, 1e-13, &error);
  return std::clamp(0.5 + integral / M_PI, 0.0, 1.0);
}

}  // namespace pq
