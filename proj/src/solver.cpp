#include "pq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kChordTolerance = 1e-9;
constexpr int kChordBisections = 80;
constexpr int kChordDoublings = 60;
constexpr double kCovarianceRidge = 1e-8;

/// Distance from z along unit direction u to the boundary of the body.
double chord_extent(const Eigen::VectorXd& z, const Eigen::VectorXd& u, const Membership& inside) {
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; inside(z + hi * u); ++k) {
    if (k == kChordDoublings) return hi;
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < kChordBisections && hi - lo > kChordTolerance; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (inside(z + mid * u))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

/// Draw t on [−back, forward] with density ∝ exp(slope · t).
double sample_exponential_on(double back, double forward, double slope, Rng& rng) {
  const double len = back + forward;
  const double u = uniform01(rng);
  const double s = slope * len;
  double t;
  if (std::abs(s) < 1e-12) {
    t = -back + u * len;
  } else if (slope > 0.0) {
    t = forward + std::log(u + (1.0 - u) * std::exp(-s)) / slope;
  } else {
    t = -back + std::log1p(u * std::expm1(s)) / slope;
  }
  return std::clamp(t, -back, forward);
}

Eigen::MatrixXd state_covariance(const std::vector<Eigen::VectorXd>& states) {
  const Index dim = states.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& s : states) mean += s;
  mean /= static_cast<double>(states.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : states) cov += (s - mean) * (s - mean).transpose();
  cov /= static_cast<double>(std::max<std::size_t>(1, states.size() - 1));
  cov.diagonal().array() += kCovarianceRidge;
  return cov;
}

}  // namespace

void LogConcaveProblem::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::TauOutOfRange, "tau must lie in (0,1)");
  if (!(pbar > 0.0 && pbar < 1.0)) throw Error(ErrorCode::InvalidArgument, "pbar must lie in (0,1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0,1)");
  if (!probabilities) throw Error(ErrorCode::InvalidArgument, "no probability oracle");
  if (lower.size() < 1 || upper.size() != lower.size())
    throw Error(ErrorCode::DimensionMismatch, "search box bounds disagree");
  if (!((upper - lower).array() > 0.0).all()) throw Error(ErrorCode::InvalidArgument, "search box is empty");
  if (!cone.conic()) throw Error(ErrorCode::NotAPartialOrder, "the solver needs a cone order");
  if (cone.dimension() != lower.size()) throw Error(ErrorCode::DimensionMismatch, "cone dimension");
}

LogConcaveProblem problem_from_model(const PopulationModel& model, double tau, double pbar, double epsilon,
                                     double delta) {
  const PartialOrder order = model.order();
  if (!order.conic()) throw Error(ErrorCode::NotAPartialOrder, model.name() + " is not under a cone order");
  LogConcaveProblem p;
  if (model.has_density()) p.density = [model](const Eigen::VectorXd& x) { return model.density(x); };
  p.cone = order;
  p.tau = tau;
  p.probabilities = [model](const Eigen::VectorXd& x) {
    const CdfPair c = cdf_pair(model, x);
    return ProbabilityPair{c.above, c.below};
  };
  p.pbar = pbar;
  p.epsilon = epsilon;
  p.delta = delta;
  p.lower = model.support_lower();
  p.upper = model.support_upper();
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------

FeasibleSet::FeasibleSet(const LogConcaveProblem& problem)
    : problem_(&problem),
      dimension_(problem.dimension()),
      log_pbar_(std::log(problem.pbar)),
      log_tau_(std::log(problem.tau)),
      log_one_minus_tau_(std::log1p(-problem.tau)),
      calls_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  problem.validate();
}

double FeasibleSet::lift(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  calls_->fetch_add(1, std::memory_order_relaxed);
  const ProbabilityPair pr = problem_->probabilities(x);
  const double above = pr.above - 3.0 * pr.se_above;
  const double below = pr.below - 3.0 * pr.se_below;
  if (!(above > 0.0) || !(below > 0.0)) return kNegInf;
  return std::min({std::log(above) - log_one_minus_tau_, std::log(below) - log_tau_, 0.0});
}

bool FeasibleSet::contains(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (z.size() != dimension_ + 1) throw Error(ErrorCode::DimensionMismatch, "body point dimension");
  const double v = z[0];
  if (!(v >= log_pbar_ && v <= 0.0)) return false;
  return v <= lift(z.tail(dimension_));
}

Reformulation reformulate(const LogConcaveProblem& problem) { return Reformulation{FeasibleSet(problem)}; }

// ---------------------------------------------------------------------------

Eigen::VectorXd hit_and_run_step(const Eigen::VectorXd& current, const Eigen::MatrixXd& direction_cov,
                                 const Membership& membership, const LogDensity& target_log_density,
                                 Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(direction_cov);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::InvalidArgument, "direction covariance is not positive definite");
  return hit_and_run_step_factored(current, llt.matrixL(), membership, target_log_density, rng);
}

Eigen::VectorXd hit_and_run_step_factored(const Eigen::VectorXd& current, const Eigen::MatrixXd& cov_factor,
                                          const Membership& membership, const LogDensity& target_log_density,
                                          Rng& rng) {
  if (!membership(current)) throw Error(ErrorCode::NotInBody, "hit-and-run started outside the body");
  Eigen::VectorXd u = cov_factor * standard_normal(current.size(), rng);
  const double norm = u.norm();
  if (!(norm > 0.0)) return current;
  u /= norm;

  const double forward = chord_extent(current, u, membership);
  const double back = chord_extent(current, -u, membership);
  const double len = forward + back;
  if (!(len > 1e-12)) return current;

  const double slope =
      (target_log_density(current + forward * u) - target_log_density(current - back * u)) / len;
  const double t = sample_exponential_on(back, forward, std::isfinite(slope) ? slope : 0.0, rng);
  Eigen::VectorXd next = current + t * u;
  return membership(next) ? next : current;
}

// ---------------------------------------------------------------------------

SolverResult anneal_optimize(const LogConcaveProblem& problem, const SolverOptions& options) {
  problem.validate();
  const FeasibleSet body(problem);
  const Index d = problem.dimension();
  const auto dd = static_cast<double>(d);
  const Index k = options.chains > 0
                      ? options.chains
                      : std::max<Index>(8, d * static_cast<Index>(std::ceil(std::log(dd) + 1.0)));
  const Index walk = options.walk_length > 0 ? options.walk_length : 10 * (d + 1) * (d + 1);
  const double log_pbar = body.log_pbar();

  SolverResult out;
  out.chains = k;
  out.walk_length = walk;
  double best_v = kNegInf;
  Eigen::VectorXd best_x;
  auto offer = [&](double v, const Eigen::VectorXd& x) {
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  };

  // Coarse probe over the search box.
  const Index per_axis = std::max<Index>(
      2, static_cast<Index>(std::floor(std::pow(static_cast<double>(options.probe_points), 1.0 / dd))));
  const Eigen::VectorXd step = (problem.upper - problem.lower) / static_cast<double>(per_axis);
  std::vector<std::pair<double, Eigen::VectorXd>> probes;
  {
    std::vector<Index> idx(static_cast<std::size_t>(d), 0);
    Index total = 1;
    for (Index j = 0; j < d; ++j) total *= per_axis;
    for (Index r = 0; r < total; ++r) {
      Eigen::VectorXd x(d);
      for (Index j = 0; j < d; ++j)
        x[j] = problem.lower[j] + (static_cast<double>(idx[static_cast<std::size_t>(j)]) + 0.5) * step[j];
      const double v = body.lift(x);
      if (v >= log_pbar) probes.emplace_back(v, x);
      for (Index j = d - 1; j >= 0; --j) {
        auto& i = idx[static_cast<std::size_t>(j)];
        if (++i < per_axis) break;
        i = 0;
      }
    }
  }
  if (probes.empty())
    throw Error(ErrorCode::InfeasiblePbar, "no point with comparison probability above pbar was found");
  std::stable_sort(probes.begin(), probes.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  // The probe only seeds the schedule and the chains; the answer comes from chain states.
  double schedule_v = probes.front().first;

  // Rejection from the probe bounding box, expanded by one probe cell.
  Eigen::VectorXd box_lo = probes.front().second;
  Eigen::VectorXd box_hi = probes.front().second;
  for (const auto& pr : probes) {
    box_lo = box_lo.cwiseMin(pr.second);
    box_hi = box_hi.cwiseMax(pr.second);
  }
  box_lo -= step;
  box_hi += step;

  Rng init_rng = make_rng(options.seed, 0);
  std::vector<Eigen::VectorXd> states;
  const auto membership = [&body](const Eigen::VectorXd& z) { return body.contains(z); };
  for (Index tries = 0; tries < options.init_budget && static_cast<Index>(states.size()) < k; ++tries) {
    Eigen::VectorXd z(d + 1);
    z[0] = log_pbar * uniform01(init_rng);
    for (Index j = 0; j < d; ++j) z[j + 1] = box_lo[j] + (box_hi[j] - box_lo[j]) * uniform01(init_rng);
    if (membership(z)) states.push_back(std::move(z));
    else ++out.init_rejections;
  }
  for (std::size_t i = 0; static_cast<Index>(states.size()) < k; ++i) {
    const auto& [v, x] = probes[i % probes.size()];
    Eigen::VectorXd z(d + 1);
    z[0] = log_pbar + (v - log_pbar) * uniform01(init_rng);
    z.tail(d) = x;
    states.push_back(std::move(z));
    ++out.init_from_probe;
  }
  for (const auto& z : states) offer(body.lift(z.tail(d)), z.tail(d));

  std::vector<Rng> chain_rng;
  for (Index c = 0; c < k; ++c) chain_rng.push_back(make_rng(options.seed, static_cast<std::uint64_t>(c) + 1));

  const double growth = 1.0 + 1.0 / std::sqrt(dd);
  auto phases_needed = [&](double p_hat) {
    const double arg = 2.0 * p_hat * (dd + std::log(1.0 / problem.delta)) / (problem.pbar * problem.epsilon);
    return static_cast<Index>(std::ceil(std::sqrt(dd) * std::log(arg)));
  };

  Index m = phases_needed(std::exp(schedule_v));
  for (Index phase = 0; phase < m && phase < options.max_phases; ++phase) {
    const double p_hat = std::exp(schedule_v);
    const double a = (problem.pbar / p_hat) * std::pow(growth, static_cast<double>(phase));
    out.temperature.push_back(a);
    const Eigen::MatrixXd factor = Eigen::LLT<Eigen::MatrixXd>(state_covariance(states)).matrixL();
    const LogDensity target = [a](const Eigen::VectorXd& z) { return a * z[0]; };

    std::vector<double> chain_best(static_cast<std::size_t>(k), kNegInf);
    std::vector<Eigen::VectorXd> chain_best_x(static_cast<std::size_t>(k));
#pragma omp parallel for schedule(static)
    for (Index c = 0; c < k; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      Eigen::VectorXd z = states[cc];
      for (Index s = 0; s < walk; ++s) {
        z = hit_and_run_step_factored(z, factor, membership, target, chain_rng[cc]);
        const Eigen::VectorXd x = z.tail(d);
        const double v = body.lift(x);
        if (v > chain_best[cc]) {
          chain_best[cc] = v;
          chain_best_x[cc] = x;
        }
      }
      states[cc] = z;
    }
    for (Index c = 0; c < k; ++c)
      if (std::isfinite(chain_best[static_cast<std::size_t>(c)]))
        offer(chain_best[static_cast<std::size_t>(c)], chain_best_x[static_cast<std::size_t>(c)]);
    out.best_v_trace.push_back(best_v);
    schedule_v = std::max(schedule_v, best_v);
    m = std::max(m, phases_needed(std::exp(schedule_v)));
    ++out.phases;
  }

  out.x = best_x;
  out.v = best_v;
  out.p_star = std::exp(best_v);
  const ProbabilityPair pr = problem.probabilities(best_x);
  out.p_x = pr.above + pr.below;
  out.tau_x = out.p_x > 0.0 ? pr.below / out.p_x : std::numeric_limits<double>::quiet_NaN();
  out.oracle_calls = body.oracle_calls();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

MonteCarloEstimate count_pool(const Eigen::MatrixXd& pool, const PartialOrder& cone,
                              const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != pool.cols()) throw Error(ErrorCode::DimensionMismatch, "oracle point dimension");
  const Index n = pool.rows();
  Index above = 0;
  Index below = 0;
  if (cone.is_orthant()) {
    for (Index i = 0; i < n; ++i) {
      bool le = true;
      bool ge = true;
      for (Index j = 0; j < pool.cols(); ++j) {
        le &= pool(i, j) <= x[j];
        ge &= pool(i, j) >= x[j];
      }
      below += le;
      above += ge;
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      const Comparison c = cone.compare(pool.row(i).transpose(), x);
      below += c == Comparison::Precedes || c == Comparison::Equal;
      above += c == Comparison::Succeeds || c == Comparison::Equal;
    }
  }
  const auto nn = static_cast<double>(n);
  const double pa = static_cast<double>(above) / nn;
  const double pb = static_cast<double>(below) / nn;
  return {pa, pb, std::sqrt(pa * (1.0 - pa) / nn), std::sqrt(pb * (1.0 - pb) / nn)};
}

}  // namespace

MonteCarloEstimate mc_probability_oracle(const PopulationModel& model, const PartialOrder& cone,
                                         const Eigen::Ref<const Eigen::VectorXd>& x, Index n_mc, Rng& rng) {
  if (n_mc < 1) throw Error(ErrorCode::InvalidArgument, "n_mc must be positive");
  return count_pool(model.sample(n_mc, rng), cone, x);
}

PooledProbabilityOracle::PooledProbabilityOracle(const PopulationModel& model, const PartialOrder& cone,
                                                 Index n_mc, Rng& rng)
    : pool_(model.sample(n_mc, rng)), cone_(cone) {
  if (n_mc < 1) throw Error(ErrorCode::InvalidArgument, "n_mc must be positive");
}

MonteCarloEstimate PooledProbabilityOracle::raw(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return count_pool(pool_, cone_, x);
}

ProbabilityPair PooledProbabilityOracle::operator()(const Eigen::VectorXd& x) const {
  const auto e = raw(x);
  return {e.above, e.below, e.se_above, e.se_below};
}

}  // namespace pq
