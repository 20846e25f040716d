#include "pq/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pq {

namespace {

bool lex_less(const Eigen::MatrixXd& m, Index a, Index b) {
  for (Index j = 0; j < m.cols(); ++j) {
    if (m(a, j) < m(b, j)) return true;
    if (m(b, j) < m(a, j)) return false;
  }
  return false;
}

Eigen::MatrixXd sorted_unique_rows(const Eigen::MatrixXd& m) {
  std::vector<Index> idx(static_cast<std::size_t>(m.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::sort(idx.begin(), idx.end(), [&](Index a, Index b) { return lex_less(m, a, b); });
  auto last = std::unique(idx.begin(), idx.end(), [&](Index a, Index b) {
    return !lex_less(m, a, b) && !lex_less(m, b, a);
  });
  idx.erase(last, idx.end());
  Eigen::MatrixXd out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Index>(k)) = m.row(idx[k]);
  return out;
}

/// Constraint slack in count units; absorbs rounding in (1−τ)·comp.
constexpr double kCountTolerance = 1e-9;

struct Scored {
  Index candidate = -1;
  bool feasible = false;
  double violation = std::numeric_limits<double>::infinity();
  Index comparable = -1;
  double distance = std::numeric_limits<double>::infinity();
};

PointEstimate select_point(const Sample& sample, const Eigen::MatrixXd& candidates,
                           const std::vector<ComparisonCounts>& table, double tau, double eps) {
  const auto n = static_cast<double>(sample.size());
  Scored best;
  for (Index c = 0; c < candidates.rows(); ++c) {
    const auto& k = table[static_cast<std::size_t>(c)];
    const auto comp = static_cast<double>(k.comparable);
    const double need_above = (1.0 - tau) * comp - n * eps;
    const double need_below = tau * comp - n * eps;
    const double short_above = std::max(0.0, need_above - static_cast<double>(k.above) - kCountTolerance);
    const double short_below = std::max(0.0, need_below - static_cast<double>(k.below) - kCountTolerance);
    const bool feasible = short_above == 0.0 && short_below == 0.0;
    const double violation = (short_above + short_below) / n;
    const double distance =
        k.comparable > 0 ? std::abs(static_cast<double>(k.below) / comp - tau) : std::numeric_limits<double>::infinity();

    bool better = false;
    if (best.candidate < 0) {
      better = true;
    } else if (feasible != best.feasible) {
      better = feasible;
    } else if (feasible) {
      better = k.comparable > best.comparable || (k.comparable == best.comparable && distance < best.distance);
    } else {
      better = violation < best.violation ||
               (violation == best.violation && (k.comparable > best.comparable ||
                                                (k.comparable == best.comparable && distance < best.distance)));
    }
    if (better) best = {c, feasible, violation, k.comparable, distance};
  }

  const auto& k = table[static_cast<std::size_t>(best.candidate)];
  PointEstimate out;
  out.tau = tau;
  out.x_hat = candidates.row(best.candidate).transpose();
  out.p_hat = static_cast<double>(k.comparable) / n;
  out.tau_hat_at_x = k.comparable > 0 ? static_cast<double>(k.below) / static_cast<double>(k.comparable)
                                      : std::numeric_limits<double>::quiet_NaN();
  out.epsilon_n = eps;
  out.feasible = best.feasible;
  out.violation = best.feasible ? 0.0 : best.violation;
  out.counts = k;
  out.n = sample.size();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Sample::Sample(Eigen::MatrixXd observations, PartialOrder order, std::string source)
    : obs_(std::move(observations)), order_(std::move(order)), source_(std::move(source)) {
  if (obs_.rows() < 1) throw Error(ErrorCode::InvalidArgument, "a sample needs at least one observation");
  if (obs_.cols() != order_.dimension())
    throw Error(ErrorCode::DimensionMismatch, "observations have " + std::to_string(obs_.cols()) +
                                                  " columns, order expects " + std::to_string(order_.dimension()));
  for (Index i = 0; i < obs_.rows(); ++i) order_.check_point(obs_.row(i).transpose());
}

ComparisonKernel::ComparisonKernel(const Sample& sample) : sample_(&sample), mode_(Mode::Generic) {
  const auto& obs = sample.observations();
  const auto& order = sample.order();
  const Index n = obs.rows();
  const Index d = obs.cols();
  if (order.is_orthant()) {
    mode_ = Mode::Orthant;
    rows_.resize(static_cast<std::size_t>(n * d));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) rows_[static_cast<std::size_t>(i * d + j)] = obs(i, j);
  } else if (order.dag()) {
    mode_ = Mode::Dag;
    codes_.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) codes_[static_cast<std::size_t>(i)] = static_cast<Index>(obs(i, 0));
  } else if (const auto* c = order.complete()) {
    mode_ = Mode::Score;
    scores_.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) scores_[static_cast<std::size_t>(i)] = c->score(obs.row(i).transpose());
  }
}

template <typename F>
void ComparisonKernel::visit(const Eigen::Ref<const Eigen::VectorXd>& x, F&& f) const {
  const auto& order = sample_->order();
  const Index n = sample_->size();
  switch (mode_) {
    case Mode::Orthant: {
      const Index d = sample_->dimension();
      if (x.size() != d) throw Error(ErrorCode::DimensionMismatch, "evaluation point dimension");
      const double* row = rows_.data();
      for (Index i = 0; i < n; ++i, row += d) {
        bool le = true;
        bool ge = true;
        for (Index j = 0; j < d; ++j) {
          le &= row[j] <= x[j];
          ge &= row[j] >= x[j];
        }
        f(i, le, ge);
      }
      break;
    }
    case Mode::Dag: {
      order.check_point(x);
      const DagOrder& dag = *order.dag();
      const auto node = static_cast<Index>(x[0]);
      for (Index i = 0; i < n; ++i) {
        const Index y = codes_[static_cast<std::size_t>(i)];
        f(i, dag.precedes_or_equal(y, node), dag.precedes_or_equal(node, y));
      }
      break;
    }
    case Mode::Score: {
      order.check_point(x);
      const double s = order.complete()->score(x);
      for (Index i = 0; i < n; ++i) {
        const double si = scores_[static_cast<std::size_t>(i)];
        f(i, si <= s, si >= s);
      }
      break;
    }
    case Mode::Generic: {
      order.check_point(x);
      const auto& obs = sample_->observations();
      for (Index i = 0; i < n; ++i) {
        const Comparison c = order.compare(obs.row(i).transpose(), x);
        f(i, c == Comparison::Precedes || c == Comparison::Equal,
          c == Comparison::Succeeds || c == Comparison::Equal);
      }
      break;
    }
  }
}

ComparisonCounts ComparisonKernel::count(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Index below = 0;
  Index above = 0;
  Index comp = 0;
  visit(x, [&](Index, bool le, bool ge) {
    below += le;
    above += ge;
    comp += le || ge;
  });
  return {below, above, comp};
}

void ComparisonKernel::indicators(const Eigen::Ref<const Eigen::VectorXd>& x, std::vector<char>& le,
                                  std::vector<char>& ge) const {
  le.assign(static_cast<std::size_t>(sample_->size()), 0);
  ge.assign(static_cast<std::size_t>(sample_->size()), 0);
  visit(x, [&](Index i, bool l, bool g) {
    le[static_cast<std::size_t>(i)] = l;
    ge[static_cast<std::size_t>(i)] = g;
  });
}

ComparisonCounts count_comparisons(const Sample& sample, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return ComparisonKernel(sample).count(x);
}

namespace {

IndexEstimate make_index_estimate(const Eigen::Ref<const Eigen::VectorXd>& x, ComparisonCounts k, Index n) {
  IndexEstimate e;
  e.x = x;
  e.counts = k;
  e.n = n;
  e.p_hat = static_cast<double>(k.comparable) / static_cast<double>(n);
  if (k.comparable > 0) {
    const double t = static_cast<double>(k.below) / static_cast<double>(k.comparable);
    e.tau_hat = t;
    e.se_tau = std::sqrt(t * (1.0 - t) / static_cast<double>(k.comparable));
  }
  return e;
}

}  // namespace

IndexEstimate estimate_index(const Sample& sample, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return make_index_estimate(x, count_comparisons(sample, x), sample.size());
}

std::vector<IndexEstimate> estimate_index_field(const Sample& sample, const Eigen::MatrixXd& grid) {
  if (grid.rows() == 0) throw Error(ErrorCode::GridEmpty, "evaluation grid is empty");
  if (grid.cols() != sample.dimension()) throw Error(ErrorCode::DimensionMismatch, "grid dimension");
  const ComparisonKernel kernel(sample);
  std::vector<IndexEstimate> out(static_cast<std::size_t>(grid.rows()));
#pragma omp parallel for schedule(static)
  for (Index g = 0; g < grid.rows(); ++g) {
    const Eigen::VectorXd x = grid.row(g).transpose();
    out[static_cast<std::size_t>(g)] = make_index_estimate(x, kernel.count(x), sample.size());
  }
  return out;
}

double default_slack(const Sample& sample) {
  const auto n = static_cast<double>(sample.size());
  const auto& order = sample.order();
  if (order.conic()) return 2.0 * static_cast<double>(order.dimension()) / n;
  if (order.dag()) return 0.0;
  return std::sqrt(std::log(n) / n);
}

const char* to_string(CandidateStrategy::Kind kind) noexcept {
  switch (kind) {
    case CandidateStrategy::Kind::SamplePoints: return "sample-points";
    case CandidateStrategy::Kind::SamplePlusLattice: return "sample-plus-lattice";
    case CandidateStrategy::Kind::UserGrid: return "user-grid";
  }
  return "?";
}

Eigen::MatrixXd candidate_points(const Sample& sample, const CandidateStrategy& strategy) {
  const auto& obs = sample.observations();
  switch (strategy.kind) {
    case CandidateStrategy::Kind::SamplePoints:
      return sorted_unique_rows(obs);

    case CandidateStrategy::Kind::UserGrid: {
      if (strategy.grid.rows() == 0) throw Error(ErrorCode::EmptyCandidateSet, "user grid has no points");
      if (strategy.grid.cols() != sample.dimension())
        throw Error(ErrorCode::DimensionMismatch, "user grid dimension");
      for (Index i = 0; i < strategy.grid.rows(); ++i) sample.order().check_point(strategy.grid.row(i).transpose());
      return sorted_unique_rows(strategy.grid);
    }

    case CandidateStrategy::Kind::SamplePlusLattice: {
      if (!sample.order().is_orthant())
        throw Error(ErrorCode::NotALattice, "lattice candidates need the componentwise order");
      const Index n = obs.rows();
      const Index k = std::min<Index>(std::max<Index>(strategy.neighbours, 0), n - 1);
      Eigen::MatrixXd all(n * (1 + 2 * k), obs.cols());
      all.topRows(n) = obs;
#pragma omp parallel for schedule(static)
      for (Index i = 0; i < n; ++i) {
        std::vector<std::pair<double, Index>> dist;
        dist.reserve(static_cast<std::size_t>(n - 1));
        for (Index j = 0; j < n; ++j)
          if (j != i) dist.emplace_back((obs.row(i) - obs.row(j)).squaredNorm(), j);
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        for (Index m = 0; m < k; ++m) {
          const Index j = dist[static_cast<std::size_t>(m)].second;
          all.row(n + 2 * (i * k + m)) = obs.row(i).cwiseMin(obs.row(j));
          all.row(n + 2 * (i * k + m) + 1) = obs.row(i).cwiseMax(obs.row(j));
        }
      }
      return sorted_unique_rows(all);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown candidate strategy");
}

void check_tau_grid(const std::vector<double>& tau_grid) {
  if (tau_grid.empty()) throw Error(ErrorCode::GridEmpty, "tau grid is empty");
  for (std::size_t k = 0; k < tau_grid.size(); ++k) {
    if (!(tau_grid[k] > 0.0 && tau_grid[k] < 1.0))
      throw Error(ErrorCode::TauOutOfRange, "quantile levels must lie in (0,1)");
    if (k > 0 && !(tau_grid[k] > tau_grid[k - 1]))
      throw Error(ErrorCode::InvalidArgument, "tau grid must be strictly increasing");
  }
}

std::vector<PointEstimate> estimate_points(const Sample& sample, const std::vector<double>& tau_grid,
                                           const CandidateStrategy& candidates,
                                           std::optional<double> epsilon_n) {
  check_tau_grid(tau_grid);
  const double eps = epsilon_n.value_or(default_slack(sample));
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "slack must be nonnegative");
  const Eigen::MatrixXd points = candidate_points(sample, candidates);
  if (points.rows() == 0) throw Error(ErrorCode::EmptyCandidateSet, "no candidate points");

  const ComparisonKernel kernel(sample);
  std::vector<ComparisonCounts> table(static_cast<std::size_t>(points.rows()));
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < points.rows(); ++c)
    table[static_cast<std::size_t>(c)] = kernel.count(points.row(c).transpose());

  std::vector<PointEstimate> out;
  out.reserve(tau_grid.size());
  for (double tau : tau_grid) out.push_back(select_point(sample, points, table, tau, eps));
  return out;
}

PointEstimate estimate_point(const Sample& sample, double tau, const CandidateStrategy& candidates,
                             std::optional<double> epsilon_n) {
  return estimate_points(sample, {tau}, candidates, epsilon_n).front();
}

QuantileCurve curve_from_estimates(const std::vector<PointEstimate>& estimates, const PartialOrder& order) {
  if (estimates.empty()) throw Error(ErrorCode::GridEmpty, "no estimates");
  QuantileCurve curve;
  curve.points.resize(static_cast<Index>(estimates.size()), estimates.front().x_hat.size());
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    curve.tau_grid.push_back(estimates[k].tau);
    curve.points.row(static_cast<Index>(k)) = estimates[k].x_hat.transpose();
    curve.p_values.push_back(estimates[k].p_hat);
  }
  curve.monotone_flag = is_partial_monotone(curve, order);
  return curve;
}

QuantileCurve estimate_curve(const Sample& sample, const std::vector<double>& tau_grid,
                             const CandidateStrategy& candidates, std::optional<double> epsilon_n) {
  return curve_from_estimates(estimate_points(sample, tau_grid, candidates, epsilon_n), sample.order());
}

ComparabilityEstimate estimate_comparability(const Sample& sample, const std::vector<double>& tau_grid,
                                             const CandidateStrategy& candidates,
                                             std::optional<double> epsilon_n) {
  ComparabilityEstimate out;
  out.points = estimate_points(sample, tau_grid, candidates, epsilon_n);
  std::size_t arg = 0;
  for (std::size_t k = 1; k < out.points.size(); ++k)
    if (out.points[k].p_hat < out.points[arg].p_hat) arg = k;
  out.value = out.points[arg].p_hat;
  out.tau_star = out.points[arg].tau;
  out.se = std::sqrt(out.value * (1.0 - out.value) / static_cast<double>(sample.size()));
  return out;
}

InfluenceValues influence(const PartialOrder& order, const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y, double tau_x, double p_x) {
  const Comparison c = order.compare(y, x);
  const double le = (c == Comparison::Precedes || c == Comparison::Equal) ? 1.0 : 0.0;
  const double comp = c == Comparison::Incomparable ? 0.0 : 1.0;
  if (!(p_x > 0.0)) throw Error(ErrorCode::ZeroComparability, "influence of τ needs p_x > 0");
  return {(le - tau_x * comp) / p_x, comp - p_x};
}

double index_se_covariance(const Sample& sample, const Eigen::Ref<const Eigen::VectorXd>& z,
                           const Eigen::Ref<const Eigen::VectorXd>& y) {
  const ComparisonKernel kernel(sample);
  std::vector<char> lz, gz, ly, gy;
  kernel.indicators(z, lz, gz);
  kernel.indicators(y, ly, gy);

  double below_z = 0, below_y = 0, comp_z = 0, comp_y = 0;
  double below_both = 0, comp_both = 0, comp_z_below_y = 0, below_z_comp_y = 0;
  for (std::size_t i = 0; i < lz.size(); ++i) {
    const bool cz = lz[i] || gz[i];
    const bool cy = ly[i] || gy[i];
    below_z += lz[i];
    below_y += ly[i];
    comp_z += cz;
    comp_y += cy;
    below_both += lz[i] && ly[i];
    comp_both += cz && cy;
    comp_z_below_y += cz && ly[i];
    below_z_comp_y += lz[i] && cy;
  }
  if (comp_z == 0 || comp_y == 0)
    throw Error(ErrorCode::ZeroComparability, "covariance needs both points comparable to some observation");
  // τ̂ = 0 at either point makes its influence vanish identically.
  if (below_z == 0 || below_y == 0) return 0.0;

  const auto n = static_cast<double>(sample.size());
  const double tz = below_z / comp_z;
  const double ty = below_y / comp_y;
  // Counts in place of probabilities: each ratio below has matching powers of n.
  const double bracket = below_both * n / (below_z * below_y) + comp_both * n / (comp_z * comp_y) -
                         comp_z_below_y * n / (comp_z * below_y) - below_z_comp_y * n / (below_z * comp_y);
  return tz * ty * bracket;
}

}  // namespace pq
