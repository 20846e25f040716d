#include "pq/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Keeps continuous closed forms away from the open-interval boundary.
constexpr double kTauClamp = 1e-12;

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto k = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

/// p_τ on a finite model for any τ in [0,1], from a precomputed atom table.
class FiniteLevels {
 public:
  explicit FiniteLevels(const FiniteModel& m)
      : table_(finite_exact_quantiles(m.distribution, m.order, std::vector<double>{})) {}

  double p_tau(double tau) const {
    double best = kNaN;
    for (const auto& a : table_.atoms) {
      if (!(a.comparable > 0.0)) continue;
      const double slack = 1e-12 * a.comparable;
      if (a.above + slack >= (1.0 - tau) * a.comparable && a.below + slack >= tau * a.comparable)
        if (std::isnan(best) || a.comparable > best) best = a.comparable;
    }
    return best;
  }

  const FiniteQuantileTable<double>& table() const { return table_; }

 private:
  FiniteQuantileTable<double> table_;
};

double model_p_tau(const PopulationModel& model, double tau) {
  return partial_quantile(model, std::clamp(tau, kTauClamp, 1.0 - kTauClamp)).p_tau;
}

double model_mass_density(const PopulationModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (model.has_density()) return model.density(x);
  if (const auto* c = model.as<CompleteOrderScore>(); c && c->weights.size() == 1) {
    const double w = c->weights[0];
    return c->score_law.density(w * x[0]) * std::abs(w);
  }
  return kNaN;
}

double weighted_coverage(const IndexTable& t, double theta, double eta) {
  double total = 0.0;
  for (std::size_t i = 0; i < t.tau.size(); ++i)
    if (region_member(t.tau[i], t.p[i], t.p_tau_at[i], theta, eta)) total += t.weight[i];
  return total;
}

void check_levels(double theta, double eta) {
  if (!(theta >= 0.0 && theta <= 1.0) || !(eta >= 0.0 && eta <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "theta and eta must lie in [0,1]");
}

}  // namespace

EvaluationGrid tensor_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                           const std::vector<Index>& counts) {
  const Index d = lower.size();
  if (upper.size() != d || static_cast<Index>(counts.size()) != d)
    throw Error(ErrorCode::DimensionMismatch, "grid bounds and counts disagree");
  Index total = 1;
  for (Index j = 0; j < d; ++j) {
    if (counts[static_cast<std::size_t>(j)] < 1) throw Error(ErrorCode::GridEmpty, "axis with no points");
    if (!(upper[j] >= lower[j])) throw Error(ErrorCode::InvalidArgument, "grid upper bound below lower bound");
    total *= counts[static_cast<std::size_t>(j)];
  }

  std::vector<std::vector<double>> axes(static_cast<std::size_t>(d));
  std::vector<std::vector<double>> widths(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    const Index m = counts[static_cast<std::size_t>(j)];
    auto& ax = axes[static_cast<std::size_t>(j)];
    auto& w = widths[static_cast<std::size_t>(j)];
    if (m == 1) {
      ax = {0.5 * (lower[j] + upper[j])};
      w = {upper[j] - lower[j]};
      continue;
    }
    const double h = (upper[j] - lower[j]) / static_cast<double>(m - 1);
    for (Index k = 0; k < m; ++k) {
      ax.push_back(k + 1 == m ? upper[j] : lower[j] + h * static_cast<double>(k));
      w.push_back(k == 0 || k + 1 == m ? 0.5 * h : h);
    }
  }

  EvaluationGrid g;
  g.shape = counts;
  g.points.resize(total, d);
  g.volumes.resize(static_cast<std::size_t>(total));
  std::vector<Index> idx(static_cast<std::size_t>(d), 0);
  for (Index r = 0; r < total; ++r) {
    double vol = 1.0;
    for (Index j = 0; j < d; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      g.points(r, j) = axes[jj][static_cast<std::size_t>(idx[jj])];
      vol *= widths[jj][static_cast<std::size_t>(idx[jj])];
    }
    g.volumes[static_cast<std::size_t>(r)] = vol;
    for (Index j = d - 1; j >= 0; --j) {
      auto& i = idx[static_cast<std::size_t>(j)];
      if (++i < counts[static_cast<std::size_t>(j)]) break;
      i = 0;
    }
  }
  return g;
}

EvaluationGrid point_grid(Eigen::MatrixXd points) {
  if (points.rows() == 0) throw Error(ErrorCode::GridEmpty, "no evaluation points");
  EvaluationGrid g;
  g.points = std::move(points);
  return g;
}

Index Region::count() const {
  return static_cast<Index>(std::count(membership.begin(), membership.end(), char{1}));
}

bool region_member(double tau, double p, double p_tau_at, double theta, double eta) {
  if (std::isnan(tau)) return theta >= 1.0 && eta >= 1.0;
  const double half = 0.5 * (1.0 - theta);
  if (tau < half - kRegionTolerance || 1.0 - tau < half - kRegionTolerance) return false;
  if (std::isnan(p_tau_at)) return true;
  return p >= (1.0 - eta) * p_tau_at - kRegionTolerance;
}

std::vector<double> RegionEvaluator::default_tau_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 99; ++k) g.push_back(k / 100.0);
  return g;
}

RegionEvaluator RegionEvaluator::from_model(const PopulationModel& model, EvaluationGrid grid) {
  if (grid.size() == 0) throw Error(ErrorCode::GridEmpty, "no evaluation points");
  RegionEvaluator ev;
  ev.grid_ = std::move(grid);
  const auto n = static_cast<std::size_t>(ev.grid_.size());
  auto& t = ev.at_grid_;
  t.tau.assign(n, kNaN);
  t.p.assign(n, 0.0);
  t.p_tau_at.assign(n, kNaN);
  t.weight.assign(n, kNaN);

  std::optional<FiniteLevels> finite;
  if (const auto* f = model.as<FiniteModel>()) finite.emplace(*f);

  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd x = ev.grid_.points.row(static_cast<Index>(i)).transpose();
    const CdfPair c = cdf_pair(model, x);
    t.p[i] = c.comparable;
    if (c.tau) {
      t.tau[i] = *c.tau;
      t.p_tau_at[i] = finite ? finite->p_tau(*c.tau) : model_p_tau(model, *c.tau);
    }
    if (!finite && !ev.grid_.volumes.empty()) t.weight[i] = model_mass_density(model, x) * ev.grid_.volumes[i];
  }

  if (finite) {
    // Coverage sums atom masses over every node, whatever the grid holds.
    const auto& atoms = finite->table().atoms;
    auto& m = ev.at_mass_;
    for (const auto& a : atoms) {
      m.p.push_back(a.comparable);
      m.tau.push_back(a.tau ? *a.tau : kNaN);
      m.p_tau_at.push_back(a.tau ? finite->p_tau(*a.tau) : kNaN);
      m.weight.push_back(a.mass);
    }
  } else {
    ev.at_mass_ = t;
  }
  return ev;
}

RegionEvaluator RegionEvaluator::from_sample(const Sample& sample, EvaluationGrid grid,
                                             const std::vector<double>& tau_grid,
                                             const CandidateStrategy& candidates) {
  if (grid.size() == 0) throw Error(ErrorCode::GridEmpty, "no evaluation points");
  RegionEvaluator ev;
  ev.grid_ = std::move(grid);

  const auto estimates = estimate_points(sample, tau_grid, candidates);
  std::vector<double> p_curve;
  for (const auto& e : estimates) p_curve.push_back(e.p_hat);

  auto fill = [&](const Eigen::MatrixXd& pts, double weight) {
    IndexTable t;
    const auto field = estimate_index_field(sample, pts);
    for (const auto& e : field) {
      t.p.push_back(e.p_hat);
      t.tau.push_back(e.tau_hat ? *e.tau_hat : kNaN);
      t.p_tau_at.push_back(e.tau_hat ? interpolate(tau_grid, p_curve, *e.tau_hat) : kNaN);
      t.weight.push_back(weight);
    }
    return t;
  };
  ev.at_grid_ = fill(ev.grid_.points, kNaN);
  ev.at_mass_ = fill(sample.observations(), 1.0 / static_cast<double>(sample.size()));
  return ev;
}

double RegionEvaluator::coverage(double theta, double eta) const {
  check_levels(theta, eta);
  return weighted_coverage(at_mass_, theta, eta);
}

Region RegionEvaluator::region(double theta, double eta) const {
  check_levels(theta, eta);
  Region r;
  r.theta = theta;
  r.eta = eta;
  r.grid = grid_;
  r.membership.resize(at_grid_.tau.size());
  for (std::size_t i = 0; i < at_grid_.tau.size(); ++i)
    r.membership[i] = region_member(at_grid_.tau[i], at_grid_.p[i], at_grid_.p_tau_at[i], theta, eta);
  r.coverage_hat = weighted_coverage(at_mass_, theta, eta);
  return r;
}

Region region(const PopulationModel& model, double theta, double eta, const EvaluationGrid& grid) {
  return RegionEvaluator::from_model(model, grid).region(theta, eta);
}

Region region(const Sample& sample, double theta, double eta, const EvaluationGrid& grid) {
  return RegionEvaluator::from_sample(sample, grid).region(theta, eta);
}

CalibratedRegion calibrate_kappa(const RegionEvaluator& evaluator, double kappa, const LevelMap& g) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw Error(ErrorCode::InvalidArgument, "kappa must lie in [0,1]");
  constexpr int kProbe = 100;
  double previous = g(0.0);
  if (std::abs(previous) > 1e-12 || std::abs(g(1.0) - 1.0) > 1e-12)
    throw Error(ErrorCode::NotNondecreasing, "level map must send 0 to 0 and 1 to 1");
  for (int k = 1; k <= kProbe; ++k) {
    const double v = g(static_cast<double>(k) / kProbe);
    if (!(v >= previous) || v > 1.0) throw Error(ErrorCode::NotNondecreasing, "level map decreases on the probe grid");
    previous = v;
  }

  auto level = [&](double theta) { return std::clamp(g(theta), 0.0, 1.0); };
  if (kappa == 0.0 || evaluator.coverage(0.0, level(0.0)) >= kappa)
    return {0.0, evaluator.region(0.0, level(0.0))};

  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    if (evaluator.coverage(mid, level(mid)) >= kappa)
      hi = mid;
    else
      lo = mid;
  }
  return {hi, evaluator.region(hi, level(hi))};
}

}  // namespace pq
