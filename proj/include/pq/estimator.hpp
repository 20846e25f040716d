#pragma once

// Plug-in estimators computed from a sample by direct comparison counting.
// Everything here is O(n) per evaluation point.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pq/curve.hpp"
#include "pq/order.hpp"

namespace pq {

class Sample {
 public:
  /// Observations are rows. Throws on n = 0 or points outside the order's space.
  Sample(Eigen::MatrixXd observations, PartialOrder order, std::string source = {});

  const Eigen::MatrixXd& observations() const noexcept { return obs_; }
  const PartialOrder& order() const noexcept { return order_; }
  const std::string& source() const noexcept { return source_; }
  Index size() const noexcept { return obs_.rows(); }
  Index dimension() const noexcept { return obs_.cols(); }

 private:
  Eigen::MatrixXd obs_;
  PartialOrder order_;
  std::string source_;
};

struct ComparisonCounts {
  Index below = 0;       ///< #{i : X_i ⪯ x}
  Index above = 0;       ///< #{i : X_i ⪰ x}
  Index comparable = 0;  ///< #{i : X_i ∈ C(x)}
};

/// Per-sample comparison engine. Orthant orders get a tight row-major loop,
/// DAG samples compare node codes, score orders compare precomputed scores.
class ComparisonKernel {
 public:
  explicit ComparisonKernel(const Sample& sample);

  ComparisonCounts count(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// le[i] = X_i ⪯ x, ge[i] = X_i ⪰ x.
  void indicators(const Eigen::Ref<const Eigen::VectorXd>& x, std::vector<char>& le,
                  std::vector<char>& ge) const;

 private:
  enum class Mode { Orthant, Dag, Score, Generic };
  template <typename F>
  void visit(const Eigen::Ref<const Eigen::VectorXd>& x, F&& f) const;

  const Sample* sample_;
  Mode mode_;
  std::vector<double> rows_;    // Orthant: row-major copy
  std::vector<Index> codes_;    // Dag
  std::vector<double> scores_;  // Score
};

ComparisonCounts count_comparisons(const Sample& sample, const Eigen::Ref<const Eigen::VectorXd>& x);

struct IndexEstimate {
  Eigen::VectorXd x;
  std::optional<double> tau_hat;  ///< empty when no observation compares with x
  double p_hat = 0.0;
  std::optional<double> se_tau;   ///< √(τ̂(1−τ̂)/(n p̂))
  ComparisonCounts counts;
  Index n = 0;
};

IndexEstimate estimate_index(const Sample& sample, const Eigen::Ref<const Eigen::VectorXd>& x);

/// One estimate per row of `grid`. Throws GridEmpty.
std::vector<IndexEstimate> estimate_index_field(const Sample& sample, const Eigen::MatrixXd& grid);

/// 2d/n for conic orders, 0 on finite spaces, √(log n / n) otherwise.
double default_slack(const Sample& sample);

struct CandidateStrategy {
  enum class Kind { SamplePoints, SamplePlusLattice, UserGrid };
  Kind kind = Kind::SamplePoints;
  Eigen::MatrixXd grid;       ///< UserGrid rows
  Index neighbours = 3;       ///< SamplePlusLattice: nearest neighbours per observation

  static CandidateStrategy sample_points() { return {}; }
  static CandidateStrategy sample_plus_lattice(Index neighbours = 3) {
    return {Kind::SamplePlusLattice, {}, neighbours};
  }
  static CandidateStrategy user_grid(Eigen::MatrixXd grid) { return {Kind::UserGrid, std::move(grid), 3}; }
};

const char* to_string(CandidateStrategy::Kind kind) noexcept;

/// Distinct candidate points, lexicographically sorted, one per row.
Eigen::MatrixXd candidate_points(const Sample& sample, const CandidateStrategy& strategy);

struct PointEstimate {
  double tau = 0.0;
  Eigen::VectorXd x_hat;
  double p_hat = 0.0;
  /// τ̂ at x̂; NaN when p̂ = 0.
  double tau_hat_at_x = 0.0;
  double epsilon_n = 0.0;
  bool feasible = false;
  /// Sum of the two constraint shortfalls on the probability scale; 0 when feasible.
  double violation = 0.0;
  ComparisonCounts counts;
  Index n = 0;

  /// τ̂_{x̂} − τ, reported so a bias correction can be applied downstream.
  double bias() const { return tau_hat_at_x - tau; }
};

/// Maximizes p̂ over feasible candidates; ties go to smaller |τ̂ − τ|, then to
/// the lexicographically smallest point.
PointEstimate estimate_point(const Sample& sample, double tau,
                             const CandidateStrategy& candidates = {},
                             std::optional<double> epsilon_n = std::nullopt);

/// Same as estimate_point over a grid of levels, sharing one pass of counts.
std::vector<PointEstimate> estimate_points(const Sample& sample, const std::vector<double>& tau_grid,
                                           const CandidateStrategy& candidates = {},
                                           std::optional<double> epsilon_n = std::nullopt);

/// Curve record of a list of point estimates.
QuantileCurve curve_from_estimates(const std::vector<PointEstimate>& estimates, const PartialOrder& order);

QuantileCurve estimate_curve(const Sample& sample, const std::vector<double>& tau_grid,
                             const CandidateStrategy& candidates = {},
                             std::optional<double> epsilon_n = std::nullopt);

struct ComparabilityEstimate {
  double value = 0.0;     ///< ℘̂ = min over the grid of p̂_τ
  double tau_star = 0.0;  ///< smallest minimizing level
  /// √(p(1−p)/n) at the minimizer. Only meaningful when the minimizer is unique.
  double se = 0.0;
  std::vector<PointEstimate> points;
};

ComparabilityEstimate estimate_comparability(const Sample& sample, const std::vector<double>& tau_grid,
                                             const CandidateStrategy& candidates = {},
                                             std::optional<double> epsilon_n = std::nullopt);

struct InfluenceValues {
  double tau;  ///< (1{y⪯x} − τ_x 1{y∈C(x)}) / p_x
  double p;    ///< 1{y∈C(x)} − p_x
};

InfluenceValues influence(const PartialOrder& order, const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y, double tau_x, double p_x);

/// Plug-in asymptotic covariance of √n(τ̂_z, τ̂_y).
double index_se_covariance(const Sample& sample, const Eigen::Ref<const Eigen::VectorXd>& z,
                           const Eigen::Ref<const Eigen::VectorXd>& y);

/// Throws TauOutOfRange / InvalidArgument unless strictly increasing inside (0,1).
void check_tau_grid(const std::vector<double>& tau_grid);

}  // namespace pq
