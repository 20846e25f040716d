#pragma once

// Dispersion regions R(θ,η): points whose index is within θ/2 of the median
// and whose comparability is at least a (1−η) fraction of the best one at
// their own level.

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "pq/estimator.hpp"
#include "pq/population.hpp"

namespace pq {

/// Evaluation points (rows) with optional cell volumes. Tensor grids list
/// points row-major: the first axis varies slowest.
struct EvaluationGrid {
  Eigen::MatrixXd points;
  std::vector<double> volumes;  ///< empty for plain point lists
  std::vector<Index> shape;     ///< axis sizes for tensor grids

  Index size() const { return points.rows(); }
};

/// counts[j] equally spaced points on [lower_j, upper_j], ends included. Each
/// point owns the part of its Voronoi cell inside the box.
EvaluationGrid tensor_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                           const std::vector<Index>& counts);
EvaluationGrid point_grid(Eigen::MatrixXd points);

struct Region {
  double theta = 0.0;
  double eta = 0.0;
  EvaluationGrid grid;
  std::vector<char> membership;  ///< parallel to grid rows
  double coverage_hat = 0.0;

  Index count() const;
};

/// Index values at a set of points, τ NaN where undefined, with the weight
/// each point carries in coverage sums.
struct IndexTable {
  std::vector<double> tau;
  std::vector<double> p;
  std::vector<double> p_tau_at;  ///< p_τ evaluated at τ = tau[i]
  std::vector<double> weight;
};

/// Membership tolerance on both inequalities.
inline constexpr double kRegionTolerance = 1e-12;

bool region_member(double tau, double p, double p_tau_at, double theta, double eta);

/// Precomputes everything a region needs, so membership at a new (θ, η) is a
/// linear scan.
class RegionEvaluator {
 public:
  /// Population values. Coverage uses cell mass (density times cell volume),
  /// or atom masses for finite models.
  static RegionEvaluator from_model(const PopulationModel& model, EvaluationGrid grid);

  /// Estimated values. p_τ comes from the estimated curve on `tau_grid`,
  /// linearly interpolated; coverage is the fraction of observations inside.
  static RegionEvaluator from_sample(const Sample& sample, EvaluationGrid grid,
                                     const std::vector<double>& tau_grid = default_tau_grid(),
                                     const CandidateStrategy& candidates = {});

  static std::vector<double> default_tau_grid();

  Region region(double theta, double eta) const;
  double coverage(double theta, double eta) const;

  const EvaluationGrid& grid() const { return grid_; }
  const IndexTable& grid_table() const { return at_grid_; }

 private:
  EvaluationGrid grid_;
  IndexTable at_grid_;
  IndexTable at_mass_;
};

Region region(const PopulationModel& model, double theta, double eta, const EvaluationGrid& grid);
Region region(const Sample& sample, double theta, double eta, const EvaluationGrid& grid);

using LevelMap = std::function<double(double)>;

struct CalibratedRegion {
  double theta_star;
  Region region;
};

/// Smallest θ (to 1e-3, by bisection) with coverage of R(θ, g(θ)) at least κ.
/// Throws NotNondecreasing unless g(0) = 0, g(1) = 1 and g is nondecreasing
/// on a probe grid.
CalibratedRegion calibrate_kappa(const RegionEvaluator& evaluator, double kappa,
                                 const LevelMap& g = [](double t) { return t; });

}  // namespace pq
