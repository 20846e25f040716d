#pragma once

#include <vector>

#include <Eigen/Dense>

#include "pq/order.hpp"

namespace pq {

/// Quantile points along a grid of levels, one row of `points` per level.
struct QuantileCurve {
  std::vector<double> tau_grid;
  Eigen::MatrixXd points;
  std::vector<double> p_values;
  bool monotone_flag = true;

  Index size() const { return static_cast<Index>(tau_grid.size()); }
  Index dimension() const { return points.cols(); }
  /// Throws if the grid is not strictly increasing or the shapes disagree.
  void validate() const;
};

/// True when consecutive points never step down: point(k+1) ⪰ point(k).
/// Enough for transitive orders.
bool is_partial_monotone(const QuantileCurve& curve, const PartialOrder& order);

}  // namespace pq
