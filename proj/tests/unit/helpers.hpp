#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "pq/random.hpp"

namespace pq::testing {

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Eigen::MatrixXd uniform_points(Eigen::Index n, Eigen::Index d, Rng& rng) {
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = uniform01(rng);
  return m;
}

/// Integer lattice points, so ties and equal coordinates show up often.
inline Eigen::MatrixXd lattice_points(Eigen::Index n, Eigen::Index d, int levels, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, levels - 1);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = pick(rng);
  return m;
}

inline double square_tau(double x1, double x2) {
  const double below = x1 * x2;
  const double above = (1 - x1) * (1 - x2);
  return below / (below + above);
}

inline double square_p(double x1, double x2) { return x1 * x2 + (1 - x1) * (1 - x2); }

}  // namespace pq::testing
