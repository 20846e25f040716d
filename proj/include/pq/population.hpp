#pragma once

// Closed-form population partial quantiles for analytically tractable laws.
// These are the ground truth the estimators and the solver are checked against.

#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pq/finite.hpp"
#include "pq/marginal.hpp"
#include "pq/order.hpp"
#include "pq/random.hpp"

namespace pq {

/// Uniform on [0,1]^2, componentwise order.
struct UniformUnitSquare {};
/// Uniform on (-1,1)x(1,3) ∪ (1,3)x(-1,1): two squares invisible to each other.
struct TwoSquaresDisjoint {};
/// Uniform on [0,1]^2 ∪ [1,2]^2: squares stacked along the order.
struct TwoSquaresAligned {};
/// Independent continuous components, componentwise order.
struct IndependentProduct {
  std::vector<Marginal> marginals;
};
/// Random interval [min(U1,U2), max(U1,U2)] under inclusion; points are (a, b).
struct IntervalCovering {};
/// Complete order through the linear score u(x) = w'x with u(X) ~ score_law.
struct CompleteOrderScore {
  Eigen::VectorXd weights;
  Marginal score_law;
};
/// Uniform on the probability simplex in R^d: no two support points compare.
struct UniformSimplex {
  Index dimension;
};
/// Finite law on the nodes of a DAG-type relation.
struct FiniteModel {
  FiniteDistribution<double> distribution;
  PartialOrder order;
};

class PopulationModel {
 public:
  using Repr = std::variant<UniformUnitSquare, TwoSquaresDisjoint, TwoSquaresAligned,
                            IndependentProduct, IntervalCovering, CompleteOrderScore,
                            UniformSimplex, FiniteModel>;

  PopulationModel(Repr repr);  // NOLINT(google-explicit-constructor)
  template <typename T, std::enable_if_t<!std::is_same_v<std::decay_t<T>, Repr> &&
                                             !std::is_same_v<std::decay_t<T>, PopulationModel> &&
                                             std::is_constructible_v<Repr, T&&>,
                                         int> = 0>
  PopulationModel(T&& model)  // NOLINT(google-explicit-constructor)
      : PopulationModel(Repr(std::forward<T>(model))) {}

  const Repr& repr() const noexcept { return repr_; }
  template <typename T>
  const T* as() const noexcept {
    return std::get_if<T>(&repr_);
  }

  /// Stable identifier used by configs and JSON output, e.g. "unit-square".
  std::string name() const;
  Index dimension() const;
  /// The order the model's closed forms refer to.
  PartialOrder order() const;

  bool has_sampler() const noexcept;
  /// n draws, one per row. Finite models emit node codes. Throws NoSampler.
  Eigen::MatrixXd sample(Index n, Rng& rng) const;

  bool has_density() const noexcept;
  double density(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Box containing the support (or all but a negligible tail of it).
  Eigen::VectorXd support_lower() const;
  Eigen::VectorXd support_upper() const;

 private:
  Repr repr_;
};

struct CdfPair {
  double below;       ///< P(X ⪯ x)
  double above;       ///< P(X ⪰ x)
  double comparable;  ///< p_x
  std::optional<double> tau;  ///< τ_x, empty when p_x = 0
};

CdfPair cdf_pair(const PopulationModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

struct PartialQuantileResult {
  double tau;
  /// All known maximizers; several for non-unique models.
  std::vector<Eigen::VectorXd> points;
  double p_tau;
  /// Node labels parallel to `points` for finite models.
  std::vector<std::string> labels;
  /// Q(τ) is empty (finite non-transitive relations).
  bool empty = false;
  /// Every support point qualifies (simplex convention when p_x = 0 throughout).
  bool whole_support = false;
};

PartialQuantileResult partial_quantile(const PopulationModel& model, double tau);

struct ComparabilityResult {
  double value;     ///< ℘
  double tau_star;  ///< a minimizing level (smallest if several)
  bool analytic;
};

/// Grid fallback scans τ in (0,1) with this step.
inline constexpr double kComparabilityGridStep = 1e-4;

ComparabilityResult comparability(const PopulationModel& model);

/// P(τ_X ≤ τ) for independent continuous components under the componentwise
/// order in dimension d; equals P(Z_1 + ... + Z_d ≤ log(τ/(1-τ))) with Z_j
/// standard logistic. Computed by Fourier inversion of the logistic
/// characteristic function (absolute error well below 1e-8).
double tau_index_law_cdf(Index d, double tau);

}  // namespace pq
