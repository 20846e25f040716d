#pragma once

// Partial quantile points of log-concave laws under cone orders, found by
// maximizing v over the convex body
//   H(p̄) = {(v,x) : log P(X⪰x) ≥ log(1−τ)+v, log P(X⪯x) ≥ log τ+v, log p̄ ≤ v ≤ 0}
// with hit-and-run simulated annealing.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pq/order.hpp"
#include "pq/population.hpp"
#include "pq/random.hpp"

namespace pq {

struct ProbabilityPair {
  double above;  ///< P(X ⪰ x)
  double below;  ///< P(X ⪯ x)
  double se_above = 0.0;
  double se_below = 0.0;
};

using DensityOracle = std::function<double(const Eigen::VectorXd&)>;
using ProbabilityOracle = std::function<ProbabilityPair(const Eigen::VectorXd&)>;

struct LogConcaveProblem {
  DensityOracle density;              ///< optional; not used by the walk itself
  PartialOrder cone = PartialOrder::orthant(1);
  double tau = 0.5;
  ProbabilityOracle probabilities;
  double oracle_relative_error = 0.0;  ///< declared ε₀ of the oracle
  double pbar = 0.1;
  double delta = 0.1;
  double epsilon = 0.05;
  /// Box searched for initial feasible points.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Index dimension() const { return lower.size(); }
  void validate() const;
};

/// Builds a problem from a bundled model with its closed-form probabilities.
LogConcaveProblem problem_from_model(const PopulationModel& model, double tau, double pbar,
                                     double epsilon = 0.05, double delta = 0.1);

/// Membership oracle for H(p̄). Points are z = (v, x).
class FeasibleSet {
 public:
  explicit FeasibleSet(const LogConcaveProblem& problem);

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& z) const;
  /// Largest v with (v, x) ∈ H ignoring the lower bound log p̄; −∞ when P = 0.
  double lift(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  Index dimension() const { return dimension_ + 1; }
  double log_pbar() const { return log_pbar_; }
  std::uint64_t oracle_calls() const { return calls_->load(); }

 private:
  const LogConcaveProblem* problem_;
  Index dimension_;
  double log_pbar_;
  double log_tau_;
  double log_one_minus_tau_;
  std::shared_ptr<std::atomic<std::uint64_t>> calls_;
};

/// The objective over H: maximize v, i.e. p = e^v.
struct Reformulation {
  FeasibleSet body;
  static constexpr const char* kObjective = "maximize v";
};
Reformulation reformulate(const LogConcaveProblem& problem);

using Membership = std::function<bool(const Eigen::VectorXd&)>;
/// Must be linear along lines (log-linear density), e.g. z ↦ a·v.
using LogDensity = std::function<double(const Eigen::VectorXd&)>;

/// One hit-and-run move: Gaussian direction with the given covariance, chord
/// end points by doubling and bisection to 1e-9, then an exact inverse-CDF
/// draw from the exponential restriction of the target to the chord.
/// Throws NotInBody when `current` is outside.
Eigen::VectorXd hit_and_run_step(const Eigen::VectorXd& current, const Eigen::MatrixXd& direction_cov,
                                 const Membership& membership, const LogDensity& target_log_density,
                                 Rng& rng);

/// Same, with the Cholesky factor of the direction covariance supplied.
Eigen::VectorXd hit_and_run_step_factored(const Eigen::VectorXd& current, const Eigen::MatrixXd& cov_factor,
                                          const Membership& membership, const LogDensity& target_log_density,
                                          Rng& rng);

struct SolverOptions {
  std::uint64_t seed = 0;
  Index chains = 0;       ///< 0: max(8, d⌈log d + 1⌉)
  Index walk_length = 0;  ///< steps per chain per phase; 0: 10 (d+1)^2
  Index init_budget = 100000;
  Index probe_points = 4096;  ///< total coarse-grid probe size
  Index max_phases = 200;
};

struct SolverResult {
  Eigen::VectorXd x;
  double v = 0.0;        ///< best lifted v
  double p_star = 0.0;   ///< e^v
  double p_x = 0.0;      ///< P(X⪯x) + P(X⪰x) at x
  double tau_x = 0.0;    ///< P(X⪯x) / p_x
  Index phases = 0;
  Index chains = 0;
  Index walk_length = 0;
  std::vector<double> best_v_trace;  ///< running best after each phase
  std::vector<double> temperature;   ///< a_i per phase
  std::uint64_t oracle_calls = 0;
  Index init_rejections = 0;
  Index init_from_probe = 0;
};

SolverResult anneal_optimize(const LogConcaveProblem& problem, const SolverOptions& options = {});

struct MonteCarloEstimate {
  double above;
  double below;
  double se_above;
  double se_below;
};

/// Plain Monte Carlo over n_mc fresh draws from the model's sampler.
MonteCarloEstimate mc_probability_oracle(const PopulationModel& model, const PartialOrder& cone,
                                         const Eigen::Ref<const Eigen::VectorXd>& x, Index n_mc, Rng& rng);

/// Reusable oracle over one fixed pool of draws, so nearby points see the same
/// noise. FeasibleSet tests membership against P̂ − 3 se.
class PooledProbabilityOracle {
 public:
  PooledProbabilityOracle(const PopulationModel& model, const PartialOrder& cone, Index n_mc, Rng& rng);
  ProbabilityPair operator()(const Eigen::VectorXd& x) const;
  MonteCarloEstimate raw(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  Eigen::MatrixXd pool_;
  PartialOrder cone_;
};

}  // namespace pq
