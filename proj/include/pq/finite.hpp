#pragma once

// Exact partial quantiles on a finite space. Everything is templated on the
// mass type so the same code runs in double or in exact rational arithmetic
// (boost::rational<long long>).

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "pq/error.hpp"
#include "pq/order.hpp"

namespace pq {

template <typename Scalar>
constexpr Scalar normalization_tolerance() {
  if constexpr (std::is_floating_point_v<Scalar>)
    return Scalar(1e-12);
  else
    return Scalar(0);
}

template <typename Scalar>
struct FiniteDistribution {
  std::vector<std::string> labels;
  std::vector<Scalar> masses;

  static FiniteDistribution from_counts(std::vector<std::string> labels,
                                        const std::vector<std::int64_t>& counts) {
    if (labels.size() != counts.size())
      throw Error(ErrorCode::DimensionMismatch, "labels and counts differ in length");
    std::int64_t total = 0;
    for (auto c : counts) {
      if (c < 0) throw Error(ErrorCode::InvalidArgument, "negative count");
      total += c;
    }
    if (total == 0) throw Error(ErrorCode::UnnormalizedDistribution, "all counts are zero");
    FiniteDistribution dist{std::move(labels), {}};
    dist.masses.reserve(counts.size());
    for (auto c : counts) dist.masses.push_back(Scalar(c) / Scalar(total));
    return dist;
  }

  std::size_t size() const { return masses.size(); }

  void validate() const {
    if (labels.size() != masses.size())
      throw Error(ErrorCode::DimensionMismatch, "labels and masses differ in length");
    Scalar sum(0);
    for (const auto& m : masses) {
      if (m < Scalar(0)) throw Error(ErrorCode::UnnormalizedDistribution, "negative mass");
      sum += m;
    }
    Scalar gap = sum - Scalar(1);
    if (gap < Scalar(0)) gap = -gap;
    if (gap > normalization_tolerance<Scalar>())
      throw Error(ErrorCode::UnnormalizedDistribution, "masses do not sum to one");
  }
};

template <typename Scalar>
struct FiniteAtomIndex {
  std::string label;
  Scalar mass;
  Scalar below;       ///< P(X ⪯ x)
  Scalar above;       ///< P(X ⪰ x)
  Scalar comparable;  ///< p_x
  /// τ_x; empty when p_x = 0.
  std::optional<Scalar> tau;
};

template <typename Scalar>
struct FiniteQuantileLevel {
  Scalar tau;
  std::vector<std::size_t> surface;  ///< Q(τ), atom positions
  std::vector<std::size_t> points;   ///< Q*(τ): maximizers of p_x over Q(τ)
  std::optional<Scalar> p_tau;       ///< empty when Q(τ) is empty
};

template <typename Scalar>
struct FiniteQuantileTable {
  std::vector<FiniteAtomIndex<Scalar>> atoms;
  std::vector<FiniteQuantileLevel<Scalar>> levels;
};

/// Q(τ) membership with the two weak inequalities, cross-multiplied so no
/// division happens.
template <typename Scalar>
bool in_quantile_surface(const FiniteAtomIndex<Scalar>& a, const Scalar& tau) {
  if (!(a.comparable > Scalar(0))) return false;
  return a.above >= (Scalar(1) - tau) * a.comparable && a.below >= tau * a.comparable;
}

/// O(|S|^2) pass over all atom pairs. `precedes_or_equal(i, j)` is i ⪯ j.
template <typename Scalar, typename Relation>
  requires std::is_invocable_r_v<bool, Relation&, std::size_t, std::size_t>
FiniteQuantileTable<Scalar> finite_exact_quantiles(const FiniteDistribution<Scalar>& dist,
                                                   Relation&& precedes_or_equal,
                                                   const std::vector<Scalar>& taus) {
  dist.validate();
  const std::size_t n = dist.size();
  FiniteQuantileTable<Scalar> table;
  table.atoms.reserve(n);
  for (std::size_t x = 0; x < n; ++x) {
    FiniteAtomIndex<Scalar> a{dist.labels[x], dist.masses[x], Scalar(0), Scalar(0), Scalar(0), {}};
    for (std::size_t y = 0; y < n; ++y) {
      const bool y_le_x = precedes_or_equal(y, x);
      const bool x_le_y = precedes_or_equal(x, y);
      if (y_le_x) a.below += dist.masses[y];
      if (x_le_y) a.above += dist.masses[y];
      if (y_le_x || x_le_y) a.comparable += dist.masses[y];
    }
    if (a.comparable > Scalar(0)) a.tau = a.below / a.comparable;
    table.atoms.push_back(std::move(a));
  }

  for (const auto& tau : taus) {
    if (!(tau > Scalar(0) && tau < Scalar(1)))
      throw Error(ErrorCode::TauOutOfRange, "quantile level must lie in (0,1)");
    FiniteQuantileLevel<Scalar> level{tau, {}, {}, {}};
    for (std::size_t x = 0; x < n; ++x) {
      if (!in_quantile_surface(table.atoms[x], tau)) continue;
      level.surface.push_back(x);
      const Scalar& p = table.atoms[x].comparable;
      if (!level.p_tau || p > *level.p_tau) {
        level.p_tau = p;
        level.points.assign(1, x);
      } else if (p == *level.p_tau) {
        level.points.push_back(x);
      }
    }
    table.levels.push_back(std::move(level));
  }
  return table;
}

/// Finite distribution over the labels of a DAG-type relation. Distribution
/// labels must all be nodes of `order`.
template <typename Scalar>
FiniteQuantileTable<Scalar> finite_exact_quantiles(const FiniteDistribution<Scalar>& dist,
                                                   const DagOrder& order,
                                                   const std::vector<Scalar>& taus) {
  std::vector<Index> code;
  code.reserve(dist.size());
  for (const auto& l : dist.labels) code.push_back(order.index_of(l));
  return finite_exact_quantiles(
      dist,
      [&](std::size_t i, std::size_t j) { return order.precedes_or_equal(code[i], code[j]); },
      taus);
}

template <typename Scalar>
FiniteQuantileTable<Scalar> finite_exact_quantiles(const FiniteDistribution<Scalar>& dist,
                                                   const PartialOrder& order,
                                                   const std::vector<Scalar>& taus) {
  const DagOrder* dag = order.dag();
  if (!dag) throw Error(ErrorCode::InvalidArgument, "finite spaces need a DAG-type relation");
  return finite_exact_quantiles(dist, *dag, taus);
}

}  // namespace pq
