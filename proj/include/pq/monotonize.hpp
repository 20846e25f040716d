#pragma once

// Repairs for estimated quantile curves that fail to be monotone in τ.
// Curves are read as step functions on (0,1): level k owns a cell of width
// weight k (see cell_weights), and the value on that cell is row k.

#include <vector>

#include "pq/curve.hpp"
#include "pq/order.hpp"

namespace pq {

/// Cell widths of a τ grid, summing to one. Cells are Voronoi cells with the
/// two end cells extended by half the neighbouring gap, so a uniform grid gets
/// equal weights.
std::vector<double> cell_weights(const std::vector<double>& tau_grid);

struct Envelopes {
  QuantileCurve meet;  ///< row k = componentwise min of rows k..T-1
  QuantileCurve join;  ///< row k = componentwise max of rows 0..k
};

/// Both envelopes are monotone and sandwich the input: meet ≤ input ≤ join.
/// Throws NotALattice unless `order` is the componentwise order.
Envelopes majorant_minorant(const QuantileCurve& curve, const PartialOrder& order);
Envelopes majorant_minorant(const QuantileCurve& curve);

/// Componentwise rearrangement. Coordinate j of row k is the weighted
/// quantile of coordinate j's values at the midpoint of cell k; with equal
/// weights this is plain sorting.
QuantileCurve rearrange(const QuantileCurve& curve, const PartialOrder& order);
QuantileCurve rearrange(const QuantileCurve& curve);

/// (∫ Σ_j |a_j(u) − b_j(u)|^κ du)^{1/κ} for two curves on the same grid.
double lkappa_distance(const QuantileCurve& a, const QuantileCurve& b, double kappa);

struct RearrangementImprovement {
  double rearranged;  ///< L_κ(rearranged, truth)
  double original;    ///< L_κ(curve, truth)
};

/// The rearranged side uses the exact rearranged step function, whose
/// breakpoints need not sit on the grid cells when the weights differ; the
/// integral is taken on the common refinement. Throws GridMismatch.
RearrangementImprovement rearrangement_improvement(const QuantileCurve& curve, const QuantileCurve& truth,
                                                   double kappa);

enum class MonotonicityVerdict { EvidenceNotMonotone, Inconclusive };
const char* to_string(MonotonicityVerdict v) noexcept;

struct MonotonicityDiagnostic {
  double distance;  ///< D = L_κ(rearranged, curve)
  MonotonicityVerdict verdict;
  static constexpr const char* kCaveat = "heuristic; not a formal statistical test";
};

/// EvidenceNotMonotone when D > 2 sup_bound, where sup_bound is the caller's
/// bound on sup_τ |x̂_τ − x_τ|_κ.
MonotonicityDiagnostic monotonicity_diagnostic(const QuantileCurve& curve, double kappa, double sup_bound);

}  // namespace pq
