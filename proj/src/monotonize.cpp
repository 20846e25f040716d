#include "pq/monotonize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pq/error.hpp"

namespace pq {

void QuantileCurve::validate() const {
  if (tau_grid.empty()) throw Error(ErrorCode::GridEmpty, "curve has no levels");
  if (points.rows() != size()) throw Error(ErrorCode::DimensionMismatch, "one point per level expected");
  if (!p_values.empty() && static_cast<Index>(p_values.size()) != size())
    throw Error(ErrorCode::DimensionMismatch, "one p value per level expected");
  for (std::size_t k = 1; k < tau_grid.size(); ++k)
    if (!(tau_grid[k] > tau_grid[k - 1]))
      throw Error(ErrorCode::InvalidArgument, "tau grid must be strictly increasing");
}

bool is_partial_monotone(const QuantileCurve& curve, const PartialOrder& order) {
  for (Index k = 1; k < curve.size(); ++k)
    if (!order.precedes_or_equal(curve.points.row(k - 1).transpose(), curve.points.row(k).transpose()))
      return false;
  return true;
}

namespace {

void require_lattice(const PartialOrder& order) {
  if (!order.is_partial_order()) throw Error(ErrorCode::NotAPartialOrder, "relation is not a partial order");
  if (!order.is_orthant()) throw Error(ErrorCode::NotALattice, "curve repair needs the componentwise order");
}

/// Right end points of consecutive cells with the given widths; last one pinned to 1.
std::vector<double> cumulative(const std::vector<double>& widths) {
  std::vector<double> ends(widths.size());
  std::partial_sum(widths.begin(), widths.end(), ends.begin());
  if (!ends.empty()) ends.back() = 1.0;
  return ends;
}

struct Step {
  std::vector<double> ends;
  std::vector<double> values;
};

/// Integral over (0,1) of |f − g|^κ for two step functions.
double integrate_power(const Step& f, const Step& g, double kappa) {
  double total = 0.0;
  double pos = 0.0;
  std::size_t i = 0;
  std::size_t k = 0;
  while (i < f.ends.size() && k < g.ends.size()) {
    const double end = std::min(f.ends[i], g.ends[k]);
    const double len = end - pos;
    if (len > 0.0) total += len * std::pow(std::abs(f.values[i] - g.values[k]), kappa);
    pos = std::max(pos, end);
    if (f.ends[i] <= end) ++i;
    if (g.ends[k] <= end) ++k;
  }
  return total;
}

Step grid_step(const QuantileCurve& c, Index j, const std::vector<double>& ends) {
  Step s{ends, std::vector<double>(static_cast<std::size_t>(c.size()))};
  for (Index k = 0; k < c.size(); ++k) s.values[static_cast<std::size_t>(k)] = c.points(k, j);
  return s;
}

/// Exact rearrangement of a step function: values sorted, each keeping its width.
Step rearranged_step(const QuantileCurve& c, Index j, const std::vector<double>& w) {
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return c.points(static_cast<Index>(a), j) < c.points(static_cast<Index>(b), j);
  });
  std::vector<double> widths(w.size());
  Step s;
  s.values.resize(w.size());
  for (std::size_t m = 0; m < order.size(); ++m) {
    widths[m] = w[order[m]];
    s.values[m] = c.points(static_cast<Index>(order[m]), j);
  }
  s.ends = cumulative(widths);
  return s;
}

void check_kappa(double kappa) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw Error(ErrorCode::InvalidArgument, "kappa must be >= 1");
}

void check_same_grid(const QuantileCurve& a, const QuantileCurve& b) {
  if (a.tau_grid != b.tau_grid) throw Error(ErrorCode::GridMismatch, "curves live on different tau grids");
  if (a.dimension() != b.dimension()) throw Error(ErrorCode::DimensionMismatch, "curves differ in dimension");
}

}  // namespace

std::vector<double> cell_weights(const std::vector<double>& tau_grid) {
  const std::size_t t = tau_grid.size();
  if (t == 0) throw Error(ErrorCode::GridEmpty, "empty tau grid");
  if (t == 1) return {1.0};
  std::vector<double> w(t);
  for (std::size_t k = 0; k < t; ++k) {
    const double left = k == 0 ? tau_grid[1] - tau_grid[0] : tau_grid[k] - tau_grid[k - 1];
    const double right = k + 1 == t ? tau_grid[t - 1] - tau_grid[t - 2] : tau_grid[k + 1] - tau_grid[k];
    w[k] = 0.5 * (left + right);
  }
  // Uniform grids come out exactly equal rather than equal up to rounding.
  const double gap = (tau_grid.back() - tau_grid.front()) / static_cast<double>(t - 1);
  const bool uniform = std::all_of(w.begin(), w.end(), [&](double v) { return std::abs(v - gap) <= 1e-9 * gap; });
  if (uniform) return std::vector<double>(t, 1.0 / static_cast<double>(t));
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return w;
}

Envelopes majorant_minorant(const QuantileCurve& curve, const PartialOrder& order) {
  require_lattice(order);
  return majorant_minorant(curve);
}

Envelopes majorant_minorant(const QuantileCurve& curve) {
  curve.validate();
  Envelopes out{curve, curve};
  const Index t = curve.size();
  for (Index k = t - 2; k >= 0; --k)
    out.meet.points.row(k) = out.meet.points.row(k).cwiseMin(out.meet.points.row(k + 1));
  for (Index k = 1; k < t; ++k)
    out.join.points.row(k) = out.join.points.row(k).cwiseMax(out.join.points.row(k - 1));
  out.meet.p_values.clear();
  out.join.p_values.clear();
  out.meet.monotone_flag = true;
  out.join.monotone_flag = true;
  return out;
}

QuantileCurve rearrange(const QuantileCurve& curve, const PartialOrder& order) {
  require_lattice(order);
  return rearrange(curve);
}

QuantileCurve rearrange(const QuantileCurve& curve) {
  curve.validate();
  const auto w = cell_weights(curve.tau_grid);
  const auto grid_ends = cumulative(w);
  QuantileCurve out = curve;
  out.p_values.clear();
  out.monotone_flag = true;

#pragma omp parallel for schedule(static)
  for (Index j = 0; j < curve.dimension(); ++j) {
    const Step s = rearranged_step(curve, j, w);
    std::size_t m = 0;
    for (Index k = 0; k < curve.size(); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double mid = grid_ends[kk] - 0.5 * w[kk];
      while (m + 1 < s.ends.size() && s.ends[m] < mid) ++m;
      out.points(k, j) = s.values[m];
    }
  }
  return out;
}

double lkappa_distance(const QuantileCurve& a, const QuantileCurve& b, double kappa) {
  check_kappa(kappa);
  check_same_grid(a, b);
  const auto ends = cumulative(cell_weights(a.tau_grid));
  double total = 0.0;
  for (Index j = 0; j < a.dimension(); ++j)
    total += integrate_power(grid_step(a, j, ends), grid_step(b, j, ends), kappa);
  return std::pow(total, 1.0 / kappa);
}

RearrangementImprovement rearrangement_improvement(const QuantileCurve& curve, const QuantileCurve& truth,
                                                   double kappa) {
  check_kappa(kappa);
  check_same_grid(curve, truth);
  curve.validate();
  const auto w = cell_weights(curve.tau_grid);
  const auto ends = cumulative(w);
  double rearranged = 0.0;
  double original = 0.0;
  for (Index j = 0; j < curve.dimension(); ++j) {
    const Step g = grid_step(truth, j, ends);
    rearranged += integrate_power(rearranged_step(curve, j, w), g, kappa);
    original += integrate_power(grid_step(curve, j, ends), g, kappa);
  }
  return {std::pow(rearranged, 1.0 / kappa), std::pow(original, 1.0 / kappa)};
}

const char* to_string(MonotonicityVerdict v) noexcept {
  return v == MonotonicityVerdict::EvidenceNotMonotone ? "EvidenceNotMonotone" : "Inconclusive";
}

MonotonicityDiagnostic monotonicity_diagnostic(const QuantileCurve& curve, double kappa, double sup_bound) {
  check_kappa(kappa);
  curve.validate();
  const auto w = cell_weights(curve.tau_grid);
  const auto ends = cumulative(w);
  double total = 0.0;
  for (Index j = 0; j < curve.dimension(); ++j)
    total += integrate_power(rearranged_step(curve, j, w), grid_step(curve, j, ends), kappa);
  const double d = std::pow(total, 1.0 / kappa);
  return {d, d > 2.0 * sup_bound ? MonotonicityVerdict::EvidenceNotMonotone : MonotonicityVerdict::Inconclusive};
}

}  // namespace pq
