#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pq/error.hpp"

namespace pq {

using Eigen::Index;

/// Four-way outcome of comparing x against y. `Precedes` means x ⪯ y with
/// x and y not equivalent.
enum class Comparison { Precedes, Succeeds, Equal, Incomparable };

const char* to_string(Comparison c) noexcept;

constexpr Comparison reversed(Comparison c) noexcept {
  switch (c) {
    case Comparison::Precedes: return Comparison::Succeeds;
    case Comparison::Succeeds: return Comparison::Precedes;
    default: return c;
  }
}

constexpr Comparison from_relation(bool x_le_y, bool y_le_x) noexcept {
  if (x_le_y && y_le_x) return Comparison::Equal;
  if (x_le_y) return Comparison::Precedes;
  if (y_le_x) return Comparison::Succeeds;
  return Comparison::Incomparable;
}

// ---------------------------------------------------------------------------
// Componentwise order on R^d. Exact sign tests, no tolerance.

template <typename DerivedX, typename DerivedY>
Comparison orthant_compare(const Eigen::MatrixBase<DerivedX>& x,
                           const Eigen::MatrixBase<DerivedY>& y) {
  bool x_le_y = true;
  bool y_le_x = true;
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x[i] <= y[i])) x_le_y = false;
    if (!(y[i] <= x[i])) y_le_x = false;
  }
  return from_relation(x_le_y, y_le_x);
}

/// Greatest lower bound under the componentwise order.
template <typename DerivedX, typename DerivedY>
auto meet(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  return x.cwiseMin(y);
}

/// Least upper bound under the componentwise order.
template <typename DerivedX, typename DerivedY>
auto join(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  return x.cwiseMax(y);
}

// ---------------------------------------------------------------------------

/// x ⪰ y iff x - y lies in the cone generated by the rows of `generators`.
/// The default is the nonnegative orthant, tested by exact coordinate signs.
/// Other cones are tested through a nonnegative least-squares feasibility
/// solve, accepting residuals up to kMembershipTolerance * max(1, |v|).
class ConicOrder {
 public:
  static constexpr double kMembershipTolerance = 1e-9;

  explicit ConicOrder(Index dimension);
  /// Throws ImproperCone unless the generators span R^d and the cone is pointed.
  explicit ConicOrder(Eigen::MatrixXd generators);

  Index dimension() const noexcept { return dimension_; }
  bool is_orthant() const noexcept { return orthant_; }
  const Eigen::MatrixXd& generators() const noexcept { return generators_; }

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& v) const;

 private:
  Index dimension_;
  bool orthant_;
  Eigen::MatrixXd generators_;
};

/// Nonnegative least squares: argmin |A z - b| subject to z >= 0
/// (Lawson-Hanson active set).
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

/// Binary relation on a finite label set given by arcs `src -> dst`
/// (src ⪯ dst). With `transitive` the relation is the reflexive-transitive
/// closure and the arcs must be acyclic; otherwise only the arcs themselves
/// (plus reflexivity) relate points.
class DagOrder {
 public:
  DagOrder(std::vector<std::string> labels,
           const std::vector<std::pair<std::string, std::string>>& arcs, bool transitive = true);

  Index size() const noexcept { return static_cast<Index>(labels_.size()); }
  bool transitive() const noexcept { return transitive_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(Index i) const { return labels_.at(static_cast<std::size_t>(i)); }
  Index index_of(const std::string& label) const;
  bool contains_label(const std::string& label) const { return index_.count(label) > 0; }

  /// a ⪯ b.
  bool precedes_or_equal(Index a, Index b) const {
    return relation_[static_cast<std::size_t>(a * size() + b)] != 0;
  }
  Comparison compare(Index a, Index b) const {
    return from_relation(precedes_or_equal(a, b), precedes_or_equal(b, a));
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, Index> index_;
  std::vector<char> relation_;
  bool transitive_;
};

using ScoreFunction = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// x ⪯ y iff u(x) <= u(y). Complete, but not antisymmetric.
struct CompleteOrder {
  ScoreFunction score;
  Index dimension;
};

/// Closed intervals [a, b] as points (a, b); x ⪯ y iff x ⊂ y.
struct IntervalInclusion {};

class PartialOrder {
 public:
  enum class Kind { Conic, Dag, Complete, Interval };

  static PartialOrder orthant(Index dimension);
  static PartialOrder cone(Eigen::MatrixXd generators);
  static PartialOrder dag(std::vector<std::string> labels,
                          const std::vector<std::pair<std::string, std::string>>& arcs,
                          bool transitive = true);
  static PartialOrder complete(ScoreFunction score, Index dimension);
  /// Linear score u(x) = w'x.
  static PartialOrder linear_score(Eigen::VectorXd weights);
  static PartialOrder interval_inclusion();

  Kind kind() const noexcept;
  /// Coordinates per point. DAG points are a single coordinate holding the
  /// node index; interval points are (a, b).
  Index dimension() const noexcept;

  Comparison compare(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y) const;
  /// x ⪯ y.
  bool precedes_or_equal(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& y) const;

  /// Throws DimensionMismatch / UnknownLabel for points outside the space.
  void check_point(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  bool is_transitive() const noexcept;
  /// Reflexive, transitive and antisymmetric.
  bool is_partial_order() const noexcept;
  bool is_orthant() const noexcept;

  Eigen::VectorXd meet(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y) const;
  Eigen::VectorXd join(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y) const;

  const ConicOrder* conic() const noexcept { return std::get_if<ConicOrder>(&repr_); }
  const DagOrder* dag() const noexcept;
  const CompleteOrder* complete() const noexcept { return std::get_if<CompleteOrder>(&repr_); }

  /// Short human-readable description, e.g. "orthant(2)".
  std::string describe() const;

 private:
  using Repr = std::variant<ConicOrder, std::shared_ptr<const DagOrder>, CompleteOrder,
                            IntervalInclusion>;
  explicit PartialOrder(Repr repr) : repr_(std::move(repr)) {}

  Repr repr_;
};

}  // namespace pq
