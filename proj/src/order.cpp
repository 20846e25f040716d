#include "pq/order.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pq {

const char* to_string(Comparison c) noexcept {
  switch (c) {
    case Comparison::Precedes: return "Precedes";
    case Comparison::Succeeds: return "Succeeds";
    case Comparison::Equal: return "Equal";
    case Comparison::Incomparable: return "Incomparable";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// NNLS

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Index m = A.cols();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  const double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()) * std::max(1.0, b.norm());

  auto solve_passive = [&](Eigen::VectorXd& out) {
    std::vector<Index> idx;
    for (Index j = 0; j < m; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Eigen::MatrixXd sub(A.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Index>(k)) = A.col(idx[k]);
    Eigen::VectorXd s = sub.colPivHouseholderQr().solve(b);
    out.setZero(m);
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = s[static_cast<Index>(k)];
  };

  for (Index outer = 0; outer < 3 * m + 10; ++outer) {
    Eigen::VectorXd w = A.transpose() * (b - A * z);
    Index best = -1;
    double best_w = tol;
    for (Index j = 0; j < m; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (Index inner = 0; inner < 3 * m + 10; ++inner) {
      Eigen::VectorXd s;
      solve_passive(s);
      bool all_positive = true;
      for (Index j = 0; j < m; ++j)
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) all_positive = false;
      if (all_positive) {
        z = s;
        break;
      }
      double alpha = 1.0;
      for (Index j = 0; j < m; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) {
          const double denom = z[j] - s[j];
          if (denom > 0.0) alpha = std::min(alpha, z[j] / denom);
        }
      }
      z += alpha * (s - z);
      for (Index j = 0; j < m; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = false;
          z[j] = 0.0;
        }
      }
    }
  }
  return z;
}

// ---------------------------------------------------------------------------
// ConicOrder

ConicOrder::ConicOrder(Index dimension)
    : dimension_(dimension), orthant_(true), generators_(Eigen::MatrixXd::Identity(dimension, dimension)) {
  if (dimension < 1) throw Error(ErrorCode::InvalidArgument, "cone dimension must be positive");
}

ConicOrder::ConicOrder(Eigen::MatrixXd generators)
    : dimension_(generators.cols()), orthant_(false), generators_(std::move(generators)) {
  if (dimension_ < 1 || generators_.rows() < 1)
    throw Error(ErrorCode::ImproperCone, "empty generator list");
  for (Index r = 0; r < generators_.rows(); ++r)
    if (generators_.row(r).norm() == 0.0) throw Error(ErrorCode::ImproperCone, "zero generator");

  Eigen::FullPivLU<Eigen::MatrixXd> lu(generators_);
  if (lu.rank() < dimension_)
    throw Error(ErrorCode::ImproperCone, "generators do not span R^d (empty interior)");

  // Pointed iff 0 is not a convex combination of the normalized generators.
  const Index m = generators_.rows();
  constexpr double weight = 1e4;
  Eigen::MatrixXd aug(dimension_ + 1, m);
  for (Index r = 0; r < m; ++r) {
    aug.col(r).head(dimension_) = generators_.row(r).transpose() / generators_.row(r).norm();
    aug(dimension_, r) = weight;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dimension_ + 1);
  rhs[dimension_] = weight;
  const Eigen::VectorXd lambda = nnls(aug, rhs);
  if ((aug.topRows(dimension_) * lambda).norm() < 1e-7)
    throw Error(ErrorCode::ImproperCone, "cone contains a line");

  // Unit-vector generators in any order are still the orthant: keep the fast path.
  if (m == dimension_) {
    bool unit = true;
    Eigen::VectorXi seen = Eigen::VectorXi::Zero(dimension_);
    for (Index r = 0; r < m && unit; ++r) {
      Index pos = -1;
      for (Index c = 0; c < dimension_; ++c) {
        const double g = generators_(r, c);
        if (g == 0.0) continue;
        if (g < 0.0 || pos >= 0) { unit = false; break; }
        pos = c;
      }
      if (pos < 0 || seen[pos]) unit = false; else seen[pos] = 1;
    }
    orthant_ = unit;
  }
}

bool ConicOrder::contains(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (orthant_) return (v.array() >= 0.0).all();
  const Eigen::VectorXd lambda = nnls(generators_.transpose(), v);
  const double residual = (generators_.transpose() * lambda - v).norm();
  return residual <= kMembershipTolerance * std::max(1.0, v.norm());
}

// ---------------------------------------------------------------------------
// DagOrder

DagOrder::DagOrder(std::vector<std::string> labels,
                   const std::vector<std::pair<std::string, std::string>>& arcs, bool transitive)
    : labels_(std::move(labels)), transitive_(transitive) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], static_cast<Index>(i)).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate label '" + labels_[i] + "'");
  }
  const auto n = labels_.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [src, dst] : arcs)
    succ[static_cast<std::size_t>(index_of(src))].push_back(static_cast<std::size_t>(index_of(dst)));

  relation_.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) relation_[i * n + i] = 1;

  if (!transitive_) {
    for (std::size_t i = 0; i < n; ++i)
      for (auto j : succ[i]) relation_[i * n + j] = 1;
    return;
  }

  // Cycle check by iterative three-colour DFS.
  std::vector<int> colour(n, 0);
  for (std::size_t root = 0; root < n; ++root) {
    if (colour[root] != 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < succ[node].size()) {
        const auto child = succ[node][next++];
        if (colour[child] == 1)
          throw Error(ErrorCode::CyclicRelation, "cycle through '" + labels_[child] + "'");
        if (colour[child] == 0) {
          colour[child] = 1;
          stack.emplace_back(child, 0);
        }
      } else {
        colour[node] = 2;
        stack.pop_back();
      }
    }
  }

  // Reachability by BFS from each node: O(|V| (|V| + |E|)).
  std::vector<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    queue.assign(1, s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (auto t : succ[queue[head]]) {
        if (!relation_[s * n + t]) {
          relation_[s * n + t] = 1;
          queue.push_back(t);
        }
      }
    }
  }
}

Index DagOrder::index_of(const std::string& label) const {
  const auto it = index_.find(label);
  if (it == index_.end()) throw Error(ErrorCode::UnknownLabel, "'" + label + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// PartialOrder

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Index dag_code(const Eigen::Ref<const Eigen::VectorXd>& x, const DagOrder& dag) {
  const double c = x[0];
  if (!(c >= 0.0) || c != std::floor(c) || c >= static_cast<double>(dag.size()))
    throw Error(ErrorCode::UnknownLabel, "node code " + std::to_string(c));
  return static_cast<Index>(c);
}

}  // namespace

PartialOrder PartialOrder::orthant(Index dimension) { return PartialOrder(ConicOrder(dimension)); }

PartialOrder PartialOrder::cone(Eigen::MatrixXd generators) {
  return PartialOrder(ConicOrder(std::move(generators)));
}

PartialOrder PartialOrder::dag(std::vector<std::string> labels,
                               const std::vector<std::pair<std::string, std::string>>& arcs,
                               bool transitive) {
  return PartialOrder(std::make_shared<const DagOrder>(std::move(labels), arcs, transitive));
}

PartialOrder PartialOrder::complete(ScoreFunction score, Index dimension) {
  return PartialOrder(CompleteOrder{std::move(score), dimension});
}

PartialOrder PartialOrder::linear_score(Eigen::VectorXd weights) {
  const Index d = weights.size();
  return complete([w = std::move(weights)](const Eigen::Ref<const Eigen::VectorXd>& x) { return w.dot(x); },
                  d);
}

PartialOrder PartialOrder::interval_inclusion() { return PartialOrder(IntervalInclusion{}); }

PartialOrder::Kind PartialOrder::kind() const noexcept {
  switch (repr_.index()) {
    case 0: return Kind::Conic;
    case 1: return Kind::Dag;
    case 2: return Kind::Complete;
    default: return Kind::Interval;
  }
}

Index PartialOrder::dimension() const noexcept {
  return std::visit(overloaded{[](const ConicOrder& c) { return c.dimension(); },
                               [](const std::shared_ptr<const DagOrder>&) { return Index{1}; },
                               [](const CompleteOrder& c) { return c.dimension; },
                               [](const IntervalInclusion&) { return Index{2}; }},
                    repr_);
}

const DagOrder* PartialOrder::dag() const noexcept {
  const auto* p = std::get_if<std::shared_ptr<const DagOrder>>(&repr_);
  return p ? p->get() : nullptr;
}

void PartialOrder::check_point(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension())
    throw Error(ErrorCode::DimensionMismatch,
                "point has " + std::to_string(x.size()) + " coordinates, order expects " +
                    std::to_string(dimension()));
  if (const auto* d = dag()) dag_code(x, *d);
  if (kind() == Kind::Interval && !(x[0] <= x[1]))
    throw Error(ErrorCode::UnsupportedPoint, "interval with lower end above upper end");
}

bool PartialOrder::precedes_or_equal(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const Eigen::Ref<const Eigen::VectorXd>& y) const {
  return std::visit(
      overloaded{[&](const ConicOrder& c) {
                   if (c.is_orthant()) return (x.array() <= y.array()).all();
                   return c.contains(y - x);
                 },
                 [&](const std::shared_ptr<const DagOrder>& d) {
                   return d->precedes_or_equal(dag_code(x, *d), dag_code(y, *d));
                 },
                 [&](const CompleteOrder& c) { return c.score(x) <= c.score(y); },
                 [&](const IntervalInclusion&) { return y[0] <= x[0] && x[1] <= y[1]; }},
      repr_);
}

Comparison PartialOrder::compare(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const Eigen::Ref<const Eigen::VectorXd>& y) const {
  check_point(x);
  check_point(y);
  if (const auto* c = conic(); c && c->is_orthant()) return orthant_compare(x, y);
  if (const auto* c = complete()) {
    const double ux = c->score(x);
    const double uy = c->score(y);
    return from_relation(ux <= uy, uy <= ux);
  }
  return from_relation(precedes_or_equal(x, y), precedes_or_equal(y, x));
}

bool PartialOrder::is_transitive() const noexcept {
  if (const auto* d = dag()) return d->transitive();
  return true;
}

bool PartialOrder::is_partial_order() const noexcept {
  if (complete()) return false;
  return is_transitive();
}

bool PartialOrder::is_orthant() const noexcept {
  const auto* c = conic();
  return c != nullptr && c->is_orthant();
}

Eigen::VectorXd PartialOrder::meet(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (!is_orthant()) throw Error(ErrorCode::NotALattice, "meet requires the orthant order");
  check_point(x);
  check_point(y);
  return pq::meet(x, y);
}

Eigen::VectorXd PartialOrder::join(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (!is_orthant()) throw Error(ErrorCode::NotALattice, "join requires the orthant order");
  check_point(x);
  check_point(y);
  return pq::join(x, y);
}

std::string PartialOrder::describe() const {
  std::ostringstream os;
  std::visit(overloaded{[&](const ConicOrder& c) {
                          if (c.is_orthant())
                            os << "orthant(" << c.dimension() << ")";
                          else
                            os << "cone(" << c.dimension() << ", " << c.generators().rows()
                               << " generators)";
                        },
                        [&](const std::shared_ptr<const DagOrder>& d) {
                          os << (d->transitive() ? "dag(" : "relation(") << d->size() << " nodes)";
                        },
                        [&](const CompleteOrder& c) { os << "score(" << c.dimension << ")"; },
                        [&](const IntervalInclusion&) { os << "interval-inclusion"; }},
             repr_);
  return os.str();
}

}  // namespace pq
