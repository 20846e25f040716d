#include "pq/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pq/thks.hpp"

namespace pq::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return in;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  return v;
}

std::int64_t parse_count(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "not an integer: '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::ParseError, "not an integer: '" + s + "'");
  return v;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? path : (fs::path(base_dir) / p).string();
}

PopulationModel thks_model() {
  return FiniteModel{thks::distribution<double>(), thks::order()};
}

}  // namespace

Index CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<Index>(it - header.begin());
}

CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (t.header.empty()) {
      if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        fields.front() = trim(fields.front().substr(3));
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has " +
                                             std::to_string(fields.size()) + " fields, header has " +
                                             std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw Error(ErrorCode::ParseError, "CSV input has no header");
  return t;
}

CsvTable read_csv(const std::string& path) {
  auto in = open(path);
  return parse_csv(in);
}

Eigen::MatrixXd numeric_matrix(const CsvTable& table) {
  Eigen::MatrixXd m(static_cast<Index>(table.rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    for (std::size_t j = 0; j < table.header.size(); ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = parse_double(table.rows[i][j]);
  return m;
}

Sample read_sample(const std::string& path, const PartialOrder& order) {
  const CsvTable t = read_csv(path);
  if (t.rows.empty()) throw Error(ErrorCode::ParseError, path + " has no observations");
  if (const DagOrder* dag = order.dag()) {
    const Index col = t.column("label");
    if (col < 0) throw Error(ErrorCode::ParseError, path + " needs a `label` column for a finite space");
    Eigen::MatrixXd codes(static_cast<Index>(t.rows.size()), 1);
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      codes(static_cast<Index>(i), 0) = static_cast<double>(dag->index_of(t.rows[i][static_cast<std::size_t>(col)]));
    return Sample(std::move(codes), order, path);
  }
  return Sample(numeric_matrix(t), order, path);
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

std::vector<std::pair<std::string, std::string>> parse_edge_list(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> arcs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto arrow = line.find("->");
    if (arrow == std::string::npos)
      throw Error(ErrorCode::ParseError, "edge list line " + std::to_string(line_no) + " has no '->'");
    auto src = trim(line.substr(0, arrow));
    auto dst = trim(line.substr(arrow + 2));
    if (src.empty() || dst.empty())
      throw Error(ErrorCode::ParseError, "edge list line " + std::to_string(line_no) + " is missing a node");
    arcs.emplace_back(std::move(src), std::move(dst));
  }
  return arcs;
}

std::vector<std::pair<std::string, std::string>> read_edge_list(const std::string& path) {
  auto in = open(path);
  return parse_edge_list(in);
}

std::vector<std::pair<std::string, std::int64_t>> read_node_counts(const std::string& path) {
  const CsvTable t = read_csv(path);
  const Index lc = t.column("label");
  const Index cc = t.column("count");
  if (lc < 0 || cc < 0) throw Error(ErrorCode::ParseError, path + " needs `label` and `count` columns");
  std::vector<std::pair<std::string, std::int64_t>> out;
  for (const auto& row : t.rows)
    out.emplace_back(row[static_cast<std::size_t>(lc)], parse_count(row[static_cast<std::size_t>(cc)]));
  return out;
}

Eigen::MatrixXd read_cone(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.rows.empty()) throw Error(ErrorCode::ParseError, path + " lists no generators");
  return numeric_matrix(t);
}

PartialOrder dag_from_edges(const std::vector<std::pair<std::string, std::string>>& arcs,
                            const std::vector<std::string>& extra_nodes, bool transitive) {
  std::vector<std::string> labels;
  auto add = [&](const std::string& l) {
    if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
  };
  for (const auto& [a, b] : arcs) {
    add(a);
    add(b);
  }
  for (const auto& l : extra_nodes) add(l);
  return PartialOrder::dag(std::move(labels), arcs, transitive);
}

PartialOrder parse_order(const std::string& spec, Index dimension) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (kind == "orthant") {
    const Index d = arg.empty() ? dimension : static_cast<Index>(parse_count(arg));
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "orthant needs a dimension");
    return PartialOrder::orthant(d);
  }
  if (kind == "cone") return PartialOrder::cone(read_cone(arg));
  if (kind == "dag") return dag_from_edges(read_edge_list(arg));
  if (kind == "relation") return dag_from_edges(read_edge_list(arg), {}, false);
  if (kind == "interval") return PartialOrder::interval_inclusion();
  if (kind == "score") {
    const auto parts = split(arg, ',');
    Eigen::VectorXd w(static_cast<Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) w[static_cast<Index>(i)] = parse_double(parts[i]);
    return PartialOrder::linear_score(std::move(w));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown order '" + spec + "'");
}

// ---------------------------------------------------------------------------

Marginal marginal_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "uniform") return Marginal::uniform(j.value("a", 0.0), j.value("b", 1.0));
  if (family == "normal") return Marginal::normal(j.value("mean", 0.0), j.value("sd", 1.0));
  if (family == "exponential") return Marginal::exponential(j.value("rate", 1.0));
  throw Error(ErrorCode::InvalidArgument, "unknown marginal family '" + family + "'");
}

PopulationModel model_from_json(const json& j, const std::string& base_dir) {
  try {
    const std::string name = j.at("model").get<std::string>();
    if (name == "unit-square") return UniformUnitSquare{};
    if (name == "two-squares-disjoint") return TwoSquaresDisjoint{};
    if (name == "two-squares-aligned") return TwoSquaresAligned{};
    if (name == "interval-covering") return IntervalCovering{};
    if (name == "thks") return thks_model();
    if (name == "simplex") return UniformSimplex{j.value("dimension", Index{2})};
    if (name == "independent-product") {
      IndependentProduct m;
      if (j.contains("marginals")) {
        for (const auto& mj : j.at("marginals")) m.marginals.push_back(marginal_from_json(mj));
      } else {
        const auto d = j.value("dimension", Index{2});
        const Marginal each = j.contains("marginal") ? marginal_from_json(j.at("marginal")) : Marginal::uniform(0, 1);
        m.marginals.assign(static_cast<std::size_t>(d), each);
      }
      return m;
    }
    if (name == "complete-order") {
      const auto w = j.value("weights", std::vector<double>{1.0});
      Eigen::VectorXd weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Index>(w.size()));
      const Marginal law = j.contains("score_law") ? marginal_from_json(j.at("score_law")) : Marginal::uniform(0, 1);
      return CompleteOrderScore{std::move(weights), law};
    }
    if (name == "finite") {
      std::vector<std::string> labels;
      std::vector<std::int64_t> counts;
      if (j.contains("counts") && j.at("counts").is_string()) {
        for (auto& [l, c] : read_node_counts(resolve(base_dir, j.at("counts").get<std::string>()))) {
          labels.push_back(l);
          counts.push_back(c);
        }
      } else {
        for (const auto& [l, c] : j.at("counts").items()) {
          labels.push_back(l);
          counts.push_back(c.get<std::int64_t>());
        }
      }
      std::vector<std::pair<std::string, std::string>> arcs;
      if (j.at("edges").is_string()) {
        arcs = read_edge_list(resolve(base_dir, j.at("edges").get<std::string>()));
      } else {
        for (const auto& e : j.at("edges")) arcs.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
      }
      PartialOrder order = dag_from_edges(arcs, labels, j.value("transitive", true));
      return FiniteModel{FiniteDistribution<double>::from_counts(std::move(labels), counts), std::move(order)};
    }
    throw Error(ErrorCode::InvalidArgument, "unknown model '" + name + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model config: ") + e.what());
  }
}

PopulationModel load_model(const std::string& name_or_path) {
  if (!fs::exists(name_or_path)) return model_from_json(json{{"model", name_or_path}});
  auto in = open(name_or_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, name_or_path + ": " + e.what());
  }
  return model_from_json(j, fs::path(name_or_path).parent_path().string());
}

// ---------------------------------------------------------------------------

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
  return rows;
}

json to_json(const IndexEstimate& e) {
  return {{"x", to_json(e.x)},
          {"tau_hat", e.tau_hat ? json(*e.tau_hat) : json(nullptr)},
          {"p_hat", e.p_hat},
          {"se_tau", e.se_tau ? json(*e.se_tau) : json(nullptr)},
          {"below", e.counts.below},
          {"above", e.counts.above},
          {"comparable", e.counts.comparable},
          {"n", e.n}};
}

json to_json(const PointEstimate& e) {
  return {{"tau", e.tau},
          {"x_hat", to_json(e.x_hat)},
          {"p_hat", e.p_hat},
          {"tau_hat_at_x", e.tau_hat_at_x},
          {"bias", e.bias()},
          {"epsilon_n", e.epsilon_n},
          {"feasible", e.feasible},
          {"violation", e.violation},
          {"n", e.n}};
}

json to_json(const QuantileCurve& c) {
  return {{"tau_grid", c.tau_grid},
          {"points", to_json(c.points)},
          {"p_values", c.p_values},
          {"monotone", c.monotone_flag}};
}

QuantileCurve curve_from_json(const json& j) {
  try {
    const json& c = j.contains("curve") ? j.at("curve") : j;
    QuantileCurve out;
    out.tau_grid = c.at("tau_grid").get<std::vector<double>>();
    const auto rows = c.at("points").get<std::vector<std::vector<double>>>();
    const auto d = rows.empty() ? std::size_t{0} : rows.front().size();
    out.points.resize(static_cast<Index>(rows.size()), static_cast<Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != d) throw Error(ErrorCode::DimensionMismatch, "ragged curve points");
      for (std::size_t k = 0; k < d; ++k) out.points(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
    }
    if (c.contains("p_values")) out.p_values = c.at("p_values").get<std::vector<double>>();
    out.monotone_flag = c.value("monotone", true);
    out.validate();
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("curve record: ") + e.what());
  }
}

json to_json(const ComparabilityEstimate& c) {
  json levels = json::array();
  for (const auto& p : c.points) levels.push_back(to_json(p));
  return {{"value", c.value}, {"tau_star", c.tau_star}, {"se", c.se}, {"levels", levels}};
}

json to_json(const Region& r) {
  std::string bits(r.membership.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (r.membership[i]) bits[i] = '1';
  json grid;
  if (!r.grid.shape.empty()) {
    grid["shape"] = r.grid.shape;
    grid["lower"] = to_json(Eigen::VectorXd(r.grid.points.colwise().minCoeff().transpose()));
    grid["upper"] = to_json(Eigen::VectorXd(r.grid.points.colwise().maxCoeff().transpose()));
    grid["layout"] = "row-major, first axis slowest";
  } else {
    grid["points"] = to_json(r.grid.points);
  }
  return {{"theta", r.theta},
          {"eta", r.eta},
          {"grid", grid},
          {"membership", bits},
          {"members", r.count()},
          {"coverage", std::isfinite(r.coverage_hat) ? json(r.coverage_hat) : json(nullptr)}};
}

json to_json(const SolverResult& r) {
  return {{"x", to_json(r.x)},
          {"v", r.v},
          {"p_star", r.p_star},
          {"p_x", r.p_x},
          {"tau_x", r.tau_x},
          {"phases", r.phases},
          {"chains", r.chains},
          {"walk_length", r.walk_length},
          {"best_v_trace", r.best_v_trace},
          {"temperature", r.temperature},
          {"oracle_calls", r.oracle_calls},
          {"init_rejections", r.init_rejections},
          {"init_from_probe", r.init_from_probe}};
}

json to_json(const PartialQuantileResult& r) {
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(to_json(p));
  json out = {{"tau", r.tau}, {"points", pts}, {"p_tau", r.p_tau}, {"empty", r.empty},
              {"whole_support", r.whole_support}};
  if (!r.labels.empty()) out["labels"] = r.labels;
  return out;
}

json envelope(const std::string& kind, json payload) {
  json out = {{"schema", kSchema}, {"kind", kind}};
  for (auto& [k, v] : payload.items()) out[k] = v;
  return out;
}

}  // namespace pq::io
