#pragma once

// File formats and the pq-v1 JSON records.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pq/estimator.hpp"
#include "pq/monotonize.hpp"
#include "pq/population.hpp"
#include "pq/regions.hpp"
#include "pq/solver.hpp"

namespace pq::io {

inline constexpr const char* kSchema = "pq-v1";

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position, or -1.
  Index column(const std::string& name) const;
};

/// Comma separated, header required, no quoting beyond trimming whitespace.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

/// All columns as numbers. Throws ParseError on anything non-numeric.
Eigen::MatrixXd numeric_matrix(const CsvTable& table);

/// Numeric columns for cone/orthant/interval/score orders; a `label` column
/// mapped to node codes for DAG orders.
Sample read_sample(const std::string& path, const PartialOrder& order);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const std::vector<std::string>& header);

/// One `src -> dst` per line; blank lines and `#` comments ignored.
std::vector<std::pair<std::string, std::string>> parse_edge_list(std::istream& in);
std::vector<std::pair<std::string, std::string>> read_edge_list(const std::string& path);

/// `label,count` rows.
std::vector<std::pair<std::string, std::int64_t>> read_node_counts(const std::string& path);

/// Generator rows, header required.
Eigen::MatrixXd read_cone(const std::string& path);

/// Labels of a DAG: nodes mentioned by the edges, then any extra nodes.
PartialOrder dag_from_edges(const std::vector<std::pair<std::string, std::string>>& arcs,
                            const std::vector<std::string>& extra_nodes = {}, bool transitive = true);

/// "orthant", "orthant:<d>", "cone:<file.csv>", "dag:<edges.txt>",
/// "interval", "score:<w1,w2,...>". `dimension` fills in a bare "orthant".
PartialOrder parse_order(const std::string& spec, Index dimension);

Marginal marginal_from_json(const nlohmann::json& j);
/// A model config object; relative file paths resolve against `base_dir`.
PopulationModel model_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
/// Either a bundled model name ("unit-square", "thks", ...) or a JSON file.
PopulationModel load_model(const std::string& name_or_path);

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Eigen::MatrixXd& m);
nlohmann::json to_json(const IndexEstimate& e);
nlohmann::json to_json(const PointEstimate& e);
nlohmann::json to_json(const QuantileCurve& c);
nlohmann::json to_json(const ComparabilityEstimate& c);
nlohmann::json to_json(const Region& r);
nlohmann::json to_json(const SolverResult& r);
nlohmann::json to_json(const PartialQuantileResult& r);

/// Reads the "curve" record written by to_json(QuantileCurve) (or a bare curve object).
QuantileCurve curve_from_json(const nlohmann::json& j);

/// Wraps a payload as {"schema": "pq-v1", "kind": kind, ...payload}.
nlohmann::json envelope(const std::string& kind, nlohmann::json payload);

}  // namespace pq::io
