// pq: command-line front end for the partial quantile library.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/rational.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pq/estimator.hpp"
#include "pq/finite.hpp"
#include "pq/io.hpp"
#include "pq/monotonize.hpp"
#include "pq/population.hpp"
#include "pq/regions.hpp"
#include "pq/solver.hpp"
#include "pq/thks.hpp"

using namespace pq;
using nlohmann::json;

namespace {

struct Common {
  std::string output;
  std::string format = "json";
  std::uint64_t seed = 0;
  int threads = 0;
};

struct Emitter {
  const Common& common;

  /// Writes the record, then the summary line (stdout when the record went
  /// to a file, stderr otherwise).
  void emit(const std::string& body, const std::string& summary) const {
    if (common.output.empty()) {
      std::cout << body;
      std::cerr << summary << '\n';
    } else {
      std::ofstream out(common.output, std::ios::binary);
      if (!out) throw Error(ErrorCode::IoError, "cannot write " + common.output);
      out << body;
      std::cout << summary << '\n';
    }
  }

  void emit_json(const std::string& kind, json payload, const std::string& summary) const {
    if (common.format != "json") throw Error(ErrorCode::InvalidArgument, kind + " output is JSON only");
    emit(io::envelope(kind, std::move(payload)).dump(2) + "\n", summary);
  }
};

std::string fmt(double v, int digits = 4) {
  if (std::isnan(v)) return "undefined";
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

std::string fmt_point(const Eigen::VectorXd& x, int digits = 4) {
  std::string s = "(";
  for (Index j = 0; j < x.size(); ++j) s += (j ? ", " : "") + fmt(x[j], digits);
  return s + ")";
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_taus(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double a = 0, b = 0, h = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    if (!(in >> a >> c1 >> b >> c2 >> h) || c1 != ':' || c2 != ':' || !(h > 0.0))
      throw Error(ErrorCode::InvalidArgument, "tau range must look like start:stop:step");
    const auto count = static_cast<long>(std::floor((b - a) / h + 1e-9));
    for (long k = 0; k <= count; ++k) out.push_back(std::round((a + static_cast<double>(k) * h) * 1e12) / 1e12);
  } else {
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  }
  check_tau_grid(out);
  return out;
}

std::vector<Index> parse_shape(const std::string& spec) {
  std::vector<Index> out;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, 'x')) {
    const long v = std::stol(item);
    if (v < 1) throw Error(ErrorCode::InvalidArgument, "grid sizes must be positive");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid spec");
  return out;
}

Eigen::VectorXd parse_vector(const std::string& spec) {
  std::vector<double> v;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) v.push_back(std::stod(item));
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

/// Reads the order's dimension off the input's header when needed.
Sample load_sample(const std::string& input, const std::string& order_spec) {
  if (order_spec.rfind("orthant", 0) == 0 && order_spec.find(':') == std::string::npos) {
    const auto table = io::read_csv(input);
    return Sample(io::numeric_matrix(table), PartialOrder::orthant(static_cast<Index>(table.header.size())), input);
  }
  return io::read_sample(input, io::parse_order(order_spec, 0));
}

CandidateStrategy parse_candidates(const std::string& spec) {
  if (spec == "sample") return CandidateStrategy::sample_points();
  if (spec == "lattice") return CandidateStrategy::sample_plus_lattice();
  if (spec.rfind("grid:", 0) == 0) return CandidateStrategy::user_grid(io::numeric_matrix(io::read_csv(spec.substr(5))));
  throw Error(ErrorCode::InvalidArgument, "candidates must be sample, lattice or grid:<file.csv>");
}

EvaluationGrid make_grid(const std::string& shape, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  auto counts = parse_shape(shape);
  if (counts.size() == 1 && lo.size() > 1) counts.assign(static_cast<std::size_t>(lo.size()), counts.front());
  return tensor_grid(lo, hi, counts);
}

std::vector<std::string> coordinate_names(Index d) {
  std::vector<std::string> names;
  for (Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

int exit_code(ErrorCode code) {
  if (is_numeric_failure(code)) return 3;
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::TauOutOfRange:
    case ErrorCode::NotNondecreasing:
    case ErrorCode::GridEmpty:
    case ErrorCode::ImproperCone:
      return 1;
    default:
      return 2;
  }
}

using Rational = boost::rational<long long>;

std::string fraction(const Rational& r) {
  return std::to_string(r.numerator()) + (r.denominator() == 1 ? "" : "/" + std::to_string(r.denominator()));
}

double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial quantiles of multivariate data under partial orders"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--output,-o", common.output, "Write the record to this file");
  app.add_option("--format", common.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", common.seed, "Seed for all randomized steps")->envname("PQ_SEED");
  app.add_option("--threads", common.threads, "Worker threads (default: all available)");

  std::string input, order_spec = "orthant", grid_spec = "50x50", taus_spec, candidates = "sample", model = "unit-square";
  std::string curve_taus = "0.05:0.95:0.05", comp_taus = "0.1:0.9:0.01";
  std::string region_grid = "200x200", curve_path, lower_spec, upper_spec, g_name = "identity";
  std::string counts_path, edges_path;
  double tau = 0.5, theta = -1, eta = -1, kappa = -1, sup_bound = -1, pbar = 0.3, eps = 0.05, delta = 0.1;
  double slack = -1, rkappa = 2.0;
  long n = 1000, mc = 0, chains = 0, walk = 0;
  bool with_comparability = false;

  auto add_sample = [&](CLI::App* c) {
    c->add_option("--input,-i", input, "Observations CSV")->required();
    c->add_option("--order", order_spec, "orthant | orthant:<d> | cone:<csv> | dag:<edges> | relation:<edges> | interval | score:<w,...>");
  };
  auto add_estimation = [&](CLI::App* c) {
    c->add_option("--candidates", candidates, "sample | lattice | grid:<csv>");
    c->add_option("--eps", slack, "Slack ε_n (default: order-dependent)");
  };

  auto* indices = app.add_subcommand("indices", "Estimated index field over a grid");
  add_sample(indices);
  indices->add_option("--grid", grid_spec, "Grid shape, e.g. 50x50")->capture_default_str();
  indices->add_option("--points", curve_path, "CSV of evaluation points instead of a grid");
  indices->add_option("--lower", lower_spec, "Grid lower corner (default: sample minimum)");
  indices->add_option("--upper", upper_spec, "Grid upper corner (default: sample maximum)");

  auto* point = app.add_subcommand("point", "Estimated partial quantile point");
  add_sample(point);
  add_estimation(point);
  point->add_option("--tau", tau, "Quantile level");

  auto* curve = app.add_subcommand("curve", "Estimated partial quantile curve");
  add_sample(curve);
  add_estimation(curve);
  curve->add_option("--taus", curve_taus, "start:stop:step or a comma list")->capture_default_str();

  auto* comparability_cmd = app.add_subcommand("comparability", "Estimated partial quantile comparability");
  add_sample(comparability_cmd);
  add_estimation(comparability_cmd);
  comparability_cmd->add_option("--taus", comp_taus, "Levels spanning U")->capture_default_str();

  auto* rearrange_cmd = app.add_subcommand("rearrange", "Monotone repair of a curve record");
  rearrange_cmd->add_option("--curve", curve_path, "Curve JSON written by `curve`")->required();
  rearrange_cmd->add_option("--kappa", rkappa, "Norm order for the diagnostic (>= 1)");
  rearrange_cmd->add_option("--sup-bound", sup_bound, "Bound on the sup error, for the diagnostic verdict");

  auto* region_cmd = app.add_subcommand("region", "Dispersion region on a grid");
  region_cmd->add_option("--model", model, "Bundled model name or JSON config");
  region_cmd->add_option("--input,-i", input, "Observations CSV (estimated region)");
  region_cmd->add_option("--order", order_spec, "Order for --input");
  region_cmd->add_option("--theta", theta, "Index half-width level");
  region_cmd->add_option("--eta", eta, "Comparability level (default: theta)");
  region_cmd->add_option("--kappa", kappa, "Coverage target; calibrates theta");
  region_cmd->add_option("--g", g_name, "Level map for --kappa")->check(CLI::IsMember({"identity"}));
  region_cmd->add_option("--grid", region_grid, "Grid shape")->capture_default_str();
  region_cmd->add_option("--lower", lower_spec, "Grid lower corner");
  region_cmd->add_option("--upper", upper_spec, "Grid upper corner");

  auto* solve = app.add_subcommand("solve", "Annealed hit-and-run search for the population point");
  solve->add_option("--model", model, "Bundled model name or JSON config");
  solve->add_option("--tau", tau, "Quantile level");
  solve->add_option("--pbar", pbar, "Lower bound on p_tau");
  solve->add_option("--eps", eps, "Target accuracy");
  solve->add_option("--delta", delta, "Failure probability");
  solve->add_option("--chains", chains, "Number of chains (default from dimension)");
  solve->add_option("--walk", walk, "Steps per chain per phase");
  solve->add_option("--mc", mc, "Use a Monte Carlo oracle over this many draws");

  auto* oracle = app.add_subcommand("oracle", "Closed-form population partial quantiles");
  oracle->add_option("--model", model, "Bundled model name or JSON config");
  oracle->add_option("--tau", tau, "Quantile level");
  oracle->add_option("--taus", taus_spec, "Several levels instead of --tau");
  oracle->add_flag("--comparability", with_comparability, "Also report the comparability");

  auto* demo = app.add_subcommand("thks-demo", "Exact partial quantiles of the bundled THKS outcomes");
  demo->add_option("--counts", counts_path, "label,count CSV (default: bundled)");
  demo->add_option("--edges", edges_path, "Edge list (default: bundled)");

  auto* simulate = app.add_subcommand("simulate", "Draw a sample from a bundled model");
  simulate->add_option("--model", model, "Bundled model name or JSON config");
  simulate->add_option("--n", n, "Number of draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

#ifdef _OPENMP
  if (common.threads > 0) omp_set_num_threads(common.threads);
#endif

  const Emitter out{common};
  const std::optional<double> eps_override = slack >= 0.0 ? std::optional<double>(slack) : std::nullopt;

  try {
    if (*indices) {
      const Sample sample = load_sample(input, order_spec);
      EvaluationGrid grid;
      if (!curve_path.empty()) {
        grid = point_grid(io::numeric_matrix(io::read_csv(curve_path)));
      } else {
        if (!sample.order().is_orthant()) throw Error(ErrorCode::InvalidArgument, "grids need the orthant order; use --points");
        const Eigen::VectorXd lo = lower_spec.empty() ? Eigen::VectorXd(sample.observations().colwise().minCoeff().transpose()) : parse_vector(lower_spec);
        const Eigen::VectorXd hi = upper_spec.empty() ? Eigen::VectorXd(sample.observations().colwise().maxCoeff().transpose()) : parse_vector(upper_spec);
        grid = make_grid(grid_spec, lo, hi);
      }
      const auto field = estimate_index_field(sample, grid.points);
      double mean_p = 0.0;
      for (const auto& e : field) mean_p += e.p_hat;
      mean_p /= static_cast<double>(field.size());
      const std::string summary = "n = " + std::to_string(sample.size()) + ", " + std::to_string(field.size()) +
                                  " grid points, mean p̂ = " + fmt(mean_p);
      if (common.format == "csv") {
        std::ostringstream s;
        auto names = coordinate_names(sample.dimension());
        for (const auto& nm : names) s << nm << ",";
        s << "tau_hat,p_hat,se_tau\n";
        for (const auto& e : field) {
          for (Index j = 0; j < e.x.size(); ++j) s << csv_number(e.x[j]) << ",";
          s << (e.tau_hat ? csv_number(*e.tau_hat) : "") << "," << csv_number(e.p_hat) << ","
            << (e.se_tau ? csv_number(*e.se_tau) : "") << "\n";
        }
        out.emit(s.str(), summary);
      } else {
        json records = json::array();
        for (const auto& e : field) records.push_back(io::to_json(e));
        json payload = {{"source", sample.source()}, {"order", sample.order().describe()}, {"n", sample.size()},
                        {"field", records}};
        if (!grid.shape.empty()) payload["shape"] = grid.shape;
        out.emit_json("index-field", payload, summary);
      }
      return 0;
    }

    if (*point) {
      const Sample sample = load_sample(input, order_spec);
      const auto e = estimate_point(sample, tau, parse_candidates(candidates), eps_override);
      std::string summary = "x̂_" + fmt(tau) + " = " + fmt_point(e.x_hat) + ", p̂ = " + fmt(e.p_hat) +
                            ", τ̂ at x̂ = " + fmt(e.tau_hat_at_x) + (e.feasible ? "" : " (infeasible)");
      if (const DagOrder* dag = sample.order().dag()) summary += " [" + dag->label(static_cast<Index>(e.x_hat[0])) + "]";
      if (common.format == "csv") {
        std::ostringstream s;
        for (const auto& nm : coordinate_names(sample.dimension())) s << nm << ",";
        s << "tau,p_hat,tau_hat_at_x,epsilon_n,feasible\n";
        for (Index j = 0; j < e.x_hat.size(); ++j) s << csv_number(e.x_hat[j]) << ",";
        s << csv_number(tau) << "," << csv_number(e.p_hat) << "," << csv_number(e.tau_hat_at_x) << ","
          << csv_number(e.epsilon_n) << "," << (e.feasible ? 1 : 0) << "\n";
        out.emit(s.str(), summary);
      } else {
        out.emit_json("point-estimate", {{"source", sample.source()}, {"estimate", io::to_json(e)},
                                         {"candidates", candidates}}, summary);
      }
      return 0;
    }

    if (*curve) {
      const Sample sample = load_sample(input, order_spec);
      const auto grid = parse_taus(curve_taus);
      const auto estimates = estimate_points(sample, grid, parse_candidates(candidates), eps_override);
      const auto c = curve_from_estimates(estimates, sample.order());
      const std::string summary = std::to_string(grid.size()) + " levels, " +
                                  (c.monotone_flag ? "monotone" : "not monotone") +
                                  ", median estimate " + fmt_point(estimates[estimates.size() / 2].x_hat);
      if (common.format == "csv") {
        std::ostringstream s;
        s << "tau,";
        for (const auto& nm : coordinate_names(sample.dimension())) s << nm << ",";
        s << "p_hat,tau_hat_at_x,feasible\n";
        for (const auto& e : estimates) {
          s << csv_number(e.tau) << ",";
          for (Index j = 0; j < e.x_hat.size(); ++j) s << csv_number(e.x_hat[j]) << ",";
          s << csv_number(e.p_hat) << "," << csv_number(e.tau_hat_at_x) << "," << (e.feasible ? 1 : 0) << "\n";
        }
        out.emit(s.str(), summary);
      } else {
        json levels = json::array();
        for (const auto& e : estimates) levels.push_back(io::to_json(e));
        out.emit_json("quantile-curve", {{"source", sample.source()}, {"curve", io::to_json(c)}, {"estimates", levels}},
                      summary);
      }
      return 0;
    }

    if (*comparability_cmd) {
      const Sample sample = load_sample(input, order_spec);
      const auto grid = parse_taus(comp_taus);
      const auto c = estimate_comparability(sample, grid, parse_candidates(candidates), eps_override);
      const std::string summary = "℘̂ = " + fmt(c.value, 3) + " at τ̂* = " + fmt(c.tau_star, 3);
      out.emit_json("comparability", {{"source", sample.source()},
                                      {"comparability", io::to_json(c)},
                                      {"se_note", "valid when the minimizing level is unique"}},
                    summary);
      return 0;
    }

    if (*rearrange_cmd) {
      std::ifstream in(curve_path);
      if (!in) throw Error(ErrorCode::IoError, "cannot open " + curve_path);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, curve_path + ": " + e.what());
      }
      const QuantileCurve c = io::curve_from_json(j);
      const auto r = rearrange(c);
      const auto env = majorant_minorant(c);
      json payload = {{"rearranged", io::to_json(r)}, {"meet_envelope", io::to_json(env.meet)},
                      {"join_envelope", io::to_json(env.join)}, {"kappa", rkappa}};
      const auto diag = monotonicity_diagnostic(c, rkappa, sup_bound >= 0.0 ? sup_bound : 0.0);
      payload["distance"] = diag.distance;
      std::string summary = "D = " + fmt(diag.distance);
      if (sup_bound >= 0.0) {
        payload["verdict"] = to_string(diag.verdict);
        payload["verdict_note"] = MonotonicityDiagnostic::kCaveat;
        summary += ", " + std::string(to_string(diag.verdict));
      }
      out.emit_json("rearrangement", payload, summary);
      return 0;
    }

    if (*region_cmd) {
      const bool from_sample = !input.empty();
      std::optional<Sample> sample;
      std::optional<PopulationModel> pm;
      Eigen::VectorXd lo, hi;
      if (from_sample) {
        sample.emplace(load_sample(input, order_spec));
        lo = sample->observations().colwise().minCoeff().transpose();
        hi = sample->observations().colwise().maxCoeff().transpose();
      } else {
        pm.emplace(io::load_model(model));
        if (pm->as<CompleteOrderScore>()) {
          const auto* c = pm->as<CompleteOrderScore>();
          if (c->weights.size() != 1) throw Error(ErrorCode::InvalidArgument, "score regions need a 1-d model");
          lo = Eigen::VectorXd::Constant(1, c->score_law.quantile(0.001) / c->weights[0]);
          hi = Eigen::VectorXd::Constant(1, c->score_law.quantile(0.999) / c->weights[0]);
          if (lo[0] > hi[0]) std::swap(lo, hi);
        } else {
          lo = pm->support_lower();
          hi = pm->support_upper();
        }
      }
      if (!lower_spec.empty()) lo = parse_vector(lower_spec);
      if (!upper_spec.empty()) hi = parse_vector(upper_spec);

      EvaluationGrid grid;
      if (pm && pm->as<FiniteModel>()) {
        const auto n_nodes = pm->as<FiniteModel>()->order.dag()->size();
        Eigen::MatrixXd codes(n_nodes, 1);
        for (Index i = 0; i < n_nodes; ++i) codes(i, 0) = static_cast<double>(i);
        grid = point_grid(codes);
      } else {
        grid = make_grid(region_grid, lo, hi);
      }
      const RegionEvaluator ev = from_sample ? RegionEvaluator::from_sample(*sample, grid)
                                             : RegionEvaluator::from_model(*pm, grid);
      Region r;
      json extra;
      if (kappa >= 0.0) {
        auto cal = calibrate_kappa(ev, kappa);
        extra["kappa"] = kappa;
        extra["theta_star"] = cal.theta_star;
        extra["g"] = g_name;
        r = std::move(cal.region);
      } else {
        if (theta < 0.0) throw Error(ErrorCode::InvalidArgument, "give --theta (and --eta) or --kappa");
        r = ev.region(theta, eta >= 0.0 ? eta : theta);
      }
      const std::string summary = "θ = " + fmt(r.theta) + ", η = " + fmt(r.eta) + ": " + std::to_string(r.count()) +
                                  " of " + std::to_string(r.grid.size()) + " grid points, coverage " +
                                  fmt(r.coverage_hat);
      if (common.format == "csv") {
        std::ostringstream s;
        for (const auto& nm : coordinate_names(r.grid.points.cols())) s << nm << ",";
        s << "member\n";
        for (Index i = 0; i < r.grid.size(); ++i) {
          for (Index j = 0; j < r.grid.points.cols(); ++j) s << csv_number(r.grid.points(i, j)) << ",";
          s << int(r.membership[static_cast<std::size_t>(i)]) << "\n";
        }
        out.emit(s.str(), summary);
      } else {
        json payload = {{"region", io::to_json(r)}, {"source", from_sample ? input : pm->name()}};
        for (auto& [k, v] : extra.items()) payload[k] = v;
        out.emit_json("region", payload, summary);
      }
      return 0;
    }

    if (*solve) {
      const PopulationModel pm = io::load_model(model);
      LogConcaveProblem problem = problem_from_model(pm, tau, pbar, eps, delta);
      std::optional<PooledProbabilityOracle> pooled;
      if (mc > 0) {
        Rng rng = make_rng(common.seed, 0x0c1e);
        pooled.emplace(pm, problem.cone, mc, rng);
        problem.probabilities = [&pooled](const Eigen::VectorXd& x) { return (*pooled)(x); };
        problem.oracle_relative_error = 3.0 / std::sqrt(static_cast<double>(mc));
      }
      SolverOptions opt;
      opt.seed = common.seed;
      opt.chains = chains;
      opt.walk_length = walk;
      const auto r = anneal_optimize(problem, opt);
      const std::string summary = "x* = " + fmt_point(r.x) + ", p* = " + fmt(r.p_star) + " after " +
                                  std::to_string(r.phases) + " phases";
      out.emit_json("solver", {{"model", pm.name()}, {"tau", tau}, {"pbar", pbar}, {"epsilon", eps}, {"delta", delta},
                               {"oracle", mc > 0 ? "monte-carlo" : "closed-form"}, {"result", io::to_json(r)}},
                    summary);
      return 0;
    }

    if (*oracle) {
      const PopulationModel pm = io::load_model(model);
      const std::vector<double> grid = taus_spec.empty() ? std::vector<double>{tau} : parse_taus(taus_spec);
      std::vector<PartialQuantileResult> results;
      for (double t : grid) results.push_back(partial_quantile(pm, t));
      const auto& first = results.front();
      std::string summary = first.points.empty() ? "Q(" + fmt(first.tau) + ") is empty"
                            : first.whole_support
                                ? "every support point qualifies at " + fmt(first.tau) + ", p = " + fmt(first.p_tau, 6)
                                : "x_" + fmt(first.tau) + " = " + fmt_point(first.points.front(), 6) +
                                      ", p = " + fmt(first.p_tau, 6);
      if (!first.labels.empty()) summary += " [" + first.labels.front() + "]";
      std::optional<ComparabilityResult> comp;
      if (with_comparability) {
        comp = comparability(pm);
        summary += "; ℘ = " + fmt(comp->value, 6) + " at τ* = " + fmt(comp->tau_star, 6);
      }
      if (common.format == "csv") {
        std::ostringstream s;
        s << "tau,";
        for (const auto& nm : coordinate_names(pm.dimension())) s << nm << ",";
        s << "p_tau\n";
        for (const auto& r : results)
          for (const auto& x : r.points) {
            s << csv_number(r.tau) << ",";
            for (Index j = 0; j < x.size(); ++j) s << csv_number(x[j]) << ",";
            s << csv_number(r.p_tau) << "\n";
          }
        out.emit(s.str(), summary);
      } else {
        json levels = json::array();
        for (const auto& r : results) levels.push_back(io::to_json(r));
        json payload = {{"model", pm.name()}, {"levels", levels}};
        if (comp) payload["comparability"] = {{"value", comp->value}, {"tau_star", comp->tau_star}, {"analytic", comp->analytic}};
        out.emit_json("oracle", payload, summary);
      }
      return 0;
    }

    if (*demo) {
      std::vector<std::string> labels = thks::labels();
      std::vector<std::int64_t> counts = thks::counts();
      PartialOrder order = thks::order();
      if (!counts_path.empty()) {
        labels.clear();
        counts.clear();
        for (auto& [l, c] : io::read_node_counts(counts_path)) {
          labels.push_back(l);
          counts.push_back(c);
        }
      }
      if (!edges_path.empty() || !counts_path.empty())
        order = edges_path.empty() ? thks::order() : io::dag_from_edges(io::read_edge_list(edges_path), labels);
      const auto dist = FiniteDistribution<Rational>::from_counts(labels, counts);
      const std::vector<Rational> levels{Rational(1, 4), Rational(1, 2), Rational(3, 4)};
      const auto table = finite_exact_quantiles(dist, order, levels);
      const auto& median = table.levels[1];

      std::string median_label = median.points.empty() ? std::string("(none)") : table.atoms[median.points.front()].label;
      const std::string summary = "partial median: " + median_label;
      if (common.format == "csv") {
        std::ostringstream s;
        s << "label,count,below,above,comparable,tau\n";
        for (std::size_t i = 0; i < table.atoms.size(); ++i) {
          const auto& a = table.atoms[i];
          s << a.label << "," << counts[i] << "," << fraction(a.below) << "," << fraction(a.above) << ","
            << fraction(a.comparable) << "," << (a.tau ? fraction(*a.tau) : "") << "\n";
        }
        out.emit(s.str(), summary);
        return 0;
      }
      json atoms = json::array();
      for (std::size_t i = 0; i < table.atoms.size(); ++i) {
        const auto& a = table.atoms[i];
        atoms.push_back({{"label", a.label},
                         {"count", counts[i]},
                         {"below", fraction(a.below)},
                         {"above", fraction(a.above)},
                         {"comparable", fraction(a.comparable)},
                         {"tau", a.tau ? json(fraction(*a.tau)) : json(nullptr)},
                         {"tau_value", a.tau ? json(to_double(*a.tau)) : json(nullptr)},
                         {"p_value", to_double(a.comparable)}});
      }
      json lv = json::array();
      for (const auto& l : table.levels) {
        json pts = json::array();
        for (auto k : l.points) pts.push_back(table.atoms[k].label);
        json surface = json::array();
        for (auto k : l.surface) surface.push_back(table.atoms[k].label);
        lv.push_back({{"tau", fraction(l.tau)}, {"points", pts}, {"surface", surface},
                      {"p_tau", l.p_tau ? json(fraction(*l.p_tau)) : json(nullptr)}});
      }
      const json record = io::envelope("thks", {{"atoms", atoms}, {"levels", lv}, {"partial_median", median_label}});

      if (common.output.empty() && common.format == "json" && !app.get_option("--format")->count()) {
        // Human-readable table by default; --format json forces the record.
        std::printf("%-16s %6s %10s %10s %10s %8s\n", "outcome", "count", "P(X<=x)", "P(X>=x)", "p_x", "tau_x");
        for (std::size_t i = 0; i < table.atoms.size(); ++i) {
          const auto& a = table.atoms[i];
          std::printf("%-16s %6lld %10.4f %10.4f %10.4f %8.4f\n", a.label.c_str(), static_cast<long long>(counts[i]),
                      to_double(a.below), to_double(a.above), to_double(a.comparable),
                      a.tau ? to_double(*a.tau) : std::nan(""));
        }
        for (const auto& l : table.levels) {
          std::string names;
          for (auto k : l.points) names += (names.empty() ? "" : ", ") + table.atoms[k].label;
          std::printf("tau = %-4s Q* = {%s}  p_tau = %s\n", fraction(l.tau).c_str(), names.c_str(),
                      l.p_tau ? fraction(*l.p_tau).c_str() : "-");
        }
        std::printf("%s\n", summary.c_str());
        return 0;
      }
      out.emit(record.dump(2) + "\n", summary);
      return 0;
    }

    if (*simulate) {
      const PopulationModel pm = io::load_model(model);
      if (n < 1) throw Error(ErrorCode::InvalidArgument, "--n must be positive");
      Rng rng = make_rng(common.seed);
      const Eigen::MatrixXd draws = pm.sample(n, rng);
      std::ostringstream s;
      if (const auto* f = pm.as<FiniteModel>()) {
        s << "label\n";
        for (Index i = 0; i < draws.rows(); ++i) s << f->order.dag()->label(static_cast<Index>(draws(i, 0))) << "\n";
      } else {
        io::write_matrix_csv(s, draws, coordinate_names(pm.dimension()));
      }
      out.emit(s.str(), std::to_string(n) + " draws from " + pm.name() + " (seed " + std::to_string(common.seed) + ")");
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "pq: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::invalid_argument& e) {
    std::cerr << "pq: malformed number: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "pq: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
