#include "hpsteal/report.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

namespace hpsteal {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

template <typename T>
std::string opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>)
    return num(*v);
  else
    return fmt::format("{}", *v);
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(number_to_json(v[i]));
  return arr;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, "expected a JSON array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = number_from_json(j[i]);
  return v;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::Parse, "expected a non-empty JSON array of rows");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != cols) throw Error(ErrorCode::Parse, "ragged matrix rows");
    m.row(static_cast<Index>(i)) = vector_from_json(j[i]).transpose();
  }
  return m;
}

Json hyperparams_to_json(const Hyperparams& hp) {
  Json j{{"lambda", number_to_json(hp.lambda)}};
  if (hp.lambda2) j["lambda2"] = number_to_json(*hp.lambda2);
  return j;
}

Hyperparams hyperparams_from_json(const Json& j) {
  Hyperparams hp;
  hp.lambda = number_from_json(j.at("lambda"));
  if (j.contains("lambda2")) hp.lambda2 = number_from_json(j.at("lambda2"));
  return hp;
}

template <typename T>
Json opt_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>)
    return number_to_json(*v);
  else
    return Json(*v);
}

}  // namespace

Format parse_format(std::string_view text) {
  std::string low(text);
  for (char& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (low == "json") return Format::Json;
  if (low == "csv") return Format::Csv;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown format '{}'; use json or csv", text));
}

Json number_to_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error(ErrorCode::Parse, fmt::format("expected a number, got {}", j.dump()));
}

Json to_json(const TrainedModel& model) {
  const ModelParams& p = model.params;
  const SolverReport& s = p.solver_report;
  Json j;
  j["algorithm"] = std::string(to_string(model.spec.id));
  if (model.spec.kernel_sigma) j["kernel_sigma"] = number_to_json(*model.spec.kernel_sigma);
  if (model.spec.nn_hidden) j["nn_hidden"] = *model.spec.nn_hidden;
  j["hyperparams"] = hyperparams_to_json(model.hyperparams);
  if (p.primal_w) j["w"] = vector_to_json(*p.primal_w);
  if (p.dual_alpha) j["alpha"] = vector_to_json(*p.dual_alpha);
  if (p.nn)
    j["nn"] = {{"W1", matrix_to_json(p.nn->W1)},
               {"b1", vector_to_json(p.nn->b1)},
               {"w2", vector_to_json(p.nn->w2)},
               {"b2", number_to_json(p.nn->b2)}};
  j["trained_objective"] = number_to_json(p.trained_objective);
  Json trace = Json::array();
  for (double v : s.objective_trace) trace.push_back(number_to_json(v));
  j["solver_report"] = {{"iterations", s.iterations},
                        {"final_change", number_to_json(s.final_change)},
                        {"final_grad_norm", number_to_json(s.final_grad_norm)},
                        {"converged", s.converged},
                        {"criterion", s.criterion},
                        {"degenerate_lasso", s.degenerate_lasso},
                        {"objective_trace", trace}};
  return j;
}

TrainedModel model_from_json(const Json& j) {
  try {
    TrainedModel m;
    m.spec.id = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("kernel_sigma")) m.spec.kernel_sigma = number_from_json(j.at("kernel_sigma"));
    if (j.contains("nn_hidden")) m.spec.nn_hidden = j.at("nn_hidden").get<int>();
    m.spec.validate();
    m.hyperparams = hyperparams_from_json(j.at("hyperparams"));
    ModelParams& p = m.params;
    if (j.contains("w")) p.primal_w = vector_from_json(j.at("w"));
    if (j.contains("alpha")) p.dual_alpha = vector_from_json(j.at("alpha"));
    if (j.contains("nn")) {
      const Json& n = j.at("nn");
      NnParams nn;
      nn.W1 = matrix_from_json(n.at("W1"));
      nn.b1 = vector_from_json(n.at("b1"));
      nn.w2 = vector_from_json(n.at("w2"));
      nn.b2 = number_from_json(n.at("b2"));
      p.nn = std::move(nn);
    }
    if (j.contains("trained_objective")) p.trained_objective = number_from_json(j.at("trained_objective"));
    if (j.contains("solver_report")) {
      const Json& s = j.at("solver_report");
      SolverReport& r = p.solver_report;
      r.iterations = s.value("iterations", 0L);
      if (s.contains("final_change")) r.final_change = number_from_json(s.at("final_change"));
      if (s.contains("final_grad_norm")) r.final_grad_norm = number_from_json(s.at("final_grad_norm"));
      r.converged = s.value("converged", false);
      r.criterion = s.value("criterion", std::string{});
      r.degenerate_lasso = s.value("degenerate_lasso", false);
      if (s.contains("objective_trace"))
        for (const auto& v : s.at("objective_trace")) r.objective_trace.push_back(number_from_json(v));
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, fmt::format("malformed model document: {}", e.what()));
  }
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, fmt::format("{}: {}", path.string(), e.what()));
  }
  // Accept the single-element array written by emit_report.
  if (j.is_array()) {
    if (j.size() != 1) throw Error(ErrorCode::Parse, "model file must hold exactly one model");
    return model_from_json(j[0]);
  }
  return model_from_json(j);
}

Json to_json(const StealReport& r) {
  Json warnings = Json::array();
  for (const auto& w : r.warnings) warnings.push_back(w);
  return {{"algorithm", std::string(to_string(r.algorithm))},
          {"lambda_true", r.lambda_true ? hyperparams_to_json(*r.lambda_true) : Json(nullptr)},
          {"lambda_hat", hyperparams_to_json(r.lambda_hat)},
          {"relative_error", opt_json(r.relative_error)},
          {"relative_error2", opt_json(r.relative_error2)},
          {"used_rows", r.used_rows},
          {"masked_count", r.masked_count},
          {"excluded_instances", r.excluded_instances},
          {"condition", number_to_json(r.condition)},
          {"warnings", warnings}};
}

StealReport steal_report_from_json(const Json& j) {
  try {
    StealReport r;
    r.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (!j.at("lambda_true").is_null()) r.lambda_true = hyperparams_from_json(j.at("lambda_true"));
    r.lambda_hat = hyperparams_from_json(j.at("lambda_hat"));
    if (!j.at("relative_error").is_null()) r.relative_error = number_from_json(j.at("relative_error"));
    if (!j.at("relative_error2").is_null()) r.relative_error2 = number_from_json(j.at("relative_error2"));
    r.used_rows = j.at("used_rows").get<Index>();
    r.masked_count = j.at("masked_count").get<Index>();
    r.excluded_instances = j.at("excluded_instances").get<Index>();
    r.condition = number_from_json(j.at("condition"));
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, fmt::format("malformed steal report: {}", e.what()));
  }
}

Json to_json(const RoundingSweep& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"decimals", e.decimals},
                       {"lambda_hat", number_to_json(e.lambda_hat)},
                       {"relative_estimation_error", number_to_json(e.relative_estimation_error)},
                       {"relative_perf_error", number_to_json(e.relative_perf_error)},
                       {"perf", number_to_json(e.perf)},
                       {"all_masked", e.all_masked}});
  return {{"algorithm", std::string(to_string(r.algorithm))},
          {"lambda", number_to_json(r.lambda)},
          {"baseline_estimation_error", number_to_json(r.baseline_estimation_error)},
          {"baseline_perf", number_to_json(r.baseline_perf)},
          {"entries", entries}};
}

Json to_json(const PerturbationCurve& r) {
  Json deltas = Json::array(), errors = Json::array();
  for (double d : r.deltas) deltas.push_back(number_to_json(d));
  for (double e : r.abs_errors) errors.push_back(number_to_json(e));
  return {{"algorithm", std::string(to_string(r.algorithm))},
          {"lambda", number_to_json(r.lambda)},
          {"coord", r.coord},
          {"deltas", deltas},
          {"abs_errors", errors},
          {"fitted_slope", number_to_json(r.fitted_slope)},
          {"fitted_quadratic", number_to_json(r.fitted_quadratic)}};
}

Json to_json(const CvResult& r) {
  Json grid = Json::array(), scores = Json::array();
  for (double g : r.grid) grid.push_back(number_to_json(g));
  for (double s : r.mean_scores) scores.push_back(number_to_json(s));
  return {{"algorithm", std::string(to_string(r.algorithm))},
          {"task", std::string(to_string(r.task))},
          {"grid", grid},
          {"mean_scores", scores},
          {"failures", r.failures},
          {"best_lambda", number_to_json(r.best_lambda)},
          {"folds", r.folds},
          {"cost_units", r.cost_units},
          {"trainings", r.trainings}};
}

Json to_json(const StrategyReport& r) {
  return {{"method", std::string(to_string(r.method))},
          {"algorithm", std::string(to_string(r.algorithm))},
          {"sample_fraction", opt_json(r.sample_fraction)},
          {"cv_lambda", number_to_json(r.cv_lambda)},
          {"stolen_lambda", opt_json(r.stolen_lambda)},
          {"final_lambda", number_to_json(r.final_lambda)},
          {"test_perf", number_to_json(r.test_perf)},
          {"cost_units", r.cost_units},
          {"cv_cost_units", r.cv_cost_units},
          {"relative_perf_error_vs_m1", opt_json(r.relative_perf_error_vs_m1)},
          {"speedup_vs_m1", opt_json(r.speedup_vs_m1)}};
}

Json to_json(const Sensitivity& r) {
  return {{"norm_a", number_to_json(r.norm_a)}, {"norm_b", number_to_json(r.norm_b)}};
}

std::vector<std::string> csv_header(const TrainedModel&) { return {"algorithm", "block", "row", "col", "value"}; }

std::vector<std::vector<std::string>> csv_rows(const TrainedModel& model) {
  const std::string name(to_string(model.spec.id));
  std::vector<std::vector<std::string>> rows;
  auto add_vector = [&](const char* block, const Vector& v) {
    for (Index i = 0; i < v.size(); ++i) rows.push_back({name, block, std::to_string(i), "0", num(v[i])});
  };
  const ModelParams& p = model.params;
  if (p.primal_w) add_vector("w", *p.primal_w);
  if (p.dual_alpha) add_vector("alpha", *p.dual_alpha);
  if (p.nn) {
    for (Index i = 0; i < p.nn->W1.rows(); ++i)
      for (Index c = 0; c < p.nn->W1.cols(); ++c)
        rows.push_back({name, "W1", std::to_string(i), std::to_string(c), num(p.nn->W1(i, c))});
    add_vector("b1", p.nn->b1);
    add_vector("w2", p.nn->w2);
    rows.push_back({name, "b2", "0", "0", num(p.nn->b2)});
  }
  return rows;
}

std::vector<std::string> csv_header(const StealReport&) {
  return {"algorithm",      "lambda_true",   "lambda2_true", "lambda_hat",         "lambda2_hat", "relative_error",
          "relative_error2", "used_rows",    "masked_count", "excluded_instances", "condition",   "warnings"};
}

std::vector<std::vector<std::string>> csv_rows(const StealReport& r) {
  std::string warnings;
  for (const auto& w : r.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
  return {{std::string(to_string(r.algorithm)),
           r.lambda_true ? num(r.lambda_true->lambda) : "",
           r.lambda_true ? opt(r.lambda_true->lambda2) : "",
           num(r.lambda_hat.lambda),
           opt(r.lambda_hat.lambda2),
           opt(r.relative_error),
           opt(r.relative_error2),
           std::to_string(r.used_rows),
           std::to_string(r.masked_count),
           std::to_string(r.excluded_instances),
           num(r.condition),
           warnings}};
}

std::vector<std::string> csv_header(const RoundingSweep&) {
  return {"algorithm",           "lambda", "decimals",  "lambda_hat", "relative_estimation_error",
          "relative_perf_error", "perf",   "all_masked"};
}

std::vector<std::vector<std::string>> csv_rows(const RoundingSweep& r) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : r.entries)
    rows.push_back({std::string(to_string(r.algorithm)), num(r.lambda), std::to_string(e.decimals),
                    num(e.lambda_hat), num(e.relative_estimation_error), num(e.relative_perf_error), num(e.perf),
                    e.all_masked ? "true" : "false"});
  return rows;
}

std::vector<std::string> csv_header(const PerturbationCurve&) {
  return {"algorithm", "lambda", "coord", "delta", "abs_error", "fitted_slope", "fitted_quadratic"};
}

std::vector<std::vector<std::string>> csv_rows(const PerturbationCurve& r) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < r.deltas.size(); ++i)
    rows.push_back({std::string(to_string(r.algorithm)), num(r.lambda), std::to_string(r.coord), num(r.deltas[i]),
                    num(r.abs_errors[i]), num(r.fitted_slope), num(r.fitted_quadratic)});
  return rows;
}

std::vector<std::string> csv_header(const CvResult&) {
  return {"algorithm", "folds", "lambda", "mean_score", "failures", "best_lambda", "cost_units"};
}

std::vector<std::vector<std::string>> csv_rows(const CvResult& r) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < r.grid.size(); ++i)
    rows.push_back({std::string(to_string(r.algorithm)), std::to_string(r.folds), num(r.grid[i]),
                    num(r.mean_scores[i]), std::to_string(r.failures[i]), num(r.best_lambda),
                    std::to_string(r.cost_units)});
  return rows;
}

std::vector<std::string> csv_header(const StrategyReport&) {
  return {"method",     "algorithm",  "sample_fraction", "cv_lambda",     "stolen_lambda",
          "final_lambda", "test_perf", "cost_units",     "cv_cost_units", "relative_perf_error_vs_m1",
          "speedup_vs_m1"};
}

std::vector<std::vector<std::string>> csv_rows(const StrategyReport& r) {
  return {{std::string(to_string(r.method)), std::string(to_string(r.algorithm)), opt(r.sample_fraction),
           num(r.cv_lambda), opt(r.stolen_lambda), num(r.final_lambda), num(r.test_perf),
           std::to_string(r.cost_units), std::to_string(r.cv_cost_units), opt(r.relative_perf_error_vs_m1),
           opt(r.speedup_vs_m1)}};
}

std::vector<std::string> csv_header(const Sensitivity&) { return {"norm_a", "norm_b"}; }

std::vector<std::vector<std::string>> csv_rows(const Sensitivity& r) { return {{num(r.norm_a), num(r.norm_b)}}; }

void write_csv_line(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n") == std::string::npos) {
      os << c;
      continue;
    }
    os << '"';
    for (char ch : c) {
      if (ch == '"') os << '"';
      os << ch;
    }
    os << '"';
  }
  os << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) throw Error(ErrorCode::Io, fmt::format("failed writing {}", path.string()));
}

}  // namespace hpsteal
