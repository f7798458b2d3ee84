// hpsteal: train models, steal their hyperparameters, and run the defense and
// cost experiments from the command line.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hpsteal/attack.hpp"
#include "hpsteal/defense.hpp"
#include "hpsteal/experiments.hpp"
#include "hpsteal/report.hpp"

using namespace hpsteal;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string algorithm;
  std::string data;
  std::string task;
  std::string target;
  std::string model;
  std::optional<double> lambda;
  std::optional<double> lambda2;
  std::optional<double> sigma;
  std::optional<int> hidden;
  std::string decimals = "1,2,3,4,5";
  std::string grid;
  std::string deltas = "1e-6,1e-5,1e-4,1e-3";
  std::string versus;
  int folds = kDefaultFolds;
  double fraction = 0.01;
  double test_fraction = 0.2;
  long coord = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  bool strict = false;
  bool raw = false;
  double tol = 1e-8;
  long max_iters = 200000;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> values;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("{}: cannot parse '{}'", what, item));
    }
  }
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, fmt::format("{} is empty", what));
  return values;
}

std::vector<int> parse_ints(const std::string& text, const char* what) {
  std::vector<int> values;
  for (double v : parse_doubles(text, what)) {
    if (v != std::floor(v)) throw Error(ErrorCode::InvalidArgument, fmt::format("{}: {} is not an integer", what, v));
    values.push_back(static_cast<int>(v));
  }
  return values;
}

AlgorithmSpec make_spec(const Options& o) {
  if (o.algorithm.empty()) throw Error(ErrorCode::InvalidArgument, "--algorithm is required");
  AlgorithmSpec spec = AlgorithmSpec::make(parse_algorithm(o.algorithm));
  if (o.sigma) {
    if (!is_kernel(spec.id))
      throw Error(ErrorCode::InvalidArgument, fmt::format("--sigma does not apply to {}", to_string(spec.id)));
    spec.kernel_sigma = *o.sigma;
  }
  if (o.hidden) {
    if (!is_neural(spec.id))
      throw Error(ErrorCode::InvalidArgument, fmt::format("--hidden does not apply to {}", to_string(spec.id)));
    spec.nn_hidden = *o.hidden;
  }
  spec.validate();
  return spec;
}

Hyperparams make_hp(const Options& o, const AlgorithmSpec& spec) {
  Hyperparams hp;
  if (!o.lambda) throw Error(ErrorCode::InvalidArgument, "--lambda is required");
  hp.lambda = *o.lambda;
  if (has_two_hyperparams(spec.id)) {
    if (!o.lambda2) throw Error(ErrorCode::InvalidArgument, "ENet needs --lambda2");
    hp.lambda2 = o.lambda2;
  } else if (o.lambda2) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("--lambda2 does not apply to {}", to_string(spec.id)));
  }
  hp.validate(spec.id);
  return hp;
}

TrainConfig make_cfg(const Options& o) {
  TrainConfig cfg;
  cfg.tol = o.tol;
  cfg.max_iters = o.max_iters;
  cfg.seed = o.seed;
  return cfg;
}

// --target as a name or 0-based index; the last column when absent.
TargetColumn target_of(const Options& o) {
  if (!o.target.empty()) {
    if (std::all_of(o.target.begin(), o.target.end(), [](unsigned char c) { return std::isdigit(c); }))
      return static_cast<std::size_t>(std::stoul(o.target));
    return o.target;
  }
  std::ifstream in(o.data);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", o.data));
  std::string line;
  std::getline(in, line);
  const auto cells = std::count(line.begin(), line.end(), ',') + 1;
  return static_cast<std::size_t>(cells - 1);
}

// "synth:gaussian,N,DIM" and "synth:regression,N,DIM" build synthetic sets.
Dataset load_data(const Options& o, const AlgorithmSpec* spec) {
  if (o.data.empty()) throw Error(ErrorCode::InvalidArgument, "--data is required");
  Dataset ds = [&] {
    if (o.data.rfind("synth:", 0) == 0) {
      const auto parts = split_list(o.data.substr(6));
      if (parts.size() != 3) throw Error(ErrorCode::InvalidArgument, "synthetic data is synth:KIND,N,DIM");
      const auto n = static_cast<Index>(std::stol(parts[1]));
      const auto dim = static_cast<Index>(std::stol(parts[2]));
      if (parts[0] == "gaussian") return synth_gaussian(n, dim, o.seed);
      if (parts[0] == "regression") return synth_regression(n, dim, o.seed);
      throw Error(ErrorCode::InvalidArgument, fmt::format("unknown synthetic kind '{}'", parts[0]));
    }
    Task task = Task::Regression;
    if (!o.task.empty())
      task = parse_task(o.task);
    else if (spec)
      task = task_of(spec->id);
    return load_csv(o.data, target_of(o), task);
  }();
  return o.raw ? ds : preprocess(ds);
}

std::optional<GramMatrix> gram_for(const AlgorithmSpec& spec, const Dataset& ds) {
  if (!is_kernel(spec.id)) return std::nullopt;
  return gram_gaussian_auto(ds, spec.kernel_sigma.value_or(kDefaultSigma));
}

const GramMatrix* ptr(const std::optional<GramMatrix>& K) { return K ? &*K : nullptr; }

std::vector<double> grid_of(const Options& o) {
  return o.grid.empty() ? default_grid() : parse_doubles(o.grid, "--grid");
}

template <typename Report>
void emit(const Options& o, const std::vector<Report>& reports) {
  const Format format = parse_format(o.format);
  if (o.out.empty() || o.out == "-")
    write_report(std::cout, reports, format);
  else
    emit_report(reports, format, o.out);
}

void emit_json(const Options& o, const Json& doc) {
  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty() || o.out == "-")
    std::cout << text;
  else
    write_text_file(o.out, text);
}

// AllMasked and NotConverged are reported as warnings unless --strict.
bool tolerated(const Options& o, const Error& e) {
  return !o.strict && (e.code() == ErrorCode::AllMasked || e.code() == ErrorCode::NotConverged);
}

void warn(const Options& o, const std::string& command, const Error& e) {
  Json doc = Json::array();
  doc.push_back({{"command", command}, {"error", std::string(to_string(e.code()))}, {"warning", e.what()}});
  emit_json(o, doc);
}

void check_converged(const Options& o, const ModelParams& params, const AlgorithmSpec& spec) {
  const auto& r = params.solver_report;
  if (r.converged) return;
  const std::string msg =
      fmt::format("{} stopped after {} iterations ({})", to_string(spec.id), r.iterations, r.criterion);
  if (o.strict) throw Error(ErrorCode::NotConverged, msg);
  std::cerr << "warning: " << msg << '\n';
}

void cmd_train(const Options& o) {
  const AlgorithmSpec spec = make_spec(o);
  const Hyperparams hp = make_hp(o, spec);
  const Dataset ds = load_data(o, &spec);
  const auto K = gram_for(spec, ds);
  TrainedModel model{spec, hp, train(spec, hp, ds, ptr(K), make_cfg(o))};
  check_converged(o, model.params, spec);
  if (parse_format(o.format) == Format::Json) {
    Json doc = to_json(model);
    if (!model.params.solver_report.converged) doc["warning"] = "solver did not converge";
    emit_json(o, doc);
    return;
  }
  emit(o, std::vector<TrainedModel>{model});
}

void cmd_steal(const Options& o) {
  try {
    TrainedModel model;
    std::optional<Hyperparams> truth;
    if (!o.model.empty()) {
      model = load_model(o.model);
      truth = model.hyperparams;
    } else {
      model.spec = make_spec(o);
      model.hyperparams = make_hp(o, model.spec);
      truth = model.hyperparams;
    }
    const Dataset ds = load_data(o, &model.spec);
    const auto K = gram_for(model.spec, ds);
    const TrainConfig cfg = make_cfg(o);
    if (o.model.empty()) {
      model.params = train(model.spec, model.hyperparams, ds, ptr(K), cfg);
      check_converged(o, model.params, model.spec);
    }
    StealReport rep = steal(model.spec, truth, model.params, ds, ptr(K), cfg);
    if (o.strict && !rep.warnings.empty())
      throw Error(ErrorCode::AllMasked, fmt::format("steal produced warnings: {}", rep.warnings.front()));
    emit(o, std::vector<StealReport>{rep});
  } catch (const Error& e) {
    if (!tolerated(o, e)) throw;
    warn(o, "steal", e);
  }
}

void cmd_defend(const Options& o) {
  const AlgorithmSpec spec = make_spec(o);
  const Dataset ds = load_data(o, &spec);
  const auto [train_ds, test_ds] = split(ds, 1.0 - o.test_fraction, o.seed);
  const TrainConfig cfg = make_cfg(o);
  Hyperparams hp;
  if (o.lambda) {
    hp = make_hp(o, spec);
  } else {
    Hyperparams base;
    if (has_two_hyperparams(spec.id)) base.lambda2 = o.lambda2.value_or(1.0);
    hp = base;
    hp.lambda = cross_validate(spec, train_ds, grid_of(o), o.folds, cfg, o.seed, base).best_lambda;
  }
  emit(o, std::vector<RoundingSweep>{defense_sweep(spec, hp, train_ds, test_ds, cfg, parse_ints(o.decimals, "--decimals"))});
}

void cmd_theory(const Options& o) {
  const AlgorithmSpec spec = make_spec(o);
  const Hyperparams hp = make_hp(o, spec);
  const Dataset ds = load_data(o, &spec);
  const TrainConfig cfg = make_cfg(o);
  if (!o.versus.empty()) {
    AlgorithmSpec other = AlgorithmSpec::make(parse_algorithm(o.versus));
    emit(o, std::vector<Sensitivity>{sensitivity_compare(spec, other, ds, hp, cfg)});
    return;
  }
  emit(o, std::vector<PerturbationCurve>{
              perturbation_curve(spec, hp, ds, cfg, static_cast<Index>(o.coord), parse_doubles(o.deltas, "--deltas"))});
}

void cmd_cv(const Options& o) {
  const AlgorithmSpec spec = make_spec(o);
  const Dataset ds = load_data(o, &spec);
  Hyperparams base;
  if (has_two_hyperparams(spec.id)) base.lambda2 = o.lambda2.value_or(1.0);
  emit(o, std::vector<CvResult>{cross_validate(spec, ds, grid_of(o), o.folds, make_cfg(o), o.seed, base)});
}

void cmd_experiment(const Options& o) {
  const AlgorithmSpec spec = make_spec(o);
  const Dataset ds = load_data(o, &spec);
  const auto [train_ds, test_ds] = split(ds, 1.0 - o.test_fraction, o.seed);
  const ExperimentReport r =
      run_experiment(spec, train_ds, test_ds, grid_of(o), o.folds, o.fraction, make_cfg(o), o.seed);
  emit(o, std::vector<StrategyReport>{r.m1, r.m2, r.m3});
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--algorithm", o.algorithm, "RR, LASSO, ENet, KRR, L2LR, L1LR, L2KLR, L1KLR, SVM_RHL, SVM_SHL, "
                                              "KSVM_RHL, KSVM_SHL, NN_REG, NN_CLF");
  sub->add_option("--data", o.data, "CSV file, or synth:gaussian,N,DIM / synth:regression,N,DIM");
  sub->add_option("--task", o.task, "regression or classification (default: from the algorithm)");
  sub->add_option("--target", o.target, "target column name (default: last column)");
  sub->add_option("--lambda", o.lambda, "regularization weight");
  sub->add_option("--lambda2", o.lambda2, "second weight (ENet)");
  sub->add_option("--sigma", o.sigma, "Gaussian kernel bandwidth");
  sub->add_option("--hidden", o.hidden, "hidden units (NN)");
  sub->add_option("--seed", o.seed, "random seed");
  sub->add_option("--tol", o.tol, "solver tolerance");
  sub->add_option("--max-iters", o.max_iters, "solver iteration cap");
  sub->add_option("--out", o.out, "output path (default: stdout)");
  sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_flag("--strict", o.strict, "treat AllMasked and NotConverged as failures");
  sub->add_flag("--raw", o.raw, "skip centering / row normalization");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperparameter stealing attacks, defenses and experiments"};
  app.require_subcommand(1);
  Options o;

  auto* train_cmd = app.add_subcommand("train", "train a model and write its parameters");
  add_common(train_cmd, o);

  auto* steal_cmd = app.add_subcommand("steal", "estimate the hyperparameter of a trained model");
  add_common(steal_cmd, o);
  steal_cmd->add_option("--model", o.model, "model JSON written by train (otherwise train with --lambda)");

  auto* defend_cmd = app.add_subcommand("defend", "rounding defense sweep");
  add_common(defend_cmd, o);
  defend_cmd->add_option("--decimals", o.decimals, "comma-separated decimals, increasing");
  defend_cmd->add_option("--grid", o.grid, "lambda grid for CV when --lambda is absent");
  defend_cmd->add_option("--folds", o.folds, "CV folds");
  defend_cmd->add_option("--test-fraction", o.test_fraction, "held-out fraction");

  auto* theory_cmd = app.add_subcommand("theory", "perturbation curve or gradient-approximation sensitivity");
  add_common(theory_cmd, o);
  theory_cmd->add_option("--coord", o.coord, "coordinate to perturb");
  theory_cmd->add_option("--deltas", o.deltas, "comma-separated perturbations, increasing");
  theory_cmd->add_option("--versus", o.versus, "second algorithm: compare gradient-approximation norms");

  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation over a lambda grid");
  add_common(cv_cmd, o);
  cv_cmd->add_option("--grid", o.grid, "comma-separated lambdas");
  cv_cmd->add_option("--folds", o.folds, "number of folds");

  auto* exp_cmd = app.add_subcommand("experiment", "M1 / M2 / M3 train-steal-retrain comparison");
  add_common(exp_cmd, o);
  exp_cmd->add_option("--grid", o.grid, "comma-separated lambdas");
  exp_cmd->add_option("--folds", o.folds, "number of folds");
  exp_cmd->add_option("--fraction", o.fraction, "M3 sample fraction");
  exp_cmd->add_option("--test-fraction", o.test_fraction, "held-out fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*train_cmd) cmd_train(o);
    if (*steal_cmd) cmd_steal(o);
    if (*defend_cmd) cmd_defend(o);
    if (*theory_cmd) cmd_theory(o);
    if (*cv_cmd) cmd_cv(o);
    if (*exp_cmd) cmd_experiment(o);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return is_numerical(e.code()) ? kExitNumerical : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
