#include "hpsteal/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <fmt/format.h>

#include "hpsteal/errors.hpp"

namespace hpsteal {

namespace {

struct FoldData {
  Dataset train;
  Dataset validation;
  std::optional<GramMatrix> K;
};

struct CellResult {
  double score = 0.0;
  long long cost = 0;
  bool failed = false;
};

void check_cv_args(const Dataset& ds, const std::vector<double>& grid, int k) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, fmt::format("folds must be >= 2, got {}", k));
  if (ds.rows() < k)
    throw Error(ErrorCode::InvalidArgument, fmt::format("{} rows cannot fill {} folds", ds.rows(), k));
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "lambda grid is empty");
  for (double v : grid)
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::InvalidArgument, fmt::format("grid value {} must be finite and > 0", v));
}

std::vector<FoldData> make_folds(const AlgorithmSpec& spec, const Dataset& ds, int k, std::uint64_t seed) {
  const auto folds = fold_indices(ds.rows(), k, seed);
  std::vector<FoldData> out;
  out.reserve(folds.size());
  for (int f = 0; f < k; ++f) {
    std::vector<Index> train_idx;
    for (int g = 0; g < k; ++g)
      if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    Dataset train_ds = ds.subset(train_idx);
    Dataset val_ds = ds.subset(folds[f]);
    std::optional<GramMatrix> K;
    if (is_kernel(spec.id)) K = gram_gaussian_auto(train_ds, spec.kernel_sigma.value_or(kDefaultSigma));
    out.push_back({std::move(train_ds), std::move(val_ds), std::move(K)});
  }
  return out;
}

CellResult run_cell(const AlgorithmSpec& spec, const FoldData& fold, const Hyperparams& hp, const TrainConfig& cfg,
                    const Scorer& scorer) {
  CellResult cell;
  try {
    const ModelParams params = train(spec, hp, fold.train, fold.K ? &*fold.K : nullptr, cfg);
    cell.cost = training_cost(fold.train, params);
    cell.score = scorer ? scorer(spec, params, fold.train, fold.validation)
                        : test_performance(spec, params, fold.train, fold.validation);
    if (!std::isfinite(cell.score)) cell.failed = true;
  } catch (const Error&) {
    cell.failed = true;
  }
  return cell;
}

CvResult summarize(const AlgorithmSpec& spec, const Dataset& ds, const std::vector<double>& grid, int k,
                   const std::vector<CellResult>& cells) {
  CvResult res;
  res.algorithm = spec.id;
  res.task = ds.task();
  res.grid = grid;
  res.folds = k;
  const bool higher_better = ds.task() == Task::Classification;
  const double worst = higher_better ? -std::numeric_limits<double>::infinity()
                                     : std::numeric_limits<double>::infinity();
  const std::size_t g = grid.size();
  res.mean_scores.assign(g, 0.0);
  res.failures.assign(g, 0);
  for (std::size_t i = 0; i < g; ++i) {
    double total = 0.0;
    for (int f = 0; f < k; ++f) {
      const CellResult& c = cells[i * k + f];
      res.cost_units += c.cost;
      ++res.trainings;
      if (c.failed) {
        ++res.failures[i];
        total = worst;
      } else if (std::isfinite(total)) {
        total += c.score;
      }
    }
    res.mean_scores[i] = std::isfinite(total) ? total / k : worst;
  }
  // Ties go to the smaller lambda.
  std::vector<std::size_t> order(g);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
  std::size_t best = order.front();
  for (std::size_t idx : order) {
    const double s = res.mean_scores[idx], cur = res.mean_scores[best];
    if (higher_better ? s > cur : s < cur) best = idx;
  }
  res.best_lambda = grid[best];
  return res;
}

Hyperparams cell_hp(const Hyperparams& base, double lambda) {
  Hyperparams hp = base;
  hp.lambda = lambda;
  return hp;
}

Hyperparams default_base(const AlgorithmSpec& spec) {
  Hyperparams hp;
  if (has_two_hyperparams(spec.id)) hp.lambda2 = 1.0;
  return hp;
}

const GramMatrix* ptr(const std::optional<GramMatrix>& K) { return K ? &*K : nullptr; }

std::optional<GramMatrix> gram_for(const AlgorithmSpec& spec, const Dataset& ds) {
  if (!is_kernel(spec.id)) return std::nullopt;
  return gram_gaussian_auto(ds, spec.kernel_sigma.value_or(kDefaultSigma));
}

}  // namespace

std::vector<double> default_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}; }

long long training_cost(const Dataset& ds, const ModelParams& params) {
  const long iters = std::max(1L, params.solver_report.iterations);
  return static_cast<long long>(ds.rows()) * iters;
}

std::vector<std::vector<Index>> fold_indices(Index n, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, fmt::format("folds must be >= 2, got {}", k));
  if (n < k) throw Error(ErrorCode::InvalidArgument, fmt::format("{} rows cannot fill {} folds", n, k));
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < perm.size(); ++i) folds[i % k].push_back(perm[i]);
  return folds;
}

CvResult cross_validate(const AlgorithmSpec& spec, const Dataset& ds, const std::vector<double>& grid, int k,
                        const TrainConfig& cfg, std::uint64_t seed, const Hyperparams& base, const Scorer& scorer) {
  check_cv_args(ds, grid, k);
  const auto folds = make_folds(spec, ds, k, seed);
  const long cells_total = static_cast<long>(grid.size()) * k;
  std::vector<CellResult> cells(static_cast<std::size_t>(cells_total));
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < cells_total; ++c) {
    const std::size_t gi = static_cast<std::size_t>(c / k);
    const int f = static_cast<int>(c % k);
    cells[c] = run_cell(spec, folds[f], cell_hp(base, grid[gi]), cfg, scorer);
  }
  return summarize(spec, ds, grid, k, cells);
}

namespace serial {

CvResult cross_validate(const AlgorithmSpec& spec, const Dataset& ds, const std::vector<double>& grid, int k,
                        const TrainConfig& cfg, std::uint64_t seed, const Hyperparams& base, const Scorer& scorer) {
  check_cv_args(ds, grid, k);
  const auto folds = make_folds(spec, ds, k, seed);
  std::vector<CellResult> cells;
  cells.reserve(grid.size() * k);
  for (double lambda : grid)
    for (int f = 0; f < k; ++f) cells.push_back(run_cell(spec, folds[f], cell_hp(base, lambda), cfg, scorer));
  return summarize(spec, ds, grid, k, cells);
}

}  // namespace serial

std::string_view to_string(Method method) {
  switch (method) {
    case Method::M1: return "M1";
    case Method::M2: return "M2";
    case Method::M3: return "M3";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  std::string up(text);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "M1") return Method::M1;
  if (up == "M2") return Method::M2;
  if (up == "M3") return Method::M3;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown method '{}'", text));
}

StrategyReport run_strategy(Method method, const AlgorithmSpec& spec, const Dataset& ds_train,
                            const Dataset& ds_test, const std::vector<double>& grid, int k,
                            std::optional<double> fraction, const TrainConfig& cfg, std::uint64_t seed) {
  StrategyReport rep;
  rep.method = method;
  rep.algorithm = spec.id;
  const Hyperparams base = default_base(spec);

  if (method == Method::M1) {
    const CvResult cv = cross_validate(spec, ds_train, grid, k, cfg, seed, base);
    const auto K = gram_for(spec, ds_train);
    const Hyperparams hp = cell_hp(base, cv.best_lambda);
    const ModelParams params = train(spec, hp, ds_train, ptr(K), cfg);
    rep.cv_lambda = rep.final_lambda = cv.best_lambda;
    rep.cv_cost_units = cv.cost_units;
    rep.cost_units = cv.cost_units + training_cost(ds_train, params);
    rep.test_perf = test_performance(spec, params, ds_train, ds_test);
    return rep;
  }

  if (!fraction || !(*fraction > 0.0 && *fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, fmt::format("{} needs a sample fraction in (0, 1)", to_string(method)));
  rep.sample_fraction = fraction;
  const Dataset sample = split(ds_train, *fraction, seed).first;
  const CvResult cv = cross_validate(spec, sample, grid, k, cfg, seed, base);
  const auto K_sample = gram_for(spec, sample);
  const Hyperparams hp_sample = cell_hp(base, cv.best_lambda);
  const ModelParams sample_params = train(spec, hp_sample, sample, ptr(K_sample), cfg);
  rep.cv_lambda = cv.best_lambda;
  rep.cv_cost_units = cv.cost_units;
  rep.cost_units = cv.cost_units + training_cost(sample, sample_params);

  if (method == Method::M2) {
    rep.final_lambda = cv.best_lambda;
    rep.test_perf = test_performance(spec, sample_params, sample, ds_test);
    return rep;
  }

  StealReport stolen;
  try {
    stolen = steal(spec, std::nullopt, sample_params, sample, ptr(K_sample), cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AllMasked && e.code() != ErrorCode::SingularNormalEquations) throw;
    throw Error(ErrorCode::StrategyFailed, fmt::format("M3 attack failed: {}", e.what()));
  }
  Hyperparams hp_full = stolen.lambda_hat;
  if (!(hp_full.lambda > 0.0) || (hp_full.lambda2 && !(*hp_full.lambda2 > 0.0)))
    throw Error(ErrorCode::StrategyFailed,
                fmt::format("M3 stole a non-positive hyperparameter ({})", hp_full.lambda));
  rep.stolen_lambda = hp_full.lambda;
  rep.final_lambda = hp_full.lambda;
  const auto K_full = gram_for(spec, ds_train);
  const ModelParams params = train(spec, hp_full, ds_train, ptr(K_full), cfg);
  rep.cost_units += training_cost(ds_train, params);
  rep.test_perf = test_performance(spec, params, ds_train, ds_test);
  return rep;
}

void compare_to_baseline(StrategyReport& report, const StrategyReport& m1) {
  const double diff = std::abs(report.test_perf - m1.test_perf);
  report.relative_perf_error_vs_m1 = m1.test_perf != 0.0 ? diff / std::abs(m1.test_perf)
                                     : diff == 0.0       ? 0.0
                                                         : std::numeric_limits<double>::infinity();
  report.speedup_vs_m1 = static_cast<double>(m1.cost_units) / static_cast<double>(report.cost_units);
}

ExperimentReport run_experiment(const AlgorithmSpec& spec, const Dataset& ds_train, const Dataset& ds_test,
                                const std::vector<double>& grid, int k, double fraction, const TrainConfig& cfg,
                                std::uint64_t seed) {
  ExperimentReport out;
  out.m1 = run_strategy(Method::M1, spec, ds_train, ds_test, grid, k, std::nullopt, cfg, seed);
  out.m3 = run_strategy(Method::M3, spec, ds_train, ds_test, grid, k, fraction, cfg, seed);
  compare_to_baseline(out.m3, out.m1);

  // Search for the M2 fraction whose cost lands closest to M3's without going over.
  const double target = static_cast<double>(out.m3.cost_units);
  const double min_fraction = std::max(fraction, 2.0 * k / static_cast<double>(ds_train.rows()));
  double p = std::min(min_fraction, 0.99);
  std::optional<StrategyReport> best_under;
  std::optional<StrategyReport> best_any;
  for (int attempt = 0; attempt < 8; ++attempt) {
    StrategyReport m2 = run_strategy(Method::M2, spec, ds_train, ds_test, grid, k, p, cfg, seed);
    const double cost = static_cast<double>(m2.cost_units);
    auto gap = [&](const StrategyReport& r) { return std::abs(static_cast<double>(r.cost_units) - target); };
    if (cost <= target && (!best_under || cost > static_cast<double>(best_under->cost_units))) best_under = m2;
    if (!best_any || gap(m2) < gap(*best_any)) best_any = m2;
    const double ratio = target / cost;
    if (std::abs(ratio - 1.0) < 0.05) break;
    const double next = std::clamp(p * ratio, min_fraction, 0.99);
    if (next == p) break;
    p = next;
  }
  out.m2 = best_under ? *best_under : *best_any;
  compare_to_baseline(out.m2, out.m1);
  return out;
}

}  // namespace hpsteal
