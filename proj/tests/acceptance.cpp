// Acceptance checks. One [PASS]/[FAIL] line per criterion, non-zero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include <fmt/core.h>

#include "hpsteal/attack.hpp"
#include "hpsteal/defense.hpp"
#include "hpsteal/errors.hpp"
#include "hpsteal/experiments.hpp"
#include "hpsteal/report.hpp"
#include "test_util.hpp"

using namespace hpsteal;
namespace t = hpsteal::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ModelParams primal(Vector w) {
  ModelParams p;
  p.primal_w = std::move(w);
  return p;
}

Outcome exact_trainers() {
  const auto start = Clock::now();
  const Dataset sets[] = {t::diabetes(), preprocess(synth_regression(100, 10, 1))};
  double worst = 0.0;
  for (const Dataset& ds : sets) {
    const GramMatrix K = gram_gaussian_auto(ds);
    for (Algorithm id : {Algorithm::RR, Algorithm::KRR}) {
      const auto spec = AlgorithmSpec::make(id);
      const GramMatrix* k = id == Algorithm::KRR ? &K : nullptr;
      for (double lambda : default_grid()) {
        TrainConfig cfg;
        const ModelParams p = train(spec, {lambda}, ds, k, cfg);
        worst = std::max(worst, *steal(spec, Hyperparams{lambda}, p, ds, k).relative_error);
      }
    }
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-8 && secs < 10.0, fmt::format("max relative error {:.3e} (<= 1e-8), {:.2f} s (< 10 s)", worst, secs)};
}

Outcome sparse_regression() {
  const auto start = Clock::now();
  const Dataset ds = t::diabetes();
  TrainConfig cfg;
  cfg.tol = 1e-10;
  double worst = 0.0;
  for (double lambda : {1e-3, 1e-2, 1e-1}) {
    const auto lasso = AlgorithmSpec::make(Algorithm::LASSO);
    worst = std::max(worst, *steal(lasso, Hyperparams{lambda}, train(lasso, {lambda}, ds, nullptr, cfg), ds).relative_error);
    const auto enet = AlgorithmSpec::make(Algorithm::ENet);
    const Hyperparams hp{lambda, lambda};
    worst = std::max(worst, *steal(enet, hp, train(enet, hp, ds, nullptr, cfg), ds).relative_error);
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-4 && secs < 30.0, fmt::format("max relative error {:.3e} (<= 1e-4), {:.2f} s (< 30 s)", worst, secs)};
}

Outcome rounding_example() {
  ModelParams p = primal(Vector::Constant(1, 0.8675342));
  const double one = (*round_params(p, 1).primal_w)[0];
  const double two = (*round_params(p, 2).primal_w)[0];
  return {one == 0.9 && two == 0.87, fmt::format("{:.17g} and {:.17g}", one, two)};
}

Outcome rounding_defense() {
  const auto [tr, te] = split(t::diabetes(), 0.8, 0);
  TrainConfig cfg;
  cfg.tol = 1e-10;
  const auto lasso = AlgorithmSpec::make(Algorithm::LASSO);
  const auto ridge = AlgorithmSpec::make(Algorithm::RR);
  const double lam_lasso = cross_validate(lasso, tr, default_grid(), kDefaultFolds, cfg, 0).best_lambda;
  const double lam_ridge = cross_validate(ridge, tr, default_grid(), kDefaultFolds, cfg, 0).best_lambda;
  const RoundingEntry l = defense_sweep(lasso, {lam_lasso}, tr, te, cfg, {1}).entries[0];
  const RoundingSweep r = defense_sweep(ridge, {lam_ridge}, tr, te, cfg, {1});
  const RoundingEntry& re = r.entries[0];
  const double growth = re.relative_estimation_error / std::max(r.baseline_estimation_error, 1e-300);
  const bool pass = l.relative_estimation_error <= 1e-2 && re.relative_estimation_error > 0.0 && growth >= 1e3 &&
                    l.relative_perf_error <= 0.02 && re.relative_perf_error <= 0.02;
  return {pass, fmt::format("LASSO(lambda={}) error {:.3e} (<= 1e-2); RR(lambda={}) error {:.3e} vs unrounded {:.3e} "
                            "(growth >= 1e3); test MSE change {:.3e} / {:.3e} (<= 0.02)",
                            lam_lasso, l.relative_estimation_error, lam_ridge, re.relative_estimation_error,
                            r.baseline_estimation_error, l.relative_perf_error, re.relative_perf_error)};
}

Outcome linear_regime() {
  const auto start = Clock::now();
  std::vector<double> deltas;
  for (int i = 0; i < 7; ++i) deltas.push_back(1e-6 * std::pow(10.0, i / 2.0));
  const PerturbationCurve c =
      perturbation_curve(AlgorithmSpec::make(Algorithm::RR), {1.0}, t::diabetes(), TrainConfig{}, 0, deltas);
  const double r0 = c.abs_errors[0] / c.deltas[0], r1 = c.abs_errors[1] / c.deltas[1];
  const double spread = std::abs(r0 - r1) / r0;
  const double secs = seconds_since(start);
  return {spread <= 0.05 && c.fitted_quadratic > 0.0 && secs < 5.0,
          fmt::format("slope spread {:.3e} (<= 0.05), quadratic {:.3e} (> 0), {:.2f} s (< 5 s)", spread,
                      c.fitted_quadratic, secs)};
}

Outcome finite_differences() {
  double worst = 0.0;
  std::string worst_alg;
  for (Algorithm id : {Algorithm::RR, Algorithm::KRR, Algorithm::L2LR, Algorithm::L2KLR, Algorithm::SVM_SHL,
                       Algorithm::KSVM_SHL, Algorithm::NN_REG, Algorithm::NN_CLF}) {
    const auto spec = AlgorithmSpec::make(id);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Dataset ds = t::random_dataset(10, 4, task_of(id), 100 + seed);
      std::optional<GramMatrix> K;
      if (is_kernel(id)) K = gram_gaussian(ds, 1.0, 1e-6);
      const GramMatrix* k = K ? &*K : nullptr;
      const Hyperparams hp{0.7};
      const ModelParams p = t::random_params(spec, ds, 200 + seed);
      const double gap = t::relative_gap(subgradient(spec, hp, p, ds, k), t::fd_gradient(spec, hp, p, ds, k));
      if (gap > worst) {
        worst = gap;
        worst_alg = std::string(to_string(id));
      }
    }
  }
  return {worst <= 1e-4, fmt::format("max relative gap {:.3e} ({}) over 8 objectives x 5 instances (<= 1e-4)", worst,
                                     worst_alg.empty() ? "-" : worst_alg)};
}

Outcome dense_scan() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-5, 5);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Vector a = t::random_vector(20, 300 + trial);
    const Vector b = -unif(rng) * a + 0.3 * t::random_vector(20, 400 + trial);
    double best = 0, best_val = INFINITY;
    for (long k = -100000; k <= 100000; ++k) {
      const double lam = k * 1e-4;
      const double v = (b + lam * a).squaredNorm();
      if (v < best_val) {
        best_val = v;
        best = lam;
      }
    }
    AttackSystem sys;
    sys.A = a;
    sys.b = b;
    sys.used_rows = b.size();
    worst = std::max(worst, std::abs(estimate_lambda(sys).hyperparams.lambda - best));
  }
  return {worst <= 1e-3, fmt::format("max gap to scan minimizer {:.3e} over 20 systems (<= 1e-3)", worst)};
}

Outcome chained_attack() {
  const Dataset ds = preprocess(synth_gaussian(50, 5, 21));
  const auto spec = AlgorithmSpec::make(Algorithm::L2LR);
  const Hyperparams hp{0.1};
  const ModelParams trained = train(spec, hp, ds);
  const Vector w = *trained.primal_w;
  const PredictionOracle oracle = [&w](const Vector& x) { return 1.0 / (1.0 + std::exp(-w.dot(x))); };
  const Vector stolen = steal_model_parameters(oracle, OracleKind::LogisticWithConfidence, ds.cols(), 50, 8);
  const double werr = (stolen - w).cwiseAbs().maxCoeff();
  const double lerr = *steal(spec, hp, primal(stolen), ds).relative_error;
  return {werr <= 1e-6 && lerr <= 1e-2,
          fmt::format("parameter error {:.3e} (<= 1e-6), hyperparameter error {:.3e} (<= 1e-2), {} samples", werr, lerr,
                      ds.rows())};
}

Outcome train_steal_retrain() {
  const auto start = Clock::now();
  const auto spec = AlgorithmSpec::make(Algorithm::SVM_SHL);
  int m3_wins = 0;
  double worst_vs_m1 = 0.0, min_speedup = INFINITY;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto [tr, te] = split(preprocess(synth_gaussian(2000, 10, seed)), 0.8, seed);
    const ExperimentReport r = run_experiment(spec, tr, te, default_grid(), kDefaultFolds, 0.01, {}, seed);
    const double e2 = r.m2.relative_perf_error_vs_m1.value_or(INFINITY);
    const double e3 = r.m3.relative_perf_error_vs_m1.value_or(INFINITY);
    if (e3 <= e2) ++m3_wins;
    worst_vs_m1 = std::max(worst_vs_m1, e3);
    min_speedup = std::min(min_speedup, r.m3.speedup_vs_m1.value_or(0.0));
    per_seed += fmt::format(" [seed {}: M2 {:.4f} M3 {:.4f}]", seed, e2, e3);
  }
  const double secs = seconds_since(start);
  const bool pass = m3_wins >= 2 && worst_vs_m1 <= 0.01 && min_speedup > 2.0 && secs < 120.0;
  return {pass, fmt::format("M3 at or below M2 in {}/3 (>= 2), M3 vs M1 max {:.4f} (<= 0.01), speedup min {:.1f}x "
                            "(> 2), {:.1f} s (< 120 s){}",
                            m3_wins, worst_vs_m1, min_speedup, secs, per_seed)};
}

Outcome properties() {
  std::vector<std::string> broken;
  // Masking: surviving rows reproduce the subgradient.
  {
    const Dataset ds = t::random_dataset(12, 4, Task::Regression, 3);
    Vector w = t::random_vector(4, 4);
    w[1] = 0.0;
    const auto spec = AlgorithmSpec::make(Algorithm::LASSO);
    const AttackSystem sys = build_attack_system(spec, primal(w), ds);
    const Vector g = subgradient(spec, {0.6}, primal(w), ds);
    bool ok = sys.masked_count == 1 && sys.used_rows == 3;
    for (Index r = 0; r < sys.used_rows; ++r)
      ok = ok && std::abs(sys.b[r] + 0.6 * sys.A(r, 0) - g[sys.row_index[r]]) <= 1e-10;
    if (!ok) broken.push_back("masking");
  }
  // Rounding is idempotent.
  {
    const Dataset ds = t::random_dataset(8, 3, Task::Regression, 1);
    const ModelParams p = t::random_params(AlgorithmSpec::make(Algorithm::RR), ds, 2, 3.3);
    bool ok = true;
    for (int d = 0; d <= 8; ++d) {
      const ModelParams once = round_params(p, d);
      ok = ok && round_params(once, d).active_block() == once.active_block();
    }
    if (!ok) broken.push_back("rounding");
  }
  // CV folds partition the indices.
  {
    std::vector<Index> all;
    for (const auto& f : fold_indices(103, 5, 9)) all.insert(all.end(), f.begin(), f.end());
    std::sort(all.begin(), all.end());
    bool ok = all.size() == 103;
    for (Index i = 0; ok && i < 103; ++i) ok = all[i] == i;
    if (!ok) broken.push_back("folds");
  }
  // Gram symmetric and positive definite.
  {
    const GramMatrix K = gram_gaussian(t::random_dataset(40, 3, Task::Regression, 2), 2.0, 1e-6);
    const Matrix& v = K.values();
    const bool ok = v == v.transpose() && Eigen::SelfAdjointEigenSolver<Matrix>(v).eigenvalues().minCoeff() > 0.0;
    if (!ok) broken.push_back("gram");
  }
  // Serialization round trips.
  {
    const Dataset ds = t::random_dataset(9, 3, Task::Regression, 1);
    bool ok = true;
    for (Algorithm id : {Algorithm::RR, Algorithm::KRR, Algorithm::NN_REG}) {
      const TrainedModel m{AlgorithmSpec::make(id), {0.1 / 3.0}, t::random_params(AlgorithmSpec::make(id), ds, 5)};
      const TrainedModel back = model_from_json(Json::parse(to_json(m).dump()));
      ok = ok && back.params.active_block() == m.params.active_block() && back.hyperparams.lambda == m.hyperparams.lambda;
    }
    ok = ok && number_from_json(number_to_json(INFINITY)) == INFINITY;
    if (!ok) broken.push_back("serialization");
  }
  std::string detail = "masking, rounding, folds, gram, serialization";
  if (!broken.empty()) {
    detail = "broken:";
    for (const auto& b : broken) detail += " " + b;
  }
  return {broken.empty(), detail};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"exact estimation for closed-form trainers", exact_trainers},
      {"sparse regression accuracy", sparse_regression},
      {"rounding example", rounding_example},
      {"rounding defense shape", rounding_defense},
      {"perturbation linear regime", linear_regime},
      {"finite-difference gradients", finite_differences},
      {"estimator vs dense scan", dense_scan},
      {"chained parameter and hyperparameter attack", chained_attack},
      {"train-steal-retrain ordering", train_steal_retrain},
      {"property suites", properties},
  };
  int failures = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    fmt::print("[{}] {:2d} {}: {}\n", o.pass ? "PASS" : "FAIL", index, name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
