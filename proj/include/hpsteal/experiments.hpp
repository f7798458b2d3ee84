#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "hpsteal/attack.hpp"

namespace hpsteal {

/// {1e-3, 1e-2, ..., 1e3}
std::vector<double> default_grid();
inline constexpr int kDefaultFolds = 5;

/// Work counter of one training: rows times iterations.
long long training_cost(const Dataset& ds, const ModelParams& params);

struct CvResult {
  Algorithm algorithm = Algorithm::RR;
  Task task = Task::Regression;
  std::vector<double> grid;
  std::vector<double> mean_scores;  // validation MSE or ACC per grid value
  std::vector<int> failures;        // trainings that threw, per grid value
  double best_lambda = 0.0;
  int folds = 0;
  long long cost_units = 0;
  long trainings = 0;
};

/// Shuffled fold assignment; every index in [0, n) appears in exactly one fold.
std::vector<std::vector<Index>> fold_indices(Index n, int k, std::uint64_t seed);

/// Validation score of a model trained on `train` and evaluated on `validation`.
using Scorer = std::function<double(const AlgorithmSpec&, const ModelParams&, const Dataset& train,
                                    const Dataset& validation)>;

/// Grid search over lambda with k folds. `base` supplies lambda2 for ENet.
/// Lower is better for regression, higher for classification; ties go to the smaller lambda.
CvResult cross_validate(const AlgorithmSpec& spec, const Dataset& ds, const std::vector<double>& grid, int k,
                        const TrainConfig& cfg, std::uint64_t seed, const Hyperparams& base = Hyperparams{},
                        const Scorer& scorer = nullptr);

namespace serial {

/// Single-threaded reference for cross_validate.
CvResult cross_validate(const AlgorithmSpec& spec, const Dataset& ds, const std::vector<double>& grid, int k,
                        const TrainConfig& cfg, std::uint64_t seed, const Hyperparams& base = Hyperparams{},
                        const Scorer& scorer = nullptr);

}  // namespace serial

enum class Method { M1, M2, M3 };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct StrategyReport {
  Method method = Method::M1;
  Algorithm algorithm = Algorithm::RR;
  std::optional<double> sample_fraction;
  double cv_lambda = 0.0;
  std::optional<double> stolen_lambda;
  double final_lambda = 0.0;
  double test_perf = 0.0;
  long long cost_units = 0;
  long long cv_cost_units = 0;
  std::optional<double> relative_perf_error_vs_m1;
  std::optional<double> speedup_vs_m1;
};

/// M1: CV and final training on ds_train.
/// M2: CV and final training on a `fraction` sample of ds_train.
/// M3: CV and training on a `fraction` sample, steal lambda from that model, retrain on ds_train.
/// Inputs are expected to be preprocessed already.
StrategyReport run_strategy(Method method, const AlgorithmSpec& spec, const Dataset& ds_train,
                            const Dataset& ds_test, const std::vector<double>& grid, int k,
                            std::optional<double> fraction, const TrainConfig& cfg, std::uint64_t seed);

/// Fills the vs-M1 fields of `report`.
void compare_to_baseline(StrategyReport& report, const StrategyReport& m1);

struct ExperimentReport {
  StrategyReport m1;
  StrategyReport m2;
  StrategyReport m3;
};

/// Runs M1, M3 at `fraction`, and M2 at the fraction whose cost best matches M3
/// without exceeding it.
ExperimentReport run_experiment(const AlgorithmSpec& spec, const Dataset& ds_train, const Dataset& ds_test,
                                const std::vector<double>& grid, int k, double fraction, const TrainConfig& cfg,
                                std::uint64_t seed);

}  // namespace hpsteal
