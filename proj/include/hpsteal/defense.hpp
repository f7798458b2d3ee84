#pragma once

#include <vector>

#include "hpsteal/attack.hpp"

namespace hpsteal {

/// Round half away from zero to `decimals` places. Values too large to carry
/// that many decimals in a double are returned unchanged.
double round_value(double x, int decimals);

/// Rounds w or alpha; for NN only w2 is rounded.
ModelParams round_params(const ModelParams& params, int decimals);

struct RoundingEntry {
  int decimals = 0;
  double lambda_hat = 0.0;
  double relative_estimation_error = 0.0;  // +inf when all_masked
  double relative_perf_error = 0.0;
  double perf = 0.0;
  bool all_masked = false;
};

struct RoundingSweep {
  Algorithm algorithm = Algorithm::RR;
  double lambda = 0.0;
  double baseline_estimation_error = 0.0;  // unrounded parameters
  double baseline_perf = 0.0;
  std::vector<RoundingEntry> entries;

  std::vector<int> decimals() const;
};

/// Trains once on ds_train, then for each d rounds, re-steals and scores on ds_test.
/// Kernel models build their Gram matrix from ds_train.
RoundingSweep defense_sweep(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds_train,
                            const Dataset& ds_test, const TrainConfig& cfg, const std::vector<int>& decimals);

struct PerturbationCurve {
  Algorithm algorithm = Algorithm::RR;
  double lambda = 0.0;
  Index coord = 0;
  std::vector<double> deltas;
  std::vector<double> abs_errors;
  double fitted_slope = 0.0;
  double fitted_quadratic = 0.0;
};

/// Perturbs one coordinate of the exact optimum by each delta and records |lambda_hat - lambda|.
/// Fits |d lambda| ~ s delta + q delta^2 by least squares.
PerturbationCurve perturbation_curve(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds,
                                     const TrainConfig& cfg, Index coord, const std::vector<double>& deltas);

/// Closed-form approximation of the gradient of lambda_hat with respect to w (or alpha).
/// Supported: RR, LASSO, L2LR, L2KLR, L1LR, L1KLR.
Vector grad_lambda_approx(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds,
                          const GramMatrix* K = nullptr, const TrainConfig& cfg = TrainConfig{});

struct Sensitivity {
  double norm_a = 0.0;
  double norm_b = 0.0;
};

/// Trains both algorithms on ds with hp and returns |grad_lambda_approx| for each.
Sensitivity sensitivity_compare(const AlgorithmSpec& spec_a, const AlgorithmSpec& spec_b, const Dataset& ds,
                                const Hyperparams& hp, const TrainConfig& cfg = TrainConfig{});

struct Denominators {
  double l2 = 0.0;  // |w|^2
  double l1 = 0.0;  // |sign(w)|^2
};

/// Denominators of the L2 and L1 gradient approximations evaluated on one w.
Denominators approx_denominators(const Vector& w, double zero_threshold = 1e-10);

}  // namespace hpsteal
