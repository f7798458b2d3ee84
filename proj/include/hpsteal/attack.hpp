#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hpsteal/models.hpp"

namespace hpsteal {

/// Overdetermined system b + A lambda = 0 built from the first-order condition
/// at the learnt parameters. A has one column, or two for ENet (lambda1, lambda2).
///
/// The objective gradient equals gradient_scale * (b + A lambda), or
/// gradient_scale * K (b + A lambda) when kernel_factored is set.
struct AttackSystem {
  Matrix A;
  Vector b;
  Index used_rows = 0;
  Index masked_count = 0;        // rows dropped (L1 sign 0 or all-zero A row)
  Index excluded_instances = 0;  // hinge terms within margin_tol of the kink
  bool no_active_instances = false;
  Algorithm algorithm = Algorithm::RR;
  double gradient_scale = 1.0;
  bool kernel_factored = false;
  std::vector<Index> row_index;  // original coordinate of each kept row

  Vector a() const { return A.col(0); }
};

AttackSystem build_attack_system(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds,
                                 const GramMatrix* K = nullptr, const TrainConfig& cfg = TrainConfig{});

struct LambdaEstimate {
  Hyperparams hyperparams;
  double condition = 1.0;  // of A^T A
  bool non_positive = false;
};

/// Least-squares minimizer of |b + A lambda|.
LambdaEstimate estimate_lambda(const AttackSystem& sys);

struct StealReport {
  Algorithm algorithm = Algorithm::RR;
  std::optional<Hyperparams> lambda_true;
  Hyperparams lambda_hat;
  std::optional<double> relative_error;
  std::optional<double> relative_error2;  // ENet lambda2
  Index used_rows = 0;
  Index masked_count = 0;
  Index excluded_instances = 0;
  double condition = 1.0;
  std::vector<std::string> warnings;
};

StealReport steal(const AlgorithmSpec& spec, const std::optional<Hyperparams>& hp_true, const ModelParams& params,
                  const Dataset& ds, const GramMatrix* K = nullptr, const TrainConfig& cfg = TrainConfig{});

double relative_error(double estimate, double truth);

enum class OracleKind { LinearRegression, LogisticWithConfidence };

using PredictionOracle = std::function<double(const Vector&)>;

/// Recovers w from a black-box oracle using query_budget standard normal queries.
Vector steal_model_parameters(const PredictionOracle& oracle, OracleKind kind, Index m, Index query_budget,
                              std::uint64_t seed);

/// Same, with caller-chosen queries (one per row).
Vector steal_model_parameters(const PredictionOracle& oracle, OracleKind kind, const Matrix& queries);

}  // namespace hpsteal
