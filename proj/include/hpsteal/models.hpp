#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hpsteal/data.hpp"
#include "hpsteal/kernels.hpp"

namespace hpsteal {

enum class Algorithm {
  RR,
  LASSO,
  ENet,
  KRR,
  L2LR,
  L1LR,
  L2KLR,
  L1KLR,
  SVM_RHL,
  SVM_SHL,
  KSVM_RHL,
  KSVM_SHL,
  NN_REG,
  NN_CLF,
};

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::RR,      Algorithm::LASSO,   Algorithm::ENet,     Algorithm::KRR,
    Algorithm::L2LR,    Algorithm::L1LR,    Algorithm::L2KLR,    Algorithm::L1KLR,
    Algorithm::SVM_RHL, Algorithm::SVM_SHL, Algorithm::KSVM_RHL, Algorithm::KSVM_SHL,
    Algorithm::NN_REG,  Algorithm::NN_CLF,
};

std::string_view to_string(Algorithm id);
/// Accepts the canonical names ("RR", "L1LR", "KSVM_SHL", ...) case-insensitively,
/// with '-' and '_' interchangeable.
Algorithm parse_algorithm(std::string_view text);

bool is_kernel(Algorithm id);
bool is_neural(Algorithm id);
bool is_classifier(Algorithm id);
bool uses_l1(Algorithm id);
bool uses_hinge(Algorithm id);
bool has_two_hyperparams(Algorithm id);
/// RR and KRR are trained by a direct solve and land on the exact minimum.
bool has_exact_trainer(Algorithm id);
Task task_of(Algorithm id);

struct AlgorithmSpec {
  Algorithm id;
  std::optional<double> kernel_sigma;
  std::optional<int> nn_hidden;

  /// Fills kernel_sigma (10) or nn_hidden (8) for the families that need them.
  static AlgorithmSpec make(Algorithm id);
  void validate() const;
};

struct Hyperparams {
  double lambda = 1.0;
  /// ENet only: lambda weighs |w|_1 and lambda2 weighs |w|_2^2.
  std::optional<double> lambda2;

  void validate(Algorithm id) const;
};

struct NnParams {
  Matrix W1;  // m x d
  Vector b1;  // d
  Vector w2;  // d
  double b2 = 0.0;
};

struct SolverReport {
  long iterations = 0;
  double final_change = 0.0;
  double final_grad_norm = 0.0;
  bool converged = false;
  std::string criterion;  // "analytic", "tolerance", "max_iters", "degenerate_lasso", ...
  bool degenerate_lasso = false;
  std::vector<double> objective_trace;  // filled when TrainConfig::record_trace is set
};

struct ModelParams {
  std::optional<Vector> primal_w;
  std::optional<Vector> dual_alpha;
  std::optional<NnParams> nn;
  double trained_objective = 0.0;
  SolverReport solver_report;

  /// The block the attack differentiates: w, alpha, or the NN output weights.
  const Vector& active_block() const;
  Vector& active_block();
};

struct TrainConfig {
  long max_iters = 200000;
  double tol = 1e-8;
  double step_size = 1.0;
  std::uint64_t seed = 0;
  double zero_threshold = 1e-10;
  double margin_tol = 1e-9;
  bool record_trace = false;
};

/// Checks that the populated parameter block matches the algorithm family and
/// the data shape; throws FamilyMismatch otherwise.
void check_family(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds,
                  const GramMatrix* K);

/// Smallest lambda (or lambda1 for ENet) at which the L1 optimum is w = 0: 2 |X^T y|_inf.
double lasso_lambda_max(const Dataset& ds);

/// sign with sign(t) = 0 for |t| <= zero_threshold.
Vector sign_masked(const Vector& v, double zero_threshold);

double objective(const AlgorithmSpec& spec, const Hyperparams& hp, const ModelParams& params,
                 const Dataset& ds, const GramMatrix* K = nullptr,
                 const TrainConfig& cfg = TrainConfig{});

/// Gradient of the objective with respect to the active block, with the L1 sign-0
/// convention and hinge terms within margin_tol of the kink dropped. NN: w2 block.
Vector subgradient(const AlgorithmSpec& spec, const Hyperparams& hp, const ModelParams& params,
                   const Dataset& ds, const GramMatrix* K = nullptr,
                   const TrainConfig& cfg = TrainConfig{});

ModelParams train(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds,
                  const GramMatrix* K = nullptr, const TrainConfig& cfg = TrainConfig{});

/// Raw model outputs on the training instances: X w, K alpha, or the NN output.
/// Regression: predictions. LR / NN_CLF: probabilities. SVM: signed scores.
Vector predict_training(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds,
                        const GramMatrix* K = nullptr);

/// Outputs on new points. Kernel models need the training instances as `support`.
Vector predict(const AlgorithmSpec& spec, const ModelParams& params, const Matrix& points,
               const Matrix* support = nullptr);

/// Thresholds probabilities at 0.5 and scores at 0 into {0, 1}.
Vector to_labels(const AlgorithmSpec& spec, const Vector& outputs);

struct Metrics {
  Task task;
  double value;  // MSE for regression, accuracy for classification
};

double mse(const Vector& predictions, const Vector& targets);
double accuracy(const Vector& labels, const Vector& targets);
Metrics metrics(const Vector& predictions, const Vector& targets, Task task);

/// Test MSE or ACC of a trained model, handling kernel support and label mapping.
double test_performance(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& train_ds,
                        const Dataset& test_ds);

}  // namespace hpsteal
