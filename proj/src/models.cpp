#include "hpsteal/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "hpsteal/errors.hpp"
#include "model_math.hpp"

namespace hpsteal {

using detail::cross_entropy;
using detail::sigmoid;

std::string_view to_string(Algorithm id) {
  switch (id) {
    case Algorithm::RR: return "RR";
    case Algorithm::LASSO: return "LASSO";
    case Algorithm::ENet: return "ENet";
    case Algorithm::KRR: return "KRR";
    case Algorithm::L2LR: return "L2LR";
    case Algorithm::L1LR: return "L1LR";
    case Algorithm::L2KLR: return "L2KLR";
    case Algorithm::L1KLR: return "L1KLR";
    case Algorithm::SVM_RHL: return "SVM_RHL";
    case Algorithm::SVM_SHL: return "SVM_SHL";
    case Algorithm::KSVM_RHL: return "KSVM_RHL";
    case Algorithm::KSVM_SHL: return "KSVM_SHL";
    case Algorithm::NN_REG: return "NN_REG";
    case Algorithm::NN_CLF: return "NN_CLF";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  std::string key;
  for (char c : text) key.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (Algorithm id : kAllAlgorithms) {
    std::string canon(to_string(id));
    std::transform(canon.begin(), canon.end(), canon.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    std::string loose = canon;
    loose.erase(std::remove(loose.begin(), loose.end(), '_'), loose.end());
    std::string key_loose = key;
    key_loose.erase(std::remove(key_loose.begin(), key_loose.end(), '_'), key_loose.end());
    if (key == canon || key_loose == loose) return id;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown algorithm '{}'", text));
}

bool is_kernel(Algorithm id) {
  return id == Algorithm::KRR || id == Algorithm::L2KLR || id == Algorithm::L1KLR ||
         id == Algorithm::KSVM_RHL || id == Algorithm::KSVM_SHL;
}

bool is_neural(Algorithm id) { return id == Algorithm::NN_REG || id == Algorithm::NN_CLF; }

bool is_classifier(Algorithm id) {
  switch (id) {
    case Algorithm::RR:
    case Algorithm::LASSO:
    case Algorithm::ENet:
    case Algorithm::KRR:
    case Algorithm::NN_REG:
      return false;
    default:
      return true;
  }
}

bool uses_l1(Algorithm id) {
  return id == Algorithm::LASSO || id == Algorithm::ENet || id == Algorithm::L1LR || id == Algorithm::L1KLR;
}

bool uses_hinge(Algorithm id) {
  return id == Algorithm::SVM_RHL || id == Algorithm::SVM_SHL || id == Algorithm::KSVM_RHL ||
         id == Algorithm::KSVM_SHL;
}

bool has_two_hyperparams(Algorithm id) { return id == Algorithm::ENet; }

bool has_exact_trainer(Algorithm id) { return id == Algorithm::RR || id == Algorithm::KRR; }

Task task_of(Algorithm id) { return is_classifier(id) ? Task::Classification : Task::Regression; }

AlgorithmSpec AlgorithmSpec::make(Algorithm id) {
  AlgorithmSpec spec{id, std::nullopt, std::nullopt};
  if (is_kernel(id)) spec.kernel_sigma = kDefaultSigma;
  if (is_neural(id)) spec.nn_hidden = 8;
  return spec;
}

void AlgorithmSpec::validate() const {
  if (kernel_sigma.has_value() != is_kernel(id))
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("{}: kernel_sigma must be set exactly for kernel algorithms", to_string(id)));
  if (nn_hidden.has_value() != is_neural(id))
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("{}: nn_hidden must be set exactly for neural networks", to_string(id)));
  if (kernel_sigma && !(*kernel_sigma > 0.0))
    throw Error(ErrorCode::InvalidArgument, "kernel_sigma must be > 0");
  if (nn_hidden && *nn_hidden < 1) throw Error(ErrorCode::InvalidArgument, "nn_hidden must be >= 1");
}

void Hyperparams::validate(Algorithm id) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::InvalidArgument, fmt::format("lambda {} must be a finite value > 0", lambda));
  if (lambda2.has_value() != has_two_hyperparams(id))
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("{}: lambda2 is required for ENet and only for ENet", to_string(id)));
  if (lambda2 && (!(*lambda2 > 0.0) || !std::isfinite(*lambda2)))
    throw Error(ErrorCode::InvalidArgument, fmt::format("lambda2 {} must be a finite value > 0", *lambda2));
}

const Vector& ModelParams::active_block() const {
  if (primal_w) return *primal_w;
  if (dual_alpha) return *dual_alpha;
  if (nn) return nn->w2;
  throw Error(ErrorCode::FamilyMismatch, "model has no parameters");
}

Vector& ModelParams::active_block() {
  return const_cast<Vector&>(static_cast<const ModelParams&>(*this).active_block());
}

void check_family(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds,
                  const GramMatrix* K) {
  const int populated = int(params.primal_w.has_value()) + int(params.dual_alpha.has_value()) +
                        int(params.nn.has_value());
  if (populated != 1)
    throw Error(ErrorCode::FamilyMismatch, "exactly one parameter block must be populated");
  const auto name = to_string(spec.id);
  if (is_neural(spec.id)) {
    if (!params.nn) throw Error(ErrorCode::FamilyMismatch, fmt::format("{} needs NN parameters", name));
    const auto& p = *params.nn;
    if (p.W1.rows() != ds.cols() || p.b1.size() != p.W1.cols() || p.w2.size() != p.W1.cols())
      throw Error(ErrorCode::FamilyMismatch, fmt::format("{}: NN shapes do not match the data", name));
  } else if (is_kernel(spec.id)) {
    if (!params.dual_alpha) throw Error(ErrorCode::FamilyMismatch, fmt::format("{} needs alpha", name));
    if (params.dual_alpha->size() != ds.rows())
      throw Error(ErrorCode::FamilyMismatch, fmt::format("{}: alpha length != n", name));
    if (K == nullptr) throw Error(ErrorCode::FamilyMismatch, fmt::format("{} needs a Gram matrix", name));
    if (K->size() != ds.rows())
      throw Error(ErrorCode::FamilyMismatch, fmt::format("{}: Gram matrix size != n", name));
  } else {
    if (!params.primal_w) throw Error(ErrorCode::FamilyMismatch, fmt::format("{} needs w", name));
    if (params.primal_w->size() != ds.cols())
      throw Error(ErrorCode::FamilyMismatch, fmt::format("{}: w length != m", name));
  }
  if (is_classifier(spec.id) && ds.task() != Task::Classification)
    throw Error(ErrorCode::FamilyMismatch, fmt::format("{} needs a classification dataset", name));
  if (!is_classifier(spec.id) && ds.task() != Task::Regression)
    throw Error(ErrorCode::FamilyMismatch, fmt::format("{} needs a regression dataset", name));
}

double lasso_lambda_max(const Dataset& ds) {
  return 2.0 * (ds.X().transpose() * ds.y()).cwiseAbs().maxCoeff();
}

Vector sign_masked(const Vector& v, double zero_threshold) {
  return v.unaryExpr([zero_threshold](double t) {
    if (std::abs(t) <= zero_threshold) return 0.0;
    return t > 0.0 ? 1.0 : -1.0;
  });
}

double objective(const AlgorithmSpec& spec, const Hyperparams& hp, const ModelParams& params,
                 const Dataset& ds, const GramMatrix* K, const TrainConfig& cfg) {
  (void)cfg;
  check_family(spec, params, ds, K);
  const double lambda = hp.lambda;
  switch (spec.id) {
    case Algorithm::RR: {
      const Vector& w = *params.primal_w;
      return (ds.y() - ds.X() * w).squaredNorm() + lambda * w.squaredNorm();
    }
    case Algorithm::LASSO: {
      const Vector& w = *params.primal_w;
      return (ds.y() - ds.X() * w).squaredNorm() + lambda * w.lpNorm<1>();
    }
    case Algorithm::ENet: {
      const Vector& w = *params.primal_w;
      return (ds.y() - ds.X() * w).squaredNorm() + lambda * w.lpNorm<1>() +
             hp.lambda2.value_or(0.0) * w.squaredNorm();
    }
    case Algorithm::KRR: {
      const Vector& a = *params.dual_alpha;
      const Vector Ka = K->values() * a;
      return (ds.y() - Ka).squaredNorm() + lambda * a.dot(Ka);
    }
    case Algorithm::L2LR: {
      const Vector& w = *params.primal_w;
      return cross_entropy(ds.X() * w, ds.y()) + lambda * w.squaredNorm();
    }
    case Algorithm::L1LR: {
      const Vector& w = *params.primal_w;
      return cross_entropy(ds.X() * w, ds.y()) + lambda * w.lpNorm<1>();
    }
    case Algorithm::L2KLR: {
      const Vector& a = *params.dual_alpha;
      const Vector Ka = K->values() * a;
      return cross_entropy(Ka, ds.y()) + lambda * a.dot(Ka);
    }
    case Algorithm::L1KLR: {
      const Vector Ka = K->values() * *params.dual_alpha;
      return cross_entropy(Ka, ds.y()) + lambda * Ka.lpNorm<1>();
    }
    case Algorithm::SVM_RHL:
    case Algorithm::SVM_SHL: {
      const Vector& w = *params.primal_w;
      return detail::hinge_loss(spec.id, ds.X() * w, ds.y()) + lambda * w.squaredNorm();
    }
    case Algorithm::KSVM_RHL:
    case Algorithm::KSVM_SHL: {
      const Vector& a = *params.dual_alpha;
      const Vector Ka = K->values() * a;
      return detail::hinge_loss(spec.id, Ka, ds.y()) + lambda * a.dot(Ka);
    }
    case Algorithm::NN_REG:
    case Algorithm::NN_CLF:
      return detail::nn_objective(spec.id, lambda, *params.nn, ds);
  }
  throw Error(ErrorCode::UnsupportedAlgorithm, "unknown algorithm");
}

Vector subgradient(const AlgorithmSpec& spec, const Hyperparams& hp, const ModelParams& params,
                   const Dataset& ds, const GramMatrix* K, const TrainConfig& cfg) {
  check_family(spec, params, ds, K);
  const double lambda = hp.lambda;
  const Matrix& X = ds.X();
  const Vector& y = ds.y();
  switch (spec.id) {
    case Algorithm::RR: {
      const Vector& w = *params.primal_w;
      return 2.0 * X.transpose() * (X * w - y) + 2.0 * lambda * w;
    }
    case Algorithm::LASSO: {
      const Vector& w = *params.primal_w;
      return 2.0 * X.transpose() * (X * w - y) + lambda * sign_masked(w, cfg.zero_threshold);
    }
    case Algorithm::ENet: {
      const Vector& w = *params.primal_w;
      const Vector s = sign_masked(w, cfg.zero_threshold);
      return 2.0 * X.transpose() * (X * w - y) + lambda * s +
             2.0 * hp.lambda2.value_or(0.0) * w.cwiseProduct(s.cwiseAbs());
    }
    case Algorithm::KRR: {
      const Vector Ka = K->values() * *params.dual_alpha;
      return 2.0 * K->values() * (Ka - y) + 2.0 * lambda * Ka;
    }
    case Algorithm::L2LR: {
      const Vector& w = *params.primal_w;
      return X.transpose() * (sigmoid(Vector(X * w)) - y) + 2.0 * lambda * w;
    }
    case Algorithm::L1LR: {
      const Vector& w = *params.primal_w;
      return X.transpose() * (sigmoid(Vector(X * w)) - y) + lambda * sign_masked(w, cfg.zero_threshold);
    }
    case Algorithm::L2KLR: {
      const Vector Ka = K->values() * *params.dual_alpha;
      return K->values() * (sigmoid(Ka) - y) + 2.0 * lambda * Ka;
    }
    case Algorithm::L1KLR: {
      const Vector Ka = K->values() * *params.dual_alpha;
      return K->values() * (sigmoid(Ka) - y + lambda * sign_masked(Ka, cfg.zero_threshold));
    }
    case Algorithm::SVM_RHL:
    case Algorithm::SVM_SHL: {
      const Vector& w = *params.primal_w;
      const auto st = detail::hinge_state(X * w, y, cfg.margin_tol);
      return X.transpose() * detail::hinge_score_gradient(spec.id, st) + 2.0 * lambda * w;
    }
    case Algorithm::KSVM_RHL:
    case Algorithm::KSVM_SHL: {
      const Vector Ka = K->values() * *params.dual_alpha;
      const auto st = detail::hinge_state(Ka, y, cfg.margin_tol);
      return K->values() * detail::hinge_score_gradient(spec.id, st) + 2.0 * lambda * Ka;
    }
    case Algorithm::NN_REG:
    case Algorithm::NN_CLF:
      return detail::nn_gradient(spec.id, lambda, *params.nn, ds).w2;
  }
  throw Error(ErrorCode::UnsupportedAlgorithm, "unknown algorithm");
}

Vector predict_training(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds,
                        const GramMatrix* K) {
  check_family(spec, params, ds, K);
  const Vector scores = detail::training_scores(spec, params, ds, K);
  switch (spec.id) {
    case Algorithm::L2LR:
    case Algorithm::L1LR:
    case Algorithm::L2KLR:
    case Algorithm::L1KLR:
    case Algorithm::NN_CLF:
      return sigmoid(scores);
    default:
      return scores;
  }
}

Vector predict(const AlgorithmSpec& spec, const ModelParams& params, const Matrix& points,
               const Matrix* support) {
  Vector scores;
  if (is_neural(spec.id)) {
    if (!params.nn) throw Error(ErrorCode::FamilyMismatch, "NN prediction needs NN parameters");
    if (params.nn->W1.rows() != points.cols())
      throw Error(ErrorCode::LengthMismatch, "point width differs from the NN input width");
    scores = detail::nn_forward(*params.nn, points).output;
  } else if (is_kernel(spec.id)) {
    if (!params.dual_alpha || support == nullptr)
      throw Error(ErrorCode::FamilyMismatch, "kernel prediction needs alpha and the training instances");
    if (support->rows() != params.dual_alpha->size())
      throw Error(ErrorCode::LengthMismatch, "support rows differ from alpha length");
    scores = gaussian_kernel(points, *support, spec.kernel_sigma.value_or(kDefaultSigma)) *
             *params.dual_alpha;
  } else {
    if (!params.primal_w) throw Error(ErrorCode::FamilyMismatch, "linear prediction needs w");
    if (params.primal_w->size() != points.cols())
      throw Error(ErrorCode::LengthMismatch, "point width differs from w");
    scores = points * *params.primal_w;
  }
  switch (spec.id) {
    case Algorithm::L2LR:
    case Algorithm::L1LR:
    case Algorithm::L2KLR:
    case Algorithm::L1KLR:
    case Algorithm::NN_CLF:
      return sigmoid(scores);
    default:
      return scores;
  }
}

Vector to_labels(const AlgorithmSpec& spec, const Vector& outputs) {
  if (!is_classifier(spec.id))
    throw Error(ErrorCode::FamilyMismatch, fmt::format("{} is not a classifier", to_string(spec.id)));
  const double threshold = uses_hinge(spec.id) ? 0.0 : 0.5;
  return outputs.unaryExpr([threshold](double v) { return v > threshold ? 1.0 : 0.0; });
}

double mse(const Vector& predictions, const Vector& targets) {
  if (predictions.size() != targets.size() || predictions.size() < 1)
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} predictions for {} targets", predictions.size(), targets.size()));
  return (predictions - targets).squaredNorm() / static_cast<double>(targets.size());
}

double accuracy(const Vector& labels, const Vector& targets) {
  if (labels.size() != targets.size() || labels.size() < 1)
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} labels for {} targets", labels.size(), targets.size()));
  Index hits = 0;
  for (Index i = 0; i < labels.size(); ++i) hits += labels[i] == targets[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(targets.size());
}

Metrics metrics(const Vector& predictions, const Vector& targets, Task task) {
  if (task == Task::Regression) return {task, mse(predictions, targets)};
  return {task, accuracy(predictions, targets)};
}

double test_performance(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& train_ds,
                        const Dataset& test_ds) {
  const Vector out = predict(spec, params, test_ds.X(), &train_ds.X());
  if (is_classifier(spec.id)) return accuracy(to_labels(spec, out), test_ds.y());
  return mse(out, test_ds.y());
}

}  // namespace hpsteal
