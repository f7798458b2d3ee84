#pragma once

// Shared numerical pieces used by models.cpp, solvers.cpp, attack.cpp and defense.cpp.

#include <cmath>

#include "hpsteal/models.hpp"

namespace hpsteal::detail {

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline Vector sigmoid(const Vector& t) { return t.unaryExpr([](double v) { return sigmoid(v); }); }

inline Matrix sigmoid(const Matrix& t) { return t.unaryExpr([](double v) { return sigmoid(v); }); }

/// log(1 + e^t) without overflow.
inline double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

/// Cross entropy -sum(y log h + (1-y) log(1-h)) with h = sigmoid(s), written as
/// sum(softplus(s) - y s).
inline double cross_entropy(const Vector& scores, const Vector& y) {
  double total = 0.0;
  for (Index i = 0; i < scores.size(); ++i) total += softplus(scores[i]) - y[i] * scores[i];
  return total;
}

/// {0,1} labels to {-1,+1}.
inline Vector signed_labels(const Vector& y) { return (2.0 * y.array() - 1.0).matrix(); }

/// Margin y_i s_i (signed labels) and the active-hinge indicator
/// (margin < 1 and not within margin_tol of the kink).
struct HingeState {
  Vector ys;       // signed labels
  Vector margins;  // ys .* scores
  Vector active;   // 1.0 where the hinge term contributes, else 0.0
};

inline HingeState hinge_state(const Vector& scores, const Vector& y, double margin_tol) {
  HingeState st;
  st.ys = signed_labels(y);
  st.margins = st.ys.cwiseProduct(scores);
  st.active = st.margins.unaryExpr(
      [margin_tol](double m) { return (m < 1.0 && std::abs(m - 1.0) > margin_tol) ? 1.0 : 0.0; });
  return st;
}

/// Per-instance derivative of the summed hinge loss with respect to the score.
inline Vector hinge_score_gradient(Algorithm id, const HingeState& st) {
  const bool squared = id == Algorithm::SVM_SHL || id == Algorithm::KSVM_SHL;
  Vector g(st.ys.size());
  for (Index i = 0; i < g.size(); ++i) {
    const double slack = 1.0 - st.margins[i];
    g[i] = st.active[i] * (squared ? -2.0 * st.ys[i] * slack : -st.ys[i]);
  }
  return g;
}

inline double hinge_loss(Algorithm id, const Vector& scores, const Vector& y) {
  const bool squared = id == Algorithm::SVM_SHL || id == Algorithm::KSVM_SHL;
  const Vector ys = signed_labels(y);
  double total = 0.0;
  for (Index i = 0; i < scores.size(); ++i) {
    const double slack = std::max(0.0, 1.0 - ys[i] * scores[i]);
    total += squared ? slack * slack : slack;
  }
  return total;
}

struct NnForward {
  Matrix hidden;  // n x d, sig(X W1 + b1)
  Vector output;  // n, H w2 + b2 before the output activation
};

inline NnForward nn_forward(const NnParams& p, const Matrix& X) {
  NnForward f;
  Matrix pre = X * p.W1;
  pre.rowwise() += p.b1.transpose();
  f.hidden = sigmoid(pre);
  f.output = (f.hidden * p.w2).array() + p.b2;
  return f;
}

/// Model score on the training set: X w, K alpha, or the NN pre-activation output.
inline Vector training_scores(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds,
                              const GramMatrix* K) {
  if (is_neural(spec.id)) return nn_forward(*params.nn, ds.X()).output;
  if (is_kernel(spec.id)) return K->values() * *params.dual_alpha;
  return ds.X() * *params.primal_w;
}

/// Full gradient of the NN objective, packed as [vec(W1), b1, w2, b2].
struct NnGradient {
  Matrix W1;
  Vector b1;
  Vector w2;
  double b2 = 0.0;
};

inline NnGradient nn_gradient(Algorithm id, double lambda, const NnParams& p, const Dataset& ds) {
  const NnForward f = nn_forward(p, ds.X());
  Vector dout;
  double reg = 0.0;
  if (id == Algorithm::NN_REG) {
    dout = 2.0 * (f.output - ds.y());
    reg = 2.0 * lambda;
  } else {
    dout = sigmoid(f.output) - ds.y();
    reg = lambda;
  }
  NnGradient g;
  g.w2 = f.hidden.transpose() * dout + reg * p.w2;
  g.b2 = dout.sum();
  const Matrix dhidden = dout * p.w2.transpose();
  const Matrix dpre = dhidden.cwiseProduct(f.hidden.cwiseProduct((1.0 - f.hidden.array()).matrix()));
  g.W1 = ds.X().transpose() * dpre + reg * p.W1;
  g.b1 = dpre.colwise().sum().transpose();
  return g;
}

inline double nn_objective(Algorithm id, double lambda, const NnParams& p, const Dataset& ds) {
  const NnForward f = nn_forward(p, ds.X());
  const double penalty = p.W1.squaredNorm() + p.w2.squaredNorm();
  if (id == Algorithm::NN_REG) return (ds.y() - f.output).squaredNorm() + lambda * penalty;
  return cross_entropy(f.output, ds.y()) + 0.5 * lambda * penalty;
}

}  // namespace hpsteal::detail
