// Trainers for every supported algorithm.
//
//   RR, KRR            direct Cholesky solve (exact minimum)
//   LASSO, ENet        cyclic coordinate descent with soft-thresholding
//   L2LR, SVM_SHL      damped Newton in w
//   L2KLR, KSVM_SHL    damped Newton in alpha; the step solves (D K + 2 lambda I) d = K^{-1} grad
//   L1LR               proximal gradient with backtracking
//   L1KLR              proximal gradient in u = K alpha, then alpha = K^{-1} u
//   SVM_RHL, KSVM_RHL  subgradient descent, step 1 / (2 lambda t), best iterate kept
//   NN_REG, NN_CLF     gradient descent (BB step + Armijo), then an exact output-layer solve

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "hpsteal/errors.hpp"
#include "hpsteal/models.hpp"
#include "model_math.hpp"

namespace hpsteal {

namespace {

using detail::sigmoid;

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void finish(SolverReport& rep, long iters, double change, double grad_norm, bool converged,
            std::string criterion) {
  rep.iterations = iters;
  rep.final_change = change;
  rep.final_grad_norm = grad_norm;
  rep.converged = converged;
  rep.criterion = std::move(criterion);
}

// ---------------------------------------------------------------- direct solves

// Cholesky solve plus one step of iterative refinement.
Vector refined_solve(const Matrix& A, const Eigen::LLT<Matrix>& llt, const Vector& rhs) {
  Vector x = llt.solve(rhs);
  x += llt.solve(rhs - A * x);
  return x;
}

ModelParams train_ridge(const Hyperparams& hp, const Dataset& ds) {
  const Matrix& X = ds.X();
  Matrix A = X.transpose() * X;
  A.diagonal().array() += hp.lambda;
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::NotPositiveDefinite, "X^T X + lambda I is not positive definite");
  ModelParams p;
  p.primal_w = refined_solve(A, llt, X.transpose() * ds.y());
  finish(p.solver_report, ds.rows(), 0.0, 0.0, true, "analytic");
  return p;
}

ModelParams train_kernel_ridge(const Hyperparams& hp, const Dataset& ds, const GramMatrix& K) {
  Matrix A = K.values();
  A.diagonal().array() += hp.lambda;
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::NotPositiveDefinite, "K + lambda I is not positive definite");
  ModelParams p;
  p.dual_alpha = refined_solve(A, llt, ds.y());
  finish(p.solver_report, ds.rows(), 0.0, 0.0, true, "analytic");
  return p;
}

// ---------------------------------------------------------------- coordinate descent

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

ModelParams train_coordinate_descent(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds,
                                     const TrainConfig& cfg) {
  const double l1 = hp.lambda;
  const double l2 = spec.id == Algorithm::ENet ? hp.lambda2.value_or(0.0) : 0.0;
  const Index m = ds.cols();
  const Matrix gram = ds.X().transpose() * ds.X();
  const Vector xty = ds.X().transpose() * ds.y();
  const double yy = ds.y().squaredNorm();

  ModelParams p;
  p.primal_w = Vector::Zero(m);
  Vector& w = *p.primal_w;
  SolverReport& rep = p.solver_report;

  auto obj = [&](const Vector& v) {
    return yy - 2.0 * xty.dot(v) + v.dot(gram * v) + l1 * v.lpNorm<1>() + l2 * v.squaredNorm();
  };

  if (l1 >= 2.0 * xty.cwiseAbs().maxCoeff()) {
    rep.degenerate_lasso = true;
    if (cfg.record_trace) rep.objective_trace.push_back(obj(w));
    finish(rep, 0, 0.0, 0.0, true, "degenerate_lasso");
    return p;
  }

  Vector gw = Vector::Zero(m);  // gram * w
  long it = 0;
  double change = std::numeric_limits<double>::infinity();
  for (; it < cfg.max_iters; ++it) {
    change = 0.0;
    for (Index j = 0; j < m; ++j) {
      const double gjj = gram(j, j);
      const double old = w[j];
      double updated = 0.0;
      if (gjj + l2 > 0.0) {
        const double z = xty[j] - gw[j] + gjj * old;
        updated = soft_threshold(2.0 * z, l1) / (2.0 * gjj + 2.0 * l2);
      }
      const double delta = updated - old;
      if (delta != 0.0) {
        w[j] = updated;
        gw.noalias() += gram.col(j) * delta;
        change = std::max(change, std::abs(delta));
      }
    }
    gw.noalias() = gram * w;
    if (cfg.record_trace) rep.objective_trace.push_back(obj(w));
    if (change <= cfg.tol) {
      ++it;
      break;
    }
  }
  const bool converged = change <= cfg.tol;
  finish(rep, it, change, 0.0, converged, converged ? "tolerance" : "max_iters");
  return p;
}

// ---------------------------------------------------------------- damped Newton

// A smooth convex problem in parameter vector x. `gradient` is the true gradient;
// `direction` returns the Newton direction (already solved).
struct SmoothProblem {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&, const Vector&)> direction;  // (x, grad) -> d
};

void run_newton(const SmoothProblem& prob, Vector& x, SolverReport& rep, const TrainConfig& cfg) {
  double f = prob.value(x);
  if (cfg.record_trace) rep.objective_trace.push_back(f);
  double change = std::numeric_limits<double>::infinity();
  double gnorm = 0.0;
  long it = 0;
  std::string criterion = "max_iters";
  bool converged = false;
  for (; it < cfg.max_iters; ++it) {
    const Vector g = prob.gradient(x);
    gnorm = inf_norm(g);
    const Vector d = prob.direction(x, g);
    double slope = g.dot(d);
    Vector dir = d;
    if (!(slope > 0.0) || !d.allFinite()) {
      dir = g;  // fall back to steepest descent
      slope = g.squaredNorm();
    }
    double t = 1.0;
    bool accepted = false;
    Vector trial;
    double ftrial = f;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      trial = x - t * dir;
      ftrial = prob.value(trial);
      if (std::isfinite(ftrial) && ftrial <= f - kArmijo * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      change = 0.0;
      converged = gnorm <= 10.0 * cfg.tol;
      criterion = converged ? "tolerance" : "stalled";
      break;
    }
    change = inf_norm(trial - x);
    if (change == 0.0) {
      // No representable progress left.
      ++it;
      converged = gnorm <= 10.0 * cfg.tol * std::max(1.0, std::abs(f));
      criterion = converged ? "tolerance" : "stalled";
      break;
    }
    x = std::move(trial);
    f = ftrial;
    if (cfg.record_trace) rep.objective_trace.push_back(f);
    if (change <= cfg.tol) {
      gnorm = inf_norm(prob.gradient(x));
      if (gnorm <= 10.0 * cfg.tol) {
        ++it;
        converged = true;
        criterion = "tolerance";
        break;
      }
    }
  }
  finish(rep, it, change, gnorm, converged, criterion);
}

ModelParams train_newton_linear(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds,
                                const TrainConfig& cfg) {
  const Matrix& X = ds.X();
  const Vector& y = ds.y();
  const double lambda = hp.lambda;
  const Index m = X.cols();
  SmoothProblem prob;
  if (spec.id == Algorithm::L2LR) {
    prob.value = [&](const Vector& w) { return detail::cross_entropy(X * w, y) + lambda * w.squaredNorm(); };
    prob.gradient = [&](const Vector& w) -> Vector {
      return X.transpose() * (sigmoid(Vector(X * w)) - y) + 2.0 * lambda * w;
    };
    prob.direction = [&](const Vector& w, const Vector& g) -> Vector {
      const Vector h = sigmoid(Vector(X * w));
      const Vector weights = h.cwiseProduct((1.0 - h.array()).matrix());
      Matrix H = X.transpose() * weights.asDiagonal() * X;
      H.diagonal().array() += 2.0 * lambda;
      return H.llt().solve(g);
    };
  } else {  // SVM_SHL
    prob.value = [&](const Vector& w) {
      return detail::hinge_loss(spec.id, X * w, y) + lambda * w.squaredNorm();
    };
    prob.gradient = [&](const Vector& w) -> Vector {
      const auto st = detail::hinge_state(X * w, y, 0.0);
      return X.transpose() * detail::hinge_score_gradient(spec.id, st) + 2.0 * lambda * w;
    };
    prob.direction = [&](const Vector& w, const Vector& g) -> Vector {
      const auto st = detail::hinge_state(X * w, y, 0.0);
      Matrix H = 2.0 * X.transpose() * st.active.asDiagonal() * X;
      H.diagonal().array() += 2.0 * lambda;
      return H.llt().solve(g);
    };
  }
  ModelParams p;
  p.primal_w = Vector::Zero(m);
  run_newton(prob, *p.primal_w, p.solver_report, cfg);
  return p;
}

ModelParams train_newton_kernel(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds,
                                const GramMatrix& Kg, const TrainConfig& cfg) {
  const Matrix& K = Kg.values();
  const Vector& y = ds.y();
  const double lambda = hp.lambda;
  const Index n = K.rows();
  SmoothProblem prob;
  // pre(a) = K^{-1} grad, so grad = K pre and the Newton system drops the outer K.
  std::function<Vector(const Vector&)> pre;
  std::function<Vector(const Vector&)> curvature;  // diagonal D of the loss in score space
  if (spec.id == Algorithm::L2KLR) {
    prob.value = [&](const Vector& a) {
      const Vector Ka = K * a;
      return detail::cross_entropy(Ka, y) + lambda * a.dot(Ka);
    };
    pre = [&](const Vector& a) -> Vector { return sigmoid(Vector(K * a)) - y + 2.0 * lambda * a; };
    curvature = [&](const Vector& a) -> Vector {
      const Vector h = sigmoid(Vector(K * a));
      return h.cwiseProduct((1.0 - h.array()).matrix());
    };
  } else {  // KSVM_SHL
    prob.value = [&](const Vector& a) {
      const Vector Ka = K * a;
      return detail::hinge_loss(spec.id, Ka, y) + lambda * a.dot(Ka);
    };
    pre = [&](const Vector& a) -> Vector {
      const auto st = detail::hinge_state(K * a, y, 0.0);
      return detail::hinge_score_gradient(spec.id, st) + 2.0 * lambda * a;
    };
    curvature = [&](const Vector& a) -> Vector {
      return 2.0 * detail::hinge_state(K * a, y, 0.0).active;
    };
  }
  prob.gradient = [&](const Vector& a) -> Vector { return K * pre(a); };
  prob.direction = [&](const Vector& a, const Vector&) -> Vector {
    Matrix S = curvature(a).asDiagonal() * K;
    S.diagonal().array() += 2.0 * lambda;
    return S.partialPivLu().solve(pre(a));
  };
  ModelParams p;
  p.dual_alpha = Vector::Zero(n);
  run_newton(prob, *p.dual_alpha, p.solver_report, cfg);
  return p;
}

// ---------------------------------------------------------------- proximal gradient

// Minimizes cross_entropy(D x) + lambda |x|_1 where D is `design` (identity when null).
Vector proximal_logistic(const Matrix* design, const Vector& y, double lambda, Index dim,
                         SolverReport& rep, const TrainConfig& cfg) {
  auto scores = [&](const Vector& x) -> Vector { return design ? Vector(*design * x) : x; };
  auto smooth = [&](const Vector& x) { return detail::cross_entropy(scores(x), y); };
  auto grad = [&](const Vector& x) -> Vector {
    const Vector r = sigmoid(scores(x)) - y;
    return design ? Vector(design->transpose() * r) : r;
  };
  auto prox = [&](const Vector& v, double t) -> Vector {
    return v.unaryExpr([&](double z) { return soft_threshold(z, t * lambda); });
  };

  Vector x = Vector::Zero(dim);
  double fs = smooth(x);
  double t = cfg.step_size;
  double change = std::numeric_limits<double>::infinity();
  long it = 0;
  bool converged = false;
  if (cfg.record_trace) rep.objective_trace.push_back(fs + lambda * x.lpNorm<1>());
  for (; it < cfg.max_iters; ++it) {
    const Vector g = grad(x);
    Vector next;
    double fnext = fs;
    bool accepted = false;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      next = prox(x - t * g, t);
      const Vector d = next - x;
      fnext = smooth(next);
      if (fnext <= fs + g.dot(d) + d.squaredNorm() / (2.0 * t) + 1e-15 * std::abs(fs)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    change = inf_norm(next - x);
    x = std::move(next);
    fs = fnext;
    if (cfg.record_trace) rep.objective_trace.push_back(fs + lambda * x.lpNorm<1>());
    if (change <= cfg.tol) {
      ++it;
      converged = true;
      break;
    }
    t *= 1.5;
  }
  finish(rep, it, change, 0.0, converged, converged ? "tolerance" : "max_iters");
  return x;
}

// ---------------------------------------------------------------- subgradient descent

ModelParams train_subgradient(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds,
                              const GramMatrix* Kg, const TrainConfig& cfg) {
  const bool kernel = is_kernel(spec.id);
  const Vector& y = ds.y();
  const double lambda = hp.lambda;
  const Index dim = kernel ? ds.rows() : ds.cols();

  auto scores = [&](const Vector& x) -> Vector { return kernel ? Vector(Kg->values() * x) : Vector(ds.X() * x); };
  auto value = [&](const Vector& x) {
    const Vector s = scores(x);
    const double reg = kernel ? x.dot(s) : x.squaredNorm();
    return detail::hinge_loss(spec.id, s, y) + lambda * reg;
  };
  // Kernel case uses the function-space subgradient K^{-1} grad.
  auto direction = [&](const Vector& x) -> Vector {
    const auto st = detail::hinge_state(scores(x), y, 0.0);
    const Vector gs = detail::hinge_score_gradient(spec.id, st);
    if (kernel) return gs + 2.0 * lambda * x;
    return ds.X().transpose() * gs + 2.0 * lambda * x;
  };

  ModelParams p;
  Vector x = Vector::Zero(dim);
  Vector best = x;
  double fbest = value(x);
  SolverReport& rep = p.solver_report;
  if (cfg.record_trace) rep.objective_trace.push_back(fbest);
  double change = std::numeric_limits<double>::infinity();
  long it = 0;
  bool converged = false;
  for (; it < cfg.max_iters; ++it) {
    const double eta = 1.0 / (2.0 * lambda * static_cast<double>(it + 1));
    const Vector next = x - eta * direction(x);
    change = inf_norm(next - x);
    x = next;
    const double f = value(x);
    if (f < fbest) {
      fbest = f;
      best = x;
    }
    if (cfg.record_trace) rep.objective_trace.push_back(fbest);
    if (change <= cfg.tol) {
      ++it;
      converged = true;
      break;
    }
  }
  finish(rep, it, change, 0.0, converged, converged ? "tolerance" : "max_iters");
  if (kernel)
    p.dual_alpha = best;
  else
    p.primal_w = best;
  return p;
}

// ---------------------------------------------------------------- neural networks

struct NnLayout {
  Index m, d;
  Index size() const { return m * d + d + d + 1; }
};

Vector pack(const NnParams& p) {
  const Index m = p.W1.rows(), d = p.W1.cols();
  Vector v(m * d + 2 * d + 1);
  v.head(m * d) = Eigen::Map<const Vector>(p.W1.data(), m * d);
  v.segment(m * d, d) = p.b1;
  v.segment(m * d + d, d) = p.w2;
  v[m * d + 2 * d] = p.b2;
  return v;
}

NnParams unpack(const Vector& v, NnLayout l) {
  NnParams p;
  p.W1 = Eigen::Map<const Matrix>(v.data(), l.m, l.d);
  p.b1 = v.segment(l.m * l.d, l.d);
  p.w2 = v.segment(l.m * l.d + l.d, l.d);
  p.b2 = v[l.m * l.d + 2 * l.d];
  return p;
}

Vector pack(const detail::NnGradient& g) {
  const Index m = g.W1.rows(), d = g.W1.cols();
  Vector v(m * d + 2 * d + 1);
  v.head(m * d) = Eigen::Map<const Vector>(g.W1.data(), m * d);
  v.segment(m * d, d) = g.b1;
  v.segment(m * d + d, d) = g.w2;
  v[m * d + 2 * d] = g.b2;
  return v;
}

// Solves the output layer (w2, b2) to its block optimum with W1, b1 fixed.
void refine_output_layer(Algorithm id, double lambda, NnParams& p, const Dataset& ds) {
  const Matrix H = detail::nn_forward(p, ds.X()).hidden;
  const Index d = H.cols();
  if (id == Algorithm::NN_REG) {
    const Eigen::RowVectorXd hmean = H.colwise().mean();
    const Matrix Hc = H.rowwise() - hmean;
    const double ymean = ds.y().mean();
    Matrix A = Hc.transpose() * Hc;
    A.diagonal().array() += lambda;
    p.w2 = A.llt().solve(Hc.transpose() * (ds.y().array() - ymean).matrix());
    p.b2 = ymean - hmean.dot(p.w2);
    return;
  }
  // NN_CLF: Newton on [w2; b2] for cross_entropy + lambda/2 |w2|^2.
  Matrix Z(H.rows(), d + 1);
  Z << H, Vector::Ones(H.rows());
  Vector theta(d + 1);
  theta << p.w2, p.b2;
  auto value = [&](const Vector& th) {
    return detail::cross_entropy(Z * th, ds.y()) + 0.5 * lambda * th.head(d).squaredNorm();
  };
  double f = value(theta);
  for (int it = 0; it < 100; ++it) {
    const Vector h = sigmoid(Vector(Z * theta));
    Vector g = Z.transpose() * (h - ds.y());
    g.head(d) += lambda * theta.head(d);
    const Vector wts = h.cwiseProduct((1.0 - h.array()).matrix());
    Matrix Hs = Z.transpose() * wts.asDiagonal() * Z;
    Hs.diagonal().head(d).array() += lambda;
    Hs.diagonal()[d] += 1e-12;
    const Vector step = Hs.ldlt().solve(g);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      const Vector trial = theta - t * step;
      const double ft = value(trial);
      if (ft <= f - kArmijo * t * g.dot(step)) {
        theta = trial;
        f = ft;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || inf_norm(t * step) <= 1e-15) break;
  }
  p.w2 = theta.head(d);
  p.b2 = theta[d];
}

ModelParams train_neural(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds,
                         const TrainConfig& cfg) {
  const NnLayout layout{ds.cols(), static_cast<Index>(spec.nn_hidden.value_or(8))};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  NnParams init;
  init.W1 = Matrix(layout.m, layout.d);
  for (Index i = 0; i < layout.m; ++i)
    for (Index j = 0; j < layout.d; ++j) init.W1(i, j) = unif(rng) / std::sqrt(static_cast<double>(layout.m));
  init.b1 = Vector::Zero(layout.d);
  init.w2 = Vector(layout.d);
  for (Index j = 0; j < layout.d; ++j) init.w2[j] = unif(rng) / std::sqrt(static_cast<double>(layout.d));
  init.b2 = 0.0;

  const double lambda = hp.lambda;
  auto value = [&](const Vector& th) { return detail::nn_objective(spec.id, lambda, unpack(th, layout), ds); };
  auto grad = [&](const Vector& th) { return pack(detail::nn_gradient(spec.id, lambda, unpack(th, layout), ds)); };

  ModelParams p;
  SolverReport& rep = p.solver_report;
  Vector theta = pack(init);
  double f = value(theta);
  Vector g = grad(theta);
  if (cfg.record_trace) rep.objective_trace.push_back(f);
  double t = cfg.step_size / std::max(1.0, static_cast<double>(ds.rows()));
  double change = std::numeric_limits<double>::infinity();
  double gnorm = inf_norm(g);
  long it = 0;
  bool converged = false;
  std::string criterion = "max_iters";
  for (; it < cfg.max_iters; ++it) {
    bool accepted = false;
    Vector trial;
    double ft = f;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      trial = theta - t * g;
      ft = value(trial);
      if (std::isfinite(ft) && ft <= f - kArmijo * t * g.squaredNorm()) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      criterion = "stalled";
      break;
    }
    const Vector s = trial - theta;
    const Vector gnew = grad(trial);
    const Vector dy = gnew - g;
    change = inf_norm(s);
    theta = std::move(trial);
    f = ft;
    g = gnew;
    gnorm = inf_norm(g);
    if (cfg.record_trace) rep.objective_trace.push_back(f);
    if (change <= cfg.tol && gnorm <= 10.0 * cfg.tol) {
      ++it;
      converged = true;
      criterion = "tolerance";
      break;
    }
    // Barzilai-Borwein initial step for the next line search.
    const double sy = s.dot(dy);
    t = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * t;
  }
  NnParams trained = unpack(theta, layout);
  refine_output_layer(spec.id, lambda, trained, ds);
  p.nn = std::move(trained);
  finish(rep, it, change, gnorm, converged, criterion);
  return p;
}

}  // namespace

ModelParams train(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds, const GramMatrix* K,
                  const TrainConfig& cfg) {
  spec.validate();
  hp.validate(spec.id);
  if (!(cfg.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be > 0");
  if (!(cfg.zero_threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "zero_threshold must be >= 0");
  if (cfg.max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  if (is_classifier(spec.id) != (ds.task() == Task::Classification))
    throw Error(ErrorCode::FamilyMismatch,
                fmt::format("{} cannot be trained on a {} dataset", to_string(spec.id), to_string(ds.task())));
  if (is_kernel(spec.id)) {
    if (K == nullptr) throw Error(ErrorCode::FamilyMismatch, fmt::format("{} needs a Gram matrix", to_string(spec.id)));
    if (K->size() != ds.rows()) throw Error(ErrorCode::FamilyMismatch, "Gram matrix size differs from n");
    if (spec.kernel_sigma && std::abs(*spec.kernel_sigma - K->sigma()) > 1e-12 * *spec.kernel_sigma)
      throw Error(ErrorCode::FamilyMismatch,
                  fmt::format("Gram matrix built with sigma {} but the spec asks for {}", K->sigma(), *spec.kernel_sigma));
  }

  ModelParams p;
  switch (spec.id) {
    case Algorithm::RR: p = train_ridge(hp, ds); break;
    case Algorithm::KRR: p = train_kernel_ridge(hp, ds, *K); break;
    case Algorithm::LASSO:
    case Algorithm::ENet: p = train_coordinate_descent(spec, hp, ds, cfg); break;
    case Algorithm::L2LR:
    case Algorithm::SVM_SHL: p = train_newton_linear(spec, hp, ds, cfg); break;
    case Algorithm::L2KLR:
    case Algorithm::KSVM_SHL: p = train_newton_kernel(spec, hp, ds, *K, cfg); break;
    case Algorithm::L1LR:
      p.primal_w = proximal_logistic(&ds.X(), ds.y(), hp.lambda, ds.cols(), p.solver_report, cfg);
      break;
    case Algorithm::L1KLR: {
      const Vector u = proximal_logistic(nullptr, ds.y(), hp.lambda, ds.rows(), p.solver_report, cfg);
      p.dual_alpha = K->solve(u);
      break;
    }
    case Algorithm::SVM_RHL:
    case Algorithm::KSVM_RHL: p = train_subgradient(spec, hp, ds, K, cfg); break;
    case Algorithm::NN_REG:
    case Algorithm::NN_CLF: p = train_neural(spec, hp, ds, cfg); break;
  }
  if (!p.active_block().allFinite())
    throw Error(ErrorCode::NotConverged, fmt::format("{} produced non-finite parameters", to_string(spec.id)));
  p.trained_objective = objective(spec, hp, p, ds, K, cfg);
  return p;
}

}  // namespace hpsteal
