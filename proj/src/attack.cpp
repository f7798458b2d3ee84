#include "hpsteal/attack.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/QR>
#include <fmt/format.h>

#include "hpsteal/errors.hpp"
#include "model_math.hpp"

namespace hpsteal {

namespace {

using detail::sigmoid;

constexpr double kMaxCondition = 1e12;

struct RawSystem {
  Matrix A;  // full length, before masking
  Vector b;
  Vector mask;  // 1 keeps the row
  double scale = 1.0;
  bool kernel_factored = false;
  Index excluded = 0;
  bool no_active = false;
};

void note_hinge(RawSystem& raw, const detail::HingeState& st, double margin_tol) {
  for (Index i = 0; i < st.margins.size(); ++i)
    if (std::abs(st.margins[i] - 1.0) <= margin_tol) ++raw.excluded;
  raw.no_active = st.active.sum() == 0.0;
}

RawSystem raw_system(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds, const GramMatrix* K,
                     const TrainConfig& cfg) {
  const Matrix& X = ds.X();
  const Vector& y = ds.y();
  RawSystem raw;
  auto single = [&raw](const Vector& a) { raw.A = a; };
  switch (spec.id) {
    case Algorithm::RR: {
      const Vector& w = *params.primal_w;
      single(w);
      raw.b = X.transpose() * (X * w - y);
      raw.scale = 2.0;
      break;
    }
    case Algorithm::KRR: {
      const Vector& alpha = *params.dual_alpha;
      single(alpha);
      raw.b = K->values() * alpha - y;
      raw.scale = 2.0;
      raw.kernel_factored = true;
      break;
    }
    case Algorithm::LASSO:
    case Algorithm::ENet: {
      const Vector& w = *params.primal_w;
      const Vector s = sign_masked(w, cfg.zero_threshold);
      raw.b = 2.0 * X.transpose() * (X * w - y);
      raw.mask = s.cwiseAbs();
      if (spec.id == Algorithm::LASSO) {
        single(s);
      } else {
        raw.A.resize(w.size(), 2);
        raw.A.col(0) = s;
        raw.A.col(1) = 2.0 * w.cwiseProduct(s.cwiseAbs());
      }
      break;
    }
    case Algorithm::L2LR: {
      const Vector& w = *params.primal_w;
      single(2.0 * w);
      raw.b = X.transpose() * (sigmoid(Vector(X * w)) - y);
      break;
    }
    case Algorithm::L1LR: {
      const Vector& w = *params.primal_w;
      const Vector s = sign_masked(w, cfg.zero_threshold);
      single(s);
      raw.mask = s.cwiseAbs();
      raw.b = X.transpose() * (sigmoid(Vector(X * w)) - y);
      break;
    }
    case Algorithm::L2KLR: {
      const Vector& alpha = *params.dual_alpha;
      single(2.0 * alpha);
      raw.b = sigmoid(Vector(K->values() * alpha)) - y;
      raw.kernel_factored = true;
      break;
    }
    case Algorithm::L1KLR: {
      const Vector Ka = K->values() * *params.dual_alpha;
      const Vector s = sign_masked(Ka, cfg.zero_threshold);
      single(s);
      raw.mask = s.cwiseAbs();
      raw.b = sigmoid(Ka) - y;
      raw.kernel_factored = true;
      break;
    }
    case Algorithm::SVM_RHL:
    case Algorithm::SVM_SHL: {
      const Vector& w = *params.primal_w;
      const auto st = detail::hinge_state(X * w, y, cfg.margin_tol);
      note_hinge(raw, st, cfg.margin_tol);
      const Vector g = detail::hinge_score_gradient(spec.id, st);
      if (spec.id == Algorithm::SVM_RHL) {
        single(2.0 * w);
        raw.b = X.transpose() * g;
      } else {
        single(w);
        raw.b = 0.5 * (X.transpose() * g);
        raw.scale = 2.0;
      }
      break;
    }
    case Algorithm::KSVM_RHL:
    case Algorithm::KSVM_SHL: {
      const Vector Ka = K->values() * *params.dual_alpha;
      const auto st = detail::hinge_state(Ka, y, cfg.margin_tol);
      note_hinge(raw, st, cfg.margin_tol);
      const Vector g = detail::hinge_score_gradient(spec.id, st);
      if (spec.id == Algorithm::KSVM_RHL) {
        single(2.0 * Ka);
        raw.b = K->values() * g;
      } else {
        single(Ka);
        raw.b = 0.5 * (K->values() * g);
        raw.scale = 2.0;
      }
      break;
    }
    case Algorithm::NN_REG: {
      const auto& p = *params.nn;
      const auto f = detail::nn_forward(p, X);
      single(2.0 * p.w2);
      raw.b = -2.0 * f.hidden.transpose() * (y - f.output);
      break;
    }
    case Algorithm::NN_CLF: {
      const auto& p = *params.nn;
      const auto f = detail::nn_forward(p, X);
      single(p.w2);
      raw.b = -(f.hidden.transpose() * (y - sigmoid(f.output)));
      break;
    }
  }
  if (raw.mask.size() == 0) raw.mask = Vector::Ones(raw.b.size());
  return raw;
}

}  // namespace

AttackSystem build_attack_system(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds,
                                 const GramMatrix* K, const TrainConfig& cfg) {
  spec.validate();
  check_family(spec, params, ds, K);
  const RawSystem raw = raw_system(spec, params, ds, K, cfg);

  AttackSystem sys;
  sys.algorithm = spec.id;
  sys.gradient_scale = raw.scale;
  sys.kernel_factored = raw.kernel_factored;
  sys.excluded_instances = raw.excluded;
  sys.no_active_instances = raw.no_active;
  const Index h = raw.A.cols();
  for (Index i = 0; i < raw.b.size(); ++i) {
    if (raw.mask[i] == 0.0 || raw.A.row(i).cwiseAbs().maxCoeff() == 0.0) {
      ++sys.masked_count;
      continue;
    }
    sys.row_index.push_back(i);
  }
  sys.used_rows = static_cast<Index>(sys.row_index.size());
  if (sys.used_rows == 0)
    throw Error(ErrorCode::AllMasked,
                fmt::format("{}: every row of the attack system was masked", to_string(spec.id)));
  if (sys.used_rows < h)
    throw Error(ErrorCode::AllMasked,
                fmt::format("{}: {} usable rows for {} hyperparameters", to_string(spec.id), sys.used_rows, h));
  sys.A.resize(sys.used_rows, h);
  sys.b.resize(sys.used_rows);
  for (Index r = 0; r < sys.used_rows; ++r) {
    sys.A.row(r) = raw.A.row(sys.row_index[r]);
    sys.b[r] = raw.b[sys.row_index[r]];
  }
  if (!sys.A.allFinite() || !sys.b.allFinite())
    throw Error(ErrorCode::InvalidArgument, fmt::format("{}: attack system is not finite", to_string(spec.id)));
  return sys;
}

LambdaEstimate estimate_lambda(const AttackSystem& sys) {
  if (sys.A.rows() != sys.b.size() || sys.A.rows() == 0)
    throw Error(ErrorCode::LengthMismatch, "attack system A and b differ in length");
  LambdaEstimate est;
  if (sys.A.cols() == 1) {
    const Vector a = sys.A.col(0);
    const double aa = a.squaredNorm();
    if (!(aa > 0.0)) throw Error(ErrorCode::SingularNormalEquations, "attack vector a is zero");
    est.hyperparams.lambda = -a.dot(sys.b) / aa;
    est.non_positive = !(est.hyperparams.lambda > 0.0);
    return est;
  }
  if (sys.A.cols() != 2) throw Error(ErrorCode::InvalidArgument, "attack system has more than two columns");
  const Vector c0 = sys.A.col(0), c1 = sys.A.col(1);
  const double g00 = c0.squaredNorm(), g01 = c0.dot(c1), g11 = c1.squaredNorm();
  const double r0 = -c0.dot(sys.b), r1 = -c1.dot(sys.b);
  // Eigenvalues of the symmetric 2x2 normal matrix.
  const double mean = 0.5 * (g00 + g11);
  const double radius = std::hypot(0.5 * (g00 - g11), g01);
  const double lo = mean - radius, hi = mean + radius;
  est.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(est.condition <= kMaxCondition))
    throw Error(ErrorCode::SingularNormalEquations,
                fmt::format("normal equations are singular (condition {:.3g})", est.condition));
  const double det = g00 * g11 - g01 * g01;
  est.hyperparams.lambda = (g11 * r0 - g01 * r1) / det;
  est.hyperparams.lambda2 = (g00 * r1 - g01 * r0) / det;
  est.non_positive = !(est.hyperparams.lambda > 0.0) || !(*est.hyperparams.lambda2 > 0.0);
  return est;
}

double relative_error(double estimate, double truth) { return std::abs(estimate - truth) / std::abs(truth); }

StealReport steal(const AlgorithmSpec& spec, const std::optional<Hyperparams>& hp_true, const ModelParams& params,
                  const Dataset& ds, const GramMatrix* K, const TrainConfig& cfg) {
  if (hp_true) hp_true->validate(spec.id);
  const AttackSystem sys = build_attack_system(spec, params, ds, K, cfg);
  StealReport rep;
  rep.algorithm = spec.id;
  rep.used_rows = sys.used_rows;
  rep.masked_count = sys.masked_count;
  rep.excluded_instances = sys.excluded_instances;
  if (sys.no_active_instances) rep.warnings.emplace_back("no active hinge instances; b is zero");
  const LambdaEstimate est = estimate_lambda(sys);
  rep.lambda_hat = est.hyperparams;
  rep.condition = est.condition;
  if (est.non_positive) rep.warnings.emplace_back("non-positive estimate");
  if (hp_true) {
    rep.lambda_true = hp_true;
    rep.relative_error = relative_error(est.hyperparams.lambda, hp_true->lambda);
    if (est.hyperparams.lambda2 && hp_true->lambda2)
      rep.relative_error2 = relative_error(*est.hyperparams.lambda2, *hp_true->lambda2);
  }
  return rep;
}

Vector steal_model_parameters(const PredictionOracle& oracle, OracleKind kind, const Matrix& queries) {
  const Index q = queries.rows();
  const Index m = queries.cols();
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "parameter dimension must be >= 1");
  if (q < m) throw Error(ErrorCode::InvalidArgument, fmt::format("query budget {} is below dimension {}", q, m));
  Vector rhs(q);
  for (Index i = 0; i < q; ++i) {
    const double out = oracle(queries.row(i).transpose());
    if (kind == OracleKind::LogisticWithConfidence) {
      if (!(out > 0.0 && out < 1.0))
        throw Error(ErrorCode::ConfidenceOutOfRange,
                    fmt::format("query {} returned confidence {} outside (0, 1)", i + 1, out));
      rhs[i] = std::log(out) - std::log1p(-out);
    } else {
      if (!std::isfinite(out)) throw Error(ErrorCode::InvalidArgument, fmt::format("query {} returned {}", i + 1, out));
      rhs[i] = out;
    }
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(queries);
  qr.setThreshold(1e-10);
  if (qr.rank() < m)
    throw Error(ErrorCode::DegenerateQueries, fmt::format("query matrix has rank {} < {}", qr.rank(), m));
  return qr.solve(rhs);
}

Vector steal_model_parameters(const PredictionOracle& oracle, OracleKind kind, Index m, Index query_budget,
                              std::uint64_t seed) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "parameter dimension must be >= 1");
  if (query_budget < m)
    throw Error(ErrorCode::InvalidArgument, fmt::format("query budget {} is below dimension {}", query_budget, m));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix queries(query_budget, m);
  for (Index i = 0; i < query_budget; ++i)
    for (Index j = 0; j < m; ++j) queries(i, j) = normal(rng);
  return steal_model_parameters(oracle, kind, queries);
}

}  // namespace hpsteal
