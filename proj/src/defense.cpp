#include "hpsteal/defense.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include <fmt/format.h>

#include "hpsteal/errors.hpp"
#include "model_math.hpp"

namespace hpsteal {

namespace {

using detail::sigmoid;

std::optional<GramMatrix> gram_for(const AlgorithmSpec& spec, const Dataset& ds) {
  if (!is_kernel(spec.id)) return std::nullopt;
  return gram_gaussian_auto(ds, spec.kernel_sigma.value_or(kDefaultSigma));
}

const GramMatrix* ptr(const std::optional<GramMatrix>& K) { return K ? &*K : nullptr; }

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

double round_value(double x, int decimals) {
  if (decimals < 0) throw Error(ErrorCode::InvalidArgument, "decimals must be >= 0");
  if (!std::isfinite(x)) return x;
  const double scale = std::pow(10.0, decimals);
  const double scaled = x * scale;
  if (!std::isfinite(scaled) || std::abs(scaled) >= 9007199254740992.0) return x;
  return std::round(scaled) / scale;
}

ModelParams round_params(const ModelParams& params, int decimals) {
  if (decimals < 0) throw Error(ErrorCode::InvalidArgument, "decimals must be >= 0");
  ModelParams out = params;
  Vector& block = out.active_block();
  block = block.unaryExpr([decimals](double v) { return round_value(v, decimals); });
  return out;
}

std::vector<int> RoundingSweep::decimals() const {
  std::vector<int> d;
  d.reserve(entries.size());
  for (const auto& e : entries) d.push_back(e.decimals);
  return d;
}

RoundingSweep defense_sweep(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds_train,
                            const Dataset& ds_test, const TrainConfig& cfg, const std::vector<int>& decimals) {
  if (decimals.empty()) throw Error(ErrorCode::InvalidArgument, "decimals list is empty");
  for (std::size_t i = 0; i < decimals.size(); ++i) {
    if (decimals[i] < 0) throw Error(ErrorCode::InvalidArgument, "decimals must be >= 0");
    if (i > 0 && decimals[i] <= decimals[i - 1])
      throw Error(ErrorCode::InvalidArgument, "decimals must be strictly increasing");
  }
  const auto K = gram_for(spec, ds_train);
  const ModelParams params = train(spec, hp, ds_train, ptr(K), cfg);

  RoundingSweep sweep;
  sweep.algorithm = spec.id;
  sweep.lambda = hp.lambda;
  sweep.baseline_estimation_error = *steal(spec, hp, params, ds_train, ptr(K), cfg).relative_error;
  sweep.baseline_perf = test_performance(spec, params, ds_train, ds_test);

  const auto count = static_cast<long>(decimals.size());
  sweep.entries.resize(decimals.size());
  std::vector<std::exception_ptr> errors(decimals.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      RoundingEntry& e = sweep.entries[i];
      e.decimals = decimals[i];
      const ModelParams rounded = round_params(params, decimals[i]);
      e.perf = test_performance(spec, rounded, ds_train, ds_test);
      const double diff = std::abs(sweep.baseline_perf - e.perf);
      e.relative_perf_error = sweep.baseline_perf != 0.0 ? diff / std::abs(sweep.baseline_perf)
                              : diff == 0.0              ? 0.0
                                                         : std::numeric_limits<double>::infinity();
      try {
        const StealReport rep = steal(spec, hp, rounded, ds_train, ptr(K), cfg);
        e.lambda_hat = rep.lambda_hat.lambda;
        e.relative_estimation_error = *rep.relative_error;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::AllMasked && err.code() != ErrorCode::SingularNormalEquations) throw;
        e.all_masked = true;
        e.lambda_hat = std::numeric_limits<double>::quiet_NaN();
        e.relative_estimation_error = std::numeric_limits<double>::infinity();
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return sweep;
}

PerturbationCurve perturbation_curve(const AlgorithmSpec& spec, const Hyperparams& hp, const Dataset& ds,
                                     const TrainConfig& cfg, Index coord, const std::vector<double>& deltas) {
  if (!has_exact_trainer(spec.id))
    throw Error(ErrorCode::UnsupportedAlgorithm,
                fmt::format("{} has no exact trainer; the perturbation study needs a true minimum",
                            to_string(spec.id)));
  if (deltas.empty()) throw Error(ErrorCode::InvalidArgument, "deltas list is empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0) || !std::isfinite(deltas[i]))
      throw Error(ErrorCode::InvalidArgument, "deltas must be finite and > 0");
    if (i > 0 && !(deltas[i] > deltas[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "deltas must be strictly increasing");
  }
  const auto K = gram_for(spec, ds);
  const ModelParams params = train(spec, hp, ds, ptr(K), cfg);
  if (coord < 0 || coord >= params.active_block().size())
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("coordinate {} outside [0, {})", coord, params.active_block().size()));

  PerturbationCurve curve;
  curve.algorithm = spec.id;
  curve.lambda = hp.lambda;
  curve.coord = coord;
  curve.deltas = deltas;
  curve.abs_errors.resize(deltas.size());
  const auto count = static_cast<long>(deltas.size());
  std::vector<std::exception_ptr> errors(deltas.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      ModelParams moved = params;
      moved.active_block()[coord] += deltas[i];
      const LambdaEstimate est = estimate_lambda(build_attack_system(spec, moved, ds, ptr(K), cfg));
      curve.abs_errors[i] = std::abs(est.hyperparams.lambda - hp.lambda);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  rethrow_first(errors);

  // Columns are scaled to unit norm so that tiny deltas do not wreck the conditioning.
  const Index n = count;
  Matrix design(n, 2);
  Vector target(n);
  for (Index i = 0; i < n; ++i) {
    design(i, 0) = deltas[i];
    design(i, 1) = deltas[i] * deltas[i];
    target[i] = curve.abs_errors[i];
  }
  if (n == 1) {
    curve.fitted_slope = target[0] / deltas[0];
    return curve;
  }
  const Vector norms = design.colwise().norm();
  const Matrix scaled = design * norms.cwiseInverse().asDiagonal();
  const Vector coef = scaled.colPivHouseholderQr().solve(target);
  curve.fitted_slope = coef[0] / norms[0];
  curve.fitted_quadratic = coef[1] / norms[1];
  return curve;
}

Vector grad_lambda_approx(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds,
                          const GramMatrix* K, const TrainConfig& cfg) {
  check_family(spec, params, ds, K);
  const Matrix& X = ds.X();
  const Vector& y = ds.y();
  auto nonzero = [](double denom, std::string_view what) {
    if (!(denom > 0.0)) throw Error(ErrorCode::AllMasked, fmt::format("{} is zero", what));
    return denom;
  };
  switch (spec.id) {
    case Algorithm::RR: {
      const Vector& w = *params.primal_w;
      return X.transpose() * (y - 2.0 * X * w) / nonzero(w.squaredNorm(), "|w|");
    }
    case Algorithm::LASSO: {
      const Vector s = sign_masked(*params.primal_w, cfg.zero_threshold);
      return X.transpose() * (X * s) / nonzero(s.squaredNorm(), "|sign(w)|");
    }
    case Algorithm::L2LR: {
      const Vector& w = *params.primal_w;
      return X.transpose() * (y - sigmoid(Vector(X * w))) / nonzero(w.squaredNorm(), "|w|");
    }
    case Algorithm::L2KLR: {
      const Vector& alpha = *params.dual_alpha;
      const Matrix& Kv = K->values();
      return Kv * (y - sigmoid(Vector(Kv * alpha))) / nonzero(alpha.squaredNorm(), "|alpha|");
    }
    case Algorithm::L1LR: {
      const Vector& w = *params.primal_w;
      const Vector s = sign_masked(w, cfg.zero_threshold);
      const Vector h = sigmoid(Vector(X * w));
      const Vector wts = h.cwiseProduct((1.0 - h.array()).matrix());
      return X.transpose() * (wts.cwiseProduct(X * s)) / nonzero(s.squaredNorm(), "|sign(w)|");
    }
    case Algorithm::L1KLR: {
      const Vector& alpha = *params.dual_alpha;
      const Matrix& Kv = K->values();
      const Vector s = sign_masked(alpha, cfg.zero_threshold);
      const Vector h = sigmoid(Vector(Kv * alpha));
      const Vector wts = h.cwiseProduct((1.0 - h.array()).matrix());
      return Kv * (wts.cwiseProduct(Kv * s)) / nonzero(s.squaredNorm(), "|sign(alpha)|");
    }
    default:
      throw Error(ErrorCode::UnsupportedAlgorithm,
                  fmt::format("no gradient approximation for {}", to_string(spec.id)));
  }
}

Sensitivity sensitivity_compare(const AlgorithmSpec& spec_a, const AlgorithmSpec& spec_b, const Dataset& ds,
                                const Hyperparams& hp, const TrainConfig& cfg) {
  auto norm_for = [&](const AlgorithmSpec& spec) {
    const auto K = gram_for(spec, ds);
    const ModelParams params = train(spec, hp, ds, ptr(K), cfg);
    return grad_lambda_approx(spec, params, ds, ptr(K), cfg).norm();
  };
  return {norm_for(spec_a), norm_for(spec_b)};
}

Denominators approx_denominators(const Vector& w, double zero_threshold) {
  return {w.squaredNorm(), sign_masked(w, zero_threshold).squaredNorm()};
}

}  // namespace hpsteal
