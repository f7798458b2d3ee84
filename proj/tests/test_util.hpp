#pragma once

#include <filesystem>
#include <random>

#include "hpsteal/attack.hpp"
#include "hpsteal/data.hpp"
#include "hpsteal/models.hpp"

namespace hpsteal::testing {

inline std::filesystem::path fixture(const char* name) {
  return std::filesystem::path(HPSTEAL_DATA_DIR) / name;
}

inline Dataset diabetes() { return preprocess(load_csv(fixture("diabetes.csv"), std::string("target"), Task::Regression)); }

inline Dataset iris() {
  return preprocess(load_csv(fixture("iris_binary.csv"), std::string("label"), Task::Classification));
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline Vector random_vector(Index n, std::uint64_t seed) { return random_matrix(n, 1, seed).col(0); }

/// Random raw regression or classification set, preprocessed.
inline Dataset random_dataset(Index n, Index m, Task task, std::uint64_t seed) {
  Matrix X = random_matrix(n, m, seed);
  Vector y = random_vector(n, seed + 1000);
  if (task == Task::Classification) {
    for (Index i = 0; i < n; ++i) y[i] = (i % 2 == 0) ? 1.0 : 0.0;
  }
  return preprocess(Dataset(X, y, task));
}

/// Random parameters of the right family for spec on ds.
inline ModelParams random_params(const AlgorithmSpec& spec, const Dataset& ds, std::uint64_t seed, double scale = 0.5) {
  ModelParams p;
  if (is_neural(spec.id)) {
    const Index d = spec.nn_hidden.value_or(8);
    NnParams nn;
    nn.W1 = scale * random_matrix(ds.cols(), d, seed);
    nn.b1 = scale * random_vector(d, seed + 1);
    nn.w2 = scale * random_vector(d, seed + 2);
    nn.b2 = 0.1;
    p.nn = nn;
  } else if (is_kernel(spec.id)) {
    p.dual_alpha = scale * random_vector(ds.rows(), seed);
  } else {
    p.primal_w = scale * random_vector(ds.cols(), seed);
  }
  return p;
}

/// Central finite-difference gradient of the objective with respect to the active block.
inline Vector fd_gradient(const AlgorithmSpec& spec, const Hyperparams& hp, const ModelParams& params,
                          const Dataset& ds, const GramMatrix* K, double step = 1e-6) {
  const Vector& block = params.active_block();
  Vector g(block.size());
  for (Index i = 0; i < block.size(); ++i) {
    ModelParams plus = params, minus = params;
    plus.active_block()[i] += step;
    minus.active_block()[i] -= step;
    g[i] = (objective(spec, hp, plus, ds, K) - objective(spec, hp, minus, ds, K)) / (2.0 * step);
  }
  return g;
}

inline double relative_gap(const Vector& got, const Vector& want) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(1.0, want.cwiseAbs().maxCoeff());
}

/// lambda_hat as a function of the active block, for finite differences of the estimator.
inline double lambda_at(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds, const GramMatrix* K) {
  return estimate_lambda(build_attack_system(spec, params, ds, K)).hyperparams.lambda;
}

inline Vector fd_lambda_gradient(const AlgorithmSpec& spec, const ModelParams& params, const Dataset& ds,
                                 const GramMatrix* K, double step) {
  const Vector& block = params.active_block();
  Vector g(block.size());
  for (Index i = 0; i < block.size(); ++i) {
    ModelParams plus = params, minus = params;
    plus.active_block()[i] += step;
    minus.active_block()[i] -= step;
    g[i] = (lambda_at(spec, plus, ds, K) - lambda_at(spec, minus, ds, K)) / (2.0 * step);
  }
  return g;
}

}  // namespace hpsteal::testing
