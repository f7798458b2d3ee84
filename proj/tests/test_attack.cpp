#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hpsteal/attack.hpp"
#include "hpsteal/errors.hpp"
#include "test_util.hpp"

namespace hpsteal {
namespace {

using testing::random_dataset;
using testing::random_params;

ModelParams primal(Vector w) {
  ModelParams p;
  p.primal_w = std::move(w);
  return p;
}

AttackSystem system_of(Vector a, Vector b) {
  AttackSystem sys;
  sys.A = a;
  sys.b = std::move(b);
  sys.used_rows = sys.b.size();
  return sys;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

TEST(BuildSystem, RidgeToy) {
  const Dataset ds(Matrix::Identity(2, 2), Vector::Ones(2), Task::Regression);
  const AttackSystem sys = build_attack_system(AlgorithmSpec::make(Algorithm::RR), primal(Vector::Constant(2, 0.5)), ds);
  EXPECT_EQ(sys.a(), Vector::Constant(2, 0.5));
  EXPECT_EQ(sys.b, Vector::Constant(2, -0.5));
  EXPECT_EQ(sys.masked_count, 0);
}

TEST(BuildSystem, LassoMasksZeroCoordinate) {
  const Dataset ds(Matrix::Identity(2, 2), Vector::Ones(2), Task::Regression);
  Vector w(2);
  w << 0.0, 0.3;
  const AttackSystem sys = build_attack_system(AlgorithmSpec::make(Algorithm::LASSO), primal(w), ds);
  EXPECT_EQ(sys.used_rows, 1);
  EXPECT_EQ(sys.masked_count, 1);
  EXPECT_EQ(sys.row_index, std::vector<Index>{1});
}

TEST(BuildSystem, AllMasked) {
  const Dataset ds(Matrix::Identity(2, 2), Vector::Ones(2), Task::Regression);
  EXPECT_EQ(code_of([&] { build_attack_system(AlgorithmSpec::make(Algorithm::LASSO), primal(Vector::Zero(2)), ds); }),
            ErrorCode::AllMasked);
}

TEST(BuildSystem, KernelHingeWithNoActiveInstances) {
  Matrix X(2, 1);
  X << 0, 1;
  Vector y(2);
  y << 0, 1;
  const Dataset ds(X, y, Task::Classification);
  const auto spec = AlgorithmSpec::make(Algorithm::KSVM_RHL);
  const GramMatrix K = gram_gaussian(ds);
  ModelParams p;
  Vector target(2);
  target << -2, 2;  // margins of 2 on both instances
  p.dual_alpha = K.solve(target);
  const AttackSystem sys = build_attack_system(spec, p, ds, &K);
  EXPECT_TRUE(sys.no_active_instances);
  // b = K sum over active instances, which is empty.
  EXPECT_LE(sys.b.cwiseAbs().maxCoeff(), 0.0);
  const LambdaEstimate est = estimate_lambda(sys);
  EXPECT_EQ(est.hyperparams.lambda, 0.0);
  EXPECT_TRUE(est.non_positive);
  const StealReport rep = steal(spec, Hyperparams{1.0}, p, ds, &K);
  EXPECT_FALSE(rep.warnings.empty());
}

TEST(BuildSystem, HingeKinkIsExcluded) {
  Matrix X(2, 1);
  X << 1, 1;
  Vector y(2);
  y << 1, 1;
  const Dataset ds(X, y, Task::Classification);
  Vector w(1);
  w << 1.0;  // both margins exactly 1
  const AttackSystem sys = build_attack_system(AlgorithmSpec::make(Algorithm::SVM_RHL), primal(w), ds);
  EXPECT_EQ(sys.excluded_instances, 2);
  EXPECT_TRUE(sys.no_active_instances);
}

TEST(EstimateLambda, Examples) {
  Vector a(2), b(2);
  a << 1, 2;
  b << -2, -4;
  EXPECT_DOUBLE_EQ(estimate_lambda(system_of(a, b)).hyperparams.lambda, 2.0);
  a << 1, 1;
  b << -1, -3;
  EXPECT_DOUBLE_EQ(estimate_lambda(system_of(a, b)).hyperparams.lambda, 2.0);
}

TEST(EstimateLambda, MatchesDenseScan) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-5, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector a = testing::random_vector(20, 300 + trial);
    const Vector b = -unif(rng) * a + 0.3 * testing::random_vector(20, 400 + trial);
    double best = 0, best_val = INFINITY;
    for (long k = -100000; k <= 100000; ++k) {
      const double lam = k * 1e-4;
      const double v = (b + lam * a).squaredNorm();
      if (v < best_val) {
        best_val = v;
        best = lam;
      }
    }
    EXPECT_NEAR(estimate_lambda(system_of(a, b)).hyperparams.lambda, best, 1e-3);
  }
}

TEST(EstimateLambda, ScaleEquivariance) {
  const Vector a = testing::random_vector(15, 1), b = testing::random_vector(15, 2);
  const double base = estimate_lambda(system_of(a, b)).hyperparams.lambda;
  for (double c : {-3.0, 1e-4, 7.5}) EXPECT_NEAR(estimate_lambda(system_of(c * a, c * b)).hyperparams.lambda, base, 1e-12 * std::max(1.0, std::abs(base)));
}

TEST(EstimateLambda, PerCoordinateRatios) {
  const Vector a = testing::random_vector(12, 9);
  const double lambda = 0.731;
  const Vector b = -lambda * a;
  const double est = estimate_lambda(system_of(a, b)).hyperparams.lambda;
  for (Index i = 0; i < a.size(); ++i) EXPECT_NEAR(-b[i] / a[i], est, 1e-10);
}

TEST(EstimateLambda, TwoColumnsAndSingularity) {
  const Dataset ds = testing::diabetes();
  const auto spec = AlgorithmSpec::make(Algorithm::ENet);
  TrainConfig cfg;
  cfg.tol = 1e-12;
  const Hyperparams hp{0.05, 0.2};
  const ModelParams p = train(spec, hp, ds, nullptr, cfg);
  const StealReport rep = steal(spec, hp, p, ds, nullptr, cfg);
  ASSERT_TRUE(rep.relative_error2.has_value());
  EXPECT_LE(*rep.relative_error, 1e-4);
  EXPECT_LE(*rep.relative_error2, 1e-4);
  EXPECT_GE(rep.condition, 1.0);

  // Equal magnitudes make the two columns collinear.
  const Dataset toy(Matrix::Identity(3, 3), Vector::Ones(3), Task::Regression);
  Vector w(3);
  w << 0.5, -0.5, 0.5;
  EXPECT_EQ(code_of([&] { estimate_lambda(build_attack_system(spec, primal(w), toy)); }),
            ErrorCode::SingularNormalEquations);
}

TEST(Steal, RidgeToyIsExact) {
  const Dataset ds(Matrix::Identity(2, 2), Vector::Ones(2), Task::Regression);
  const auto spec = AlgorithmSpec::make(Algorithm::RR);
  const StealReport rep = steal(spec, Hyperparams{1.0}, train(spec, {1.0}, ds), ds);
  EXPECT_LE(*rep.relative_error, 1e-12);
}

TEST(Steal, KernelRidgeScalarIsExact) {
  const Dataset ds(Matrix::Zero(1, 1), Vector::Constant(1, 2.0), Task::Regression);
  const GramMatrix K = gram_gaussian(ds, kDefaultSigma, 0.0);
  const auto spec = AlgorithmSpec::make(Algorithm::KRR);
  const StealReport rep = steal(spec, Hyperparams{1.0}, train(spec, {1.0}, ds, &K), ds, &K);
  EXPECT_EQ(rep.lambda_hat.lambda, 1.0);
}

TEST(Steal, ExactTrainersAcrossGrid) {
  const Dataset ds = testing::diabetes();
  const GramMatrix K = gram_gaussian_auto(ds);
  for (double lambda : {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}) {
    for (Algorithm id : {Algorithm::RR, Algorithm::KRR}) {
      const auto spec = AlgorithmSpec::make(id);
      const GramMatrix* k = is_kernel(id) ? &K : nullptr;
      const StealReport rep = steal(spec, Hyperparams{lambda}, train(spec, {lambda}, ds, k), ds, k);
      EXPECT_LE(*rep.relative_error, 1e-8) << to_string(id) << " lambda " << lambda;
    }
  }
}

TEST(Steal, LassoOnDiabetes) {
  const Dataset ds = testing::diabetes();
  const auto spec = AlgorithmSpec::make(Algorithm::LASSO);
  TrainConfig cfg;
  cfg.tol = 1e-10;
  const StealReport rep = steal(spec, Hyperparams{0.1}, train(spec, {0.1}, ds, nullptr, cfg), ds, nullptr, cfg);
  EXPECT_LE(*rep.relative_error, 1e-4);
  EXPECT_FALSE(rep.lambda_true->lambda2.has_value());
}

TEST(Steal, RelativeErrorOnlyWithTruth) {
  const Dataset ds = random_dataset(20, 3, Task::Regression, 1);
  const auto spec = AlgorithmSpec::make(Algorithm::RR);
  const ModelParams p = train(spec, {0.5}, ds);
  EXPECT_FALSE(steal(spec, std::nullopt, p, ds).relative_error.has_value());
  EXPECT_TRUE(steal(spec, Hyperparams{0.5}, p, ds).relative_error.has_value());
}

// b + lambda a reproduces the model gradient (up to the recorded scale and K factor).
class Consistency : public ::testing::TestWithParam<Algorithm> {};

TEST_P(Consistency, SystemMatchesSubgradient) {
  const auto spec = AlgorithmSpec::make(GetParam());
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Dataset ds = random_dataset(12, 4, task_of(spec.id), 50 + seed);
    std::optional<GramMatrix> K;
    if (is_kernel(spec.id)) K = gram_gaussian(ds);
    const GramMatrix* k = K ? &*K : nullptr;
    Hyperparams hp{0.83};
    if (spec.id == Algorithm::ENet) hp.lambda2 = 0.4;
    const ModelParams p = random_params(spec, ds, 60 + seed);
    const AttackSystem sys = build_attack_system(spec, p, ds, k);
    ASSERT_EQ(sys.masked_count, 0);
    Vector lam(sys.A.cols());
    lam[0] = hp.lambda;
    if (lam.size() == 2) lam[1] = *hp.lambda2;
    Vector predicted = sys.gradient_scale * (sys.b + sys.A * lam);
    if (sys.kernel_factored) predicted = K->values() * predicted;
    const Vector g = subgradient(spec, hp, p, ds, k);
    EXPECT_LE((predicted - g).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, g.cwiseAbs().maxCoeff()))
        << to_string(spec.id);
  }
}

INSTANTIATE_TEST_SUITE_P(All, Consistency, ::testing::ValuesIn(kAllAlgorithms),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Consistency, MaskedRowsAgreeWithSubgradient) {
  const Dataset ds = random_dataset(12, 4, Task::Regression, 3);
  Vector w = testing::random_vector(4, 4);
  w[2] = 0.0;
  const auto spec = AlgorithmSpec::make(Algorithm::LASSO);
  const AttackSystem sys = build_attack_system(spec, primal(w), ds);
  ASSERT_EQ(sys.masked_count, 1);
  const Vector g = subgradient(spec, {0.6}, primal(w), ds);
  for (Index r = 0; r < sys.used_rows; ++r)
    EXPECT_NEAR(sys.b[r] + 0.6 * sys.A(r, 0), g[sys.row_index[r]], 1e-10);
}

TEST(StealParameters, LinearTwoQueries) {
  Vector w(2);
  w << 2, -1;
  auto oracle = [&](const Vector& x) { return w.dot(x); };
  const Vector got = steal_model_parameters(oracle, OracleKind::LinearRegression, 2, 2, 3);
  EXPECT_LE((got - w).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StealParameters, LogisticTenQueries) {
  const Vector w = Vector::Ones(2);
  auto oracle = [&](const Vector& x) { return 1.0 / (1.0 + std::exp(-w.dot(x))); };
  const Vector got = steal_model_parameters(oracle, OracleKind::LogisticWithConfidence, 2, 10, 4);
  EXPECT_LE((got - w).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(StealParameters, Errors) {
  auto linear = [](const Vector& x) { return x.sum(); };
  EXPECT_EQ(code_of([&] { steal_model_parameters(linear, OracleKind::LinearRegression, Matrix::Ones(5, 3)); }),
            ErrorCode::DegenerateQueries);
  auto saturated = [](const Vector&) { return 1.0; };
  EXPECT_EQ(code_of([&] { steal_model_parameters(saturated, OracleKind::LogisticWithConfidence, 2, 4, 0); }),
            ErrorCode::ConfidenceOutOfRange);
  EXPECT_EQ(code_of([&] { steal_model_parameters(linear, OracleKind::LinearRegression, 3, 2, 0); }),
            ErrorCode::InvalidArgument);
}

TEST(StealParameters, ChainedIntoHyperparameterSteal) {
  const Dataset ds = preprocess(synth_gaussian(50, 5, 21));
  const auto spec = AlgorithmSpec::make(Algorithm::L2LR);
  const Hyperparams hp{0.1};
  const ModelParams trained = train(spec, hp, ds);
  const Vector& w = *trained.primal_w;
  auto oracle = [&](const Vector& x) { return 1.0 / (1.0 + std::exp(-w.dot(x))); };
  const Vector stolen = steal_model_parameters(oracle, OracleKind::LogisticWithConfidence, ds.cols(), 50, 8);
  EXPECT_LE((stolen - w).cwiseAbs().maxCoeff(), 1e-6);
  const StealReport rep = steal(spec, hp, primal(stolen), ds);
  EXPECT_LE(*rep.relative_error, 1e-2);
}

}  // namespace
}  // namespace hpsteal
