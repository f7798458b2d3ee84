#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "hpsteal/errors.hpp"
#include "test_util.hpp"

namespace hpsteal {
namespace {

using testing::fixture;

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hpsteal_" + name);
}

TEST(LoadCsv, DiabetesShape) {
  const Dataset ds = load_csv(fixture("diabetes.csv"), std::string("target"), Task::Regression);
  EXPECT_EQ(ds.rows(), 442);
  EXPECT_EQ(ds.cols(), 10);
  EXPECT_EQ(ds.feature_names().front(), "age");
  EXPECT_EQ(ds.preprocessing(), Preprocessing::Raw);
}

TEST(LoadCsv, IrisShape) {
  const Dataset ds = load_csv(fixture("iris_binary.csv"), std::string("label"), Task::Classification);
  EXPECT_EQ(ds.rows(), 100);
  EXPECT_EQ(ds.cols(), 4);
  EXPECT_EQ((ds.y().array() == 1.0).count(), 50);
}

TEST(LoadCsv, BadCellReportsRowAndColumn) {
  const auto path = temp_file("bad.csv");
  std::ofstream(path) << "1,2\nabc,3\n4,5\n";
  try {
    load_csv(path, std::size_t{1}, Task::Regression);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), 1u);
  }
}

TEST(LoadCsv, MissingTarget) {
  EXPECT_THROW(
      {
        try {
          load_csv(fixture("diabetes.csv"), std::string("nope"), Task::Regression);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::MissingTarget);
          throw;
        }
      },
      Error);
}

TEST(LoadCsv, NonBinaryLabel) {
  const auto path = temp_file("three.csv");
  std::ofstream(path) << "x,y\n1,0\n2,1\n3,2\n";
  try {
    load_csv(path, std::string("y"), Task::Classification);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonBinaryLabel);
  }
}

TEST(LoadCsv, SaveRoundTrip) {
  const Dataset ds = testing::random_dataset(30, 4, Task::Regression, 3);
  const auto path = temp_file("roundtrip.csv");
  save_csv(ds, path);
  const Dataset back = load_csv(path, std::string("target"), Task::Regression);
  EXPECT_LE((back.X() - ds.X()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((back.y() - ds.y()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Preprocess, CentersColumns) {
  Matrix X(2, 2);
  X << 1, 3, 3, 1;
  const Dataset ds = preprocess(Dataset(X, Vector::Ones(2), Task::Regression));
  Matrix want(2, 2);
  want << -1, 1, 1, -1;
  EXPECT_EQ(ds.X(), want);
  EXPECT_EQ(ds.preprocessing(), Preprocessing::Centered);
  EXPECT_EQ(ds.y(), Vector::Zero(2));
}

TEST(Preprocess, UnitNormRows) {
  Matrix X(1, 2);
  X << 3, 4;
  const Dataset ds = preprocess(Dataset(X, Vector::Ones(1), Task::Classification));
  EXPECT_DOUBLE_EQ(ds.X()(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(ds.X()(0, 1), 0.8);
}

TEST(Preprocess, ZeroRow) {
  try {
    preprocess(Dataset(Matrix::Zero(1, 2), Vector::Ones(1), Task::Classification));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroRow);
  }
}

TEST(Preprocess, RecenteringIsIdempotent) {
  const Dataset once = testing::diabetes();
  const Dataset again = preprocess(Dataset(once.X(), once.y(), Task::Regression));
  EXPECT_LE((again.X() - once.X()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((again.y() - once.y()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dataset, RejectsBadLabelsAndShapes) {
  EXPECT_THROW(Dataset(Matrix::Ones(2, 2), Vector::Constant(2, 2.0), Task::Classification), Error);
  EXPECT_THROW(Dataset(Matrix::Ones(2, 2), Vector::Ones(3), Task::Regression), Error);
  EXPECT_THROW(Dataset(Matrix::Ones(2, 2), Vector::Ones(2), Task::Classification, Preprocessing::UnitNormalized),
               Error);
}

TEST(Split, HalvesDiabetes) {
  const auto [a, b] = split(testing::diabetes(), 0.5, 7);
  EXPECT_EQ(a.rows(), 221);
  EXPECT_EQ(b.rows(), 221);
  EXPECT_EQ(a.preprocessing(), Preprocessing::Centered);
}

TEST(Split, DeterministicAndExhaustive) {
  const auto [a1, b1] = split_indices(10, 0.5, 42);
  const auto [a2, b2] = split_indices(10, 0.5, 42);
  EXPECT_EQ(a1, a2);
  EXPECT_EQ(b1, b2);
  std::vector<Index> all = a1;
  all.insert(all.end(), b1.begin(), b1.end());
  std::sort(all.begin(), all.end());
  for (Index i = 0; i < 10; ++i) EXPECT_EQ(all[i], i);
}

TEST(Split, EmptySplit) {
  try {
    split_indices(1, 0.5, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySplit);
  }
}

TEST(SynthGaussian, ShapeAndBalance) {
  const Dataset ds = synth_gaussian(50, 10, 1);
  EXPECT_EQ(ds.rows(), 100);
  EXPECT_EQ(ds.cols(), 10);
  EXPECT_EQ((ds.y().array() == 1.0).count(), 50);
}

TEST(SynthGaussian, Deterministic) {
  const Dataset a = synth_gaussian(20, 3, 9), b = synth_gaussian(20, 3, 9);
  EXPECT_EQ(a.X(), b.X());
  EXPECT_EQ(a.y(), b.y());
}

TEST(SynthGaussian, ClassMeans) {
  const Dataset ds = synth_gaussian(1000, 10, 5);
  Vector sum0 = Vector::Zero(10), sum1 = Vector::Zero(10);
  for (Index i = 0; i < ds.rows(); ++i) (ds.y()[i] == 1.0 ? sum1 : sum0) += ds.X().row(i).transpose();
  EXPECT_LE((sum0 / 1000.0 + Vector::Ones(10)).cwiseAbs().maxCoeff(), 0.2);
  EXPECT_LE((sum1 / 1000.0 - Vector::Ones(10)).cwiseAbs().maxCoeff(), 0.2);
}

}  // namespace
}  // namespace hpsteal
