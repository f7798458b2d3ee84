#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace hpsteal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Task { Regression, Classification };
enum class Preprocessing { Raw, Centered, UnitNormalized };

std::string_view to_string(Task task);
std::string_view to_string(Preprocessing prep);
Task parse_task(std::string_view text);

/// Training data with one instance per row.
///
/// Instances are stored row-major (n x m), i.e. transposed relative to the
/// column-per-instance convention common in the literature. Classification
/// targets are stored as {0, 1}.
///
/// Immutable after construction. The constructor enforces shape, finiteness,
/// binary labels for classification and unit row norms when flagged
/// UnitNormalized. Zero column means for Centered data are established by
/// preprocess(); subsets produced by split() inherit the flag.
class Dataset {
 public:
  Dataset(Matrix instances, Vector targets, Task task,
          Preprocessing preprocessing = Preprocessing::Raw,
          std::vector<std::string> feature_names = {});

  const Matrix& X() const noexcept { return instances_; }
  const Vector& y() const noexcept { return targets_; }
  Task task() const noexcept { return task_; }
  Preprocessing preprocessing() const noexcept { return preprocessing_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

  Index rows() const noexcept { return instances_.rows(); }
  Index cols() const noexcept { return instances_.cols(); }

  /// Rows selected by index, in the given order.
  Dataset subset(std::span<const Index> indices) const;

 private:
  Matrix instances_;
  Vector targets_;
  Task task_;
  Preprocessing preprocessing_;
  std::vector<std::string> feature_names_;
};

using TargetColumn = std::variant<std::string, std::size_t>;

/// Reads a comma-separated file. The first row is treated as a header when any
/// of its cells fails to parse as a number.
Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target, Task task);

/// Writes the same dialect with a header row; the target is the last column.
void save_csv(const Dataset& ds, const std::filesystem::path& path,
              const std::string& target_name = "target");

/// Regression: centers every feature column and the target. Classification:
/// scales every instance to unit Euclidean norm.
Dataset preprocess(const Dataset& ds);

/// Random disjoint partition; the first part holds round(fraction * n) rows.
std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed);

/// Index form of split(), used where callers need the permutation itself.
std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double fraction,
                                                                std::uint64_t seed);

/// Two Gaussian classes with means -1 (label 0) and +1 (label 1) in every
/// coordinate and a shared covariance G G^T / dim, G standard normal.
Dataset synth_gaussian(Index n_per_class, Index dim, std::uint64_t seed);

/// Linear regression data y = X w + noise with standard normal X and w.
Dataset synth_regression(Index n, Index dim, std::uint64_t seed, double noise = 0.1);

}  // namespace hpsteal
