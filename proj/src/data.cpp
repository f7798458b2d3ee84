#include "hpsteal/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "hpsteal/errors.hpp"

namespace hpsteal {

namespace {

constexpr double kInvariantTol = 1e-10;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool parse_real(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

std::string_view to_string(Task task) {
  return task == Task::Regression ? "regression" : "classification";
}

std::string_view to_string(Preprocessing prep) {
  switch (prep) {
    case Preprocessing::Raw: return "raw";
    case Preprocessing::Centered: return "centered";
    case Preprocessing::UnitNormalized: return "unit_normalized";
  }
  return "raw";
}

Task parse_task(std::string_view text) {
  if (text == "regression" || text == "reg") return Task::Regression;
  if (text == "classification" || text == "clf") return Task::Classification;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown task '{}'", text));
}

Dataset::Dataset(Matrix instances, Vector targets, Task task, Preprocessing preprocessing,
                 std::vector<std::string> feature_names)
    : instances_(std::move(instances)),
      targets_(std::move(targets)),
      task_(task),
      preprocessing_(preprocessing),
      feature_names_(std::move(feature_names)) {
  if (instances_.rows() < 1 || instances_.cols() < 1)
    throw Error(ErrorCode::InvalidArgument, "dataset needs at least one row and one column");
  if (targets_.size() != instances_.rows())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} targets for {} instances", targets_.size(), instances_.rows()));
  if (!feature_names_.empty() && static_cast<Index>(feature_names_.size()) != instances_.cols())
    throw Error(ErrorCode::LengthMismatch, "feature name count differs from column count");
  if (!instances_.allFinite() || !targets_.allFinite())
    throw Error(ErrorCode::InvalidArgument, "dataset contains non-finite values");
  if (task_ == Task::Classification) {
    for (Index i = 0; i < targets_.size(); ++i) {
      if (targets_[i] != 0.0 && targets_[i] != 1.0)
        throw Error(ErrorCode::NonBinaryLabel,
                    fmt::format("classification target {} at row {}", targets_[i], i + 1));
    }
  }
  if (preprocessing_ == Preprocessing::UnitNormalized) {
    for (Index i = 0; i < instances_.rows(); ++i) {
      if (std::abs(instances_.row(i).norm() - 1.0) > kInvariantTol)
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("row {} is flagged unit-normalized but has norm {}", i + 1,
                                instances_.row(i).norm()));
    }
  }
}

Dataset Dataset::subset(std::span<const Index> indices) const {
  Matrix X(static_cast<Index>(indices.size()), cols());
  Vector y(static_cast<Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Index i = indices[k];
    if (i < 0 || i >= rows()) throw Error(ErrorCode::InvalidArgument, "subset index out of range");
    X.row(static_cast<Index>(k)) = instances_.row(i);
    y[static_cast<Index>(k)] = targets_[i];
  }
  return Dataset(std::move(X), std::move(y), task_, preprocessing_, feature_names_);
}

Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target, Task task) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));

  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!trim(line).empty()) lines.push_back(std::move(line));
  }
  if (lines.empty()) throw Error(ErrorCode::Parse, fmt::format("'{}' is empty", path.string()));

  const auto first = split_line(lines.front());
  bool has_header = false;
  for (auto cell : first) {
    double v = 0.0;
    if (!parse_real(cell, v)) has_header = true;
  }
  const std::size_t width = first.size();

  std::size_t target_idx = 0;
  if (const auto* name = std::get_if<std::string>(&target)) {
    if (!has_header)
      throw Error(ErrorCode::MissingTarget,
                  fmt::format("target '{}' given by name but the file has no header", *name));
    const auto it = std::find(first.begin(), first.end(), std::string_view(*name));
    if (it == first.end())
      throw Error(ErrorCode::MissingTarget, fmt::format("no column named '{}'", *name));
    target_idx = static_cast<std::size_t>(it - first.begin());
  } else {
    target_idx = std::get<std::size_t>(target);
    if (target_idx >= width)
      throw Error(ErrorCode::MissingTarget,
                  fmt::format("target column {} out of range ({} columns)", target_idx, width));
  }
  if (width < 2) throw Error(ErrorCode::Parse, "need at least one feature column and a target");

  std::vector<std::string> names;
  if (has_header) {
    for (std::size_t c = 0; c < width; ++c)
      if (c != target_idx) names.emplace_back(first[c]);
  }

  const std::size_t begin = has_header ? 1 : 0;
  const auto n = static_cast<Index>(lines.size() - begin);
  if (n < 1) throw Error(ErrorCode::Parse, "no data rows");
  Matrix X(n, static_cast<Index>(width - 1));
  Vector y(n);
  for (std::size_t r = begin; r < lines.size(); ++r) {
    const std::size_t row = r - begin + 1;
    const auto cells = split_line(lines[r]);
    if (cells.size() != width)
      throw ParseError(row, cells.size(),
                       fmt::format("expected {} cells, found {}", width, cells.size()));
    Index out_col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      double v = 0.0;
      if (!parse_real(cells[c], v))
        throw ParseError(row, c + 1, fmt::format("cannot parse '{}' as a finite real", cells[c]));
      if (c == target_idx)
        y[static_cast<Index>(row - 1)] = v;
      else
        X(static_cast<Index>(row - 1), out_col++) = v;
    }
  }

  if (task == Task::Classification) {
    std::set<double> distinct(y.data(), y.data() + y.size());
    if (distinct.size() > 2)
      throw Error(ErrorCode::NonBinaryLabel,
                  fmt::format("{} distinct target values in a classification file", distinct.size()));
    const bool already_binary =
        std::all_of(distinct.begin(), distinct.end(), [](double v) { return v == 0.0 || v == 1.0; });
    if (!already_binary) {
      // Two arbitrary labels: the smaller maps to 0.
      const double low = *distinct.begin();
      for (Index i = 0; i < y.size(); ++i) y[i] = (y[i] == low && distinct.size() == 2) ? 0.0 : 1.0;
    }
  }
  return Dataset(std::move(X), std::move(y), task, Preprocessing::Raw, std::move(names));
}

void save_csv(const Dataset& ds, const std::filesystem::path& path, const std::string& target_name) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  for (Index c = 0; c < ds.cols(); ++c) {
    if (ds.feature_names().empty())
      out << "x" << c << ",";
    else
      out << ds.feature_names()[static_cast<std::size_t>(c)] << ",";
  }
  out << target_name << "\n";
  for (Index i = 0; i < ds.rows(); ++i) {
    for (Index c = 0; c < ds.cols(); ++c) out << fmt::format("{:.17g},", ds.X()(i, c));
    out << fmt::format("{:.17g}\n", ds.y()[i]);
  }
  if (!out) throw Error(ErrorCode::Io, fmt::format("write to '{}' failed", path.string()));
}

Dataset preprocess(const Dataset& ds) {
  if (ds.preprocessing() != Preprocessing::Raw)
    throw Error(ErrorCode::InvalidArgument, "preprocess expects a raw dataset");
  if (ds.task() == Task::Regression) {
    Matrix X = ds.X().rowwise() - ds.X().colwise().mean();
    Vector y = ds.y().array() - ds.y().mean();
    return Dataset(std::move(X), std::move(y), ds.task(), Preprocessing::Centered, ds.feature_names());
  }
  Matrix X = ds.X();
  for (Index i = 0; i < X.rows(); ++i) {
    const double norm = X.row(i).norm();
    if (norm == 0.0)
      throw Error(ErrorCode::ZeroRow, fmt::format("instance {} has all-zero features", i + 1));
    X.row(i) /= norm;
  }
  return Dataset(std::move(X), ds.y(), ds.task(), Preprocessing::UnitNormalized, ds.feature_names());
}

std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double fraction,
                                                                std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, fmt::format("split fraction {} not in (0,1)", fraction));
  const auto first_size = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  if (first_size < 1 || first_size >= n)
    throw Error(ErrorCode::EmptySplit,
                fmt::format("fraction {} of {} rows leaves an empty part", fraction, n));
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Index> a(perm.begin(), perm.begin() + first_size);
  std::vector<Index> b(perm.begin() + first_size, perm.end());
  return {std::move(a), std::move(b)};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed) {
  const auto [a, b] = split_indices(ds.rows(), fraction, seed);
  return {ds.subset(a), ds.subset(b)};
}

Dataset synth_gaussian(Index n_per_class, Index dim, std::uint64_t seed) {
  if (n_per_class < 1 || dim < 1)
    throw Error(ErrorCode::InvalidArgument, "synth_gaussian needs n_per_class >= 1 and dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix G(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) G(i, j) = normal(rng);
  Matrix cov = G * G.transpose() / static_cast<double>(dim);
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-10;
    llt.compute(cov);
  }
  const Matrix L = llt.matrixL();

  const Index n = 2 * n_per_class;
  Matrix X(n, dim);
  Vector y(n);
  Vector z(dim);
  for (Index i = 0; i < n; ++i) {
    const bool positive = i >= n_per_class;
    for (Index j = 0; j < dim; ++j) z[j] = normal(rng);
    X.row(i) = (L * z).transpose().array() + (positive ? 1.0 : -1.0);
    y[i] = positive ? 1.0 : 0.0;
  }
  return Dataset(std::move(X), std::move(y), Task::Classification);
}

Dataset synth_regression(Index n, Index dim, std::uint64_t seed, double noise) {
  if (n < 1 || dim < 1) throw Error(ErrorCode::InvalidArgument, "synth_regression needs n, dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix X(n, dim);
  Vector w(dim);
  for (Index j = 0; j < dim; ++j) w[j] = normal(rng);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < dim; ++j) X(i, j) = normal(rng);
  Vector y = X * w;
  for (Index i = 0; i < n; ++i) y[i] += noise * normal(rng);
  return Dataset(std::move(X), std::move(y), Task::Regression);
}

}  // namespace hpsteal
