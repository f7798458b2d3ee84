#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hpsteal {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  MissingTarget,
  NonBinaryLabel,
  ZeroRow,
  EmptySplit,
  NotPositiveDefinite,
  FamilyMismatch,
  LengthMismatch,
  AllMasked,
  SingularNormalEquations,
  DegenerateQueries,
  ConfidenceOutOfRange,
  UnsupportedAlgorithm,
  StrategyFailed,
  NotConverged,
  Io,
};

std::string_view to_string(ErrorCode code);

// Validation errors map to CLI exit code 2, numerical failures to 3.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  // row and column are 1-based and count data rows (header excluded).
  ParseError(std::size_t row, std::size_t column, const std::string& what);

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace hpsteal
