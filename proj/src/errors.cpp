#include "hpsteal/errors.hpp"

namespace hpsteal {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::MissingTarget: return "MissingTarget";
    case ErrorCode::NonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::FamilyMismatch: return "FamilyMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::AllMasked: return "AllMasked";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::DegenerateQueries: return "DegenerateQueries";
    case ErrorCode::ConfidenceOutOfRange: return "ConfidenceOutOfRange";
    case ErrorCode::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
    case ErrorCode::StrategyFailed: return "StrategyFailed";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::AllMasked:
    case ErrorCode::SingularNormalEquations:
    case ErrorCode::DegenerateQueries:
    case ErrorCode::StrategyFailed:
    case ErrorCode::NotConverged:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

ParseError::ParseError(std::size_t row, std::size_t column, const std::string& what)
    : Error(ErrorCode::Parse,
            "row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what),
      row_(row),
      column_(column) {}

}  // namespace hpsteal
