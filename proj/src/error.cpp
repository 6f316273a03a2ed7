#include "bmconc/error.hpp"

#include <sstream>

namespace bmconc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorCode::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorCode::DuplicatePoint: return "DuplicatePoint";
    case ErrorCode::TriangleViolation: return "TriangleViolation";
    case ErrorCode::NonpositiveWeight: return "NonpositiveWeight";
    case ErrorCode::WeightSumOff: return "WeightSumOff";
    case ErrorCode::NegativeDistance: return "NegativeDistance";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::InvalidTau: return "InvalidTau";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::InvalidEps: return "InvalidEps";
    case ErrorCode::NonpositiveR: return "NonpositiveR";
    case ErrorCode::ROutOfRange: return "ROutOfRange";
    case ErrorCode::SpaceTooLarge: return "SpaceTooLarge";
    case ErrorCode::EmptyTGrid: return "EmptyTGrid";
    case ErrorCode::UnknownSampler: return "UnknownSampler";
    case ErrorCode::BadPairCount: return "BadPairCount";
    case ErrorCode::UnsupportedDimensionForMethod: return "UnsupportedDimensionForMethod";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::BadSampleBudget: return "BadSampleBudget";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << to_string(code);
  if (!indices.empty()) {
    os << '(';
    for (std::size_t k = 0; k < indices.size(); ++k) os << (k ? "," : "") << indices[k];
    os << ')';
  }
  if (!detail.empty()) os << ": " << detail;
  return os.str();
}

namespace {

std::string summarize(const std::vector<Violation>& violations) {
  std::ostringstream os;
  os << violations.size() << " violation(s)";
  std::size_t shown = 0;
  for (const auto& v : violations) {
    if (shown++ == 5) {
      os << "; ...";
      break;
    }
    os << "; " << v.describe();
  }
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorCode::InvalidArgument : violations.front().code,
            summarize(violations)),
      violations_(std::move(violations)) {}

}  // namespace bmconc
