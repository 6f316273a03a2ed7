#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bmconc {

enum class ErrorCode {
  // space validation
  AsymmetricMatrix,
  NonzeroDiagonal,
  DuplicatePoint,
  TriangleViolation,
  NonpositiveWeight,
  WeightSumOff,
  NegativeDistance,
  NonFiniteValue,
  DuplicateLabel,
  DimensionMismatch,
  // subsets and geometry
  IndexOutOfRange,
  EmptySubset,
  InvalidTau,
  InvalidN,
  InvalidEps,
  NonpositiveR,
  ROutOfRange,
  // verifiers
  SpaceTooLarge,
  EmptyTGrid,
  UnknownSampler,
  BadPairCount,
  // discretization
  UnsupportedDimensionForMethod,
  EmptyCell,
  BadSampleBudget,
  // io
  SyntaxError,
  UnsupportedFormat,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// One broken invariant found while validating a candidate space.
struct Violation {
  ErrorCode code;
  std::vector<std::size_t> indices;  // offending points, e.g. (i,j,k) for a triangle
  std::string detail;

  std::string describe() const;
};

/// Thrown by validate_space; carries every violation, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace bmconc
