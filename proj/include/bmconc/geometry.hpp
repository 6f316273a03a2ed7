#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "bmconc/core.hpp"

namespace bmconc {

/// A nonnegative real or +infinity. Infinity absorbs multiplication by
/// positive reals and compares greater than every finite value.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  explicit ExtendedReal(double finite);
  static constexpr ExtendedReal infinity() {
    ExtendedReal e;
    e.value_ = std::numeric_limits<double>::infinity();
    return e;
  }

  constexpr bool is_infinite() const noexcept {
    return value_ == std::numeric_limits<double>::infinity();
  }
  constexpr bool is_finite() const noexcept { return !is_infinite(); }
  /// The finite value, or IEEE +inf.
  constexpr double value() const noexcept { return value_; }

  /// Product with a positive real; infinity stays infinity.
  ExtendedReal scaled(double positive) const;
  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b);

  friend constexpr auto operator<=>(ExtendedReal a, ExtendedReal b) noexcept {
    return a.value_ <=> b.value_;
  }
  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) noexcept {
    return a.value_ == b.value_;
  }

 private:
  double value_ = 0.0;
};

/// (sin(tau d) / (tau sin d))^((n-1)/n) for d in (0, pi), +inf for d >= pi,
/// and 1 at d = 0 (its continuous extension).
ExtendedReal distortion_coefficient(double d, double tau, double n);

void check_tau(double tau);
void check_n(double n);

/// Infimum of the distortion coefficient over A0 x A1 with its argmin pair.
struct InfCoefficient {
  ExtendedReal value;
  std::size_t i = 0;  // point of A0
  std::size_t j = 0;  // point of A1
};

/// Minimum over (i, j) in A0 x A1; ties go to the lexicographically
/// smallest pair.
InfCoefficient inf_coefficient(const MetricMeasureSpace& space, const Subset& a0,
                               const Subset& a1, double tau, double n);

/// I_t^eps(A0, A1): every x with |d(x0,x) - t d(x0,x1)| <= eps and
/// |d(x,x1) - (1-t) d(x0,x1)| <= eps for some x0 in A0, x1 in A1.
/// Exact triple scan; both comparisons are non-strict, with no fuzz.
Subset intermediate_set(const MetricMeasureSpace& space, const Subset& a0, const Subset& a1,
                        double t, double eps);

/// Point membership test shared by every intermediate-set implementation.
inline bool is_intermediate(double d0x, double dx1, double d01, double t, double eps) {
  double a = d0x - t * d01;
  double b = dx1 - (1.0 - t) * d01;
  return (a < 0 ? -a : a) <= eps && (b < 0 ? -b : b) <= eps;
}

/// A_r = {x : d(x, A) < r}, strict.
Subset neighborhood(const MetricMeasureSpace& space, const Subset& a, double r);

/// d(A, B) = min over A x B.
double set_distance(const MetricMeasureSpace& space, const Subset& a, const Subset& b);

double diameter(const MetricMeasureSpace& space);

/// Lexicographically first pair attaining the diameter (0,0 for one point).
std::pair<std::size_t, std::size_t> diameter_pair(const MetricMeasureSpace& space);

/// Distortion coefficients of every ordered pair at a fixed (tau, n).
class CoefficientTable {
 public:
  CoefficientTable(const MetricMeasureSpace& space, double tau, double n);

  ExtendedReal at(std::size_t i, std::size_t j) const { return values_[i * size_ + j]; }
  /// Same contract as inf_coefficient; identical values because the table
  /// entries come from distortion_coefficient.
  InfCoefficient infimum(const Subset& a0, const Subset& a1) const;

 private:
  std::size_t size_;
  std::vector<ExtendedReal> values_;
};

/// For a fixed (t, eps), the bitset of t-intermediate points of every
/// ordered pair (x0, x1). I_t^eps(A0, A1) is the union over A0 x A1.
class IntermediateIndex {
 public:
  IntermediateIndex(const MetricMeasureSpace& space, double t, double eps);

  std::size_t words_per_set() const noexcept { return words_; }
  const std::uint64_t* pair_bits(std::size_t x0, std::size_t x1) const {
    return bits_.data() + (x0 * size_ + x1) * words_;
  }
  Subset lookup(const Subset& a0, const Subset& a1) const;

 private:
  std::size_t size_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

}  // namespace bmconc
