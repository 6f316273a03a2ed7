#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "bmconc/error.hpp"

namespace bmconc {

/// Unvalidated input for validate_space. `dist` is row-major N x N.
struct RawSpace {
  std::vector<std::string> labels;
  std::vector<double> dist;
  std::vector<double> weights;
};

/// A finite metric measure space (X, d, mu): distinct points, a metric
/// distance matrix, and a fully supported probability measure. Only
/// validate_space constructs one, so every instance satisfies the invariants.
class MetricMeasureSpace {
 public:
  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }

  double dist(std::size_t i, std::size_t j) const { return dist_[i * size() + j]; }
  std::span<const double> row(std::size_t i) const {
    return {dist_.data() + i * size(), size()};
  }
  const std::vector<double>& distances() const noexcept { return dist_; }
  double max_distance() const noexcept { return max_dist_; }

  /// Tolerance used by the triangle check: 1e-9 * max distance.
  double triangle_tolerance() const noexcept { return 1e-9 * max_dist_; }

  RawSpace to_raw() const { return {labels_, dist_, weights_}; }

  friend bool operator==(const MetricMeasureSpace&, const MetricMeasureSpace&) = default;

 private:
  friend MetricMeasureSpace validate_space(RawSpace raw);
  MetricMeasureSpace() = default;

  std::vector<std::string> labels_;
  std::vector<double> dist_;
  std::vector<double> weights_;
  double max_dist_ = 0.0;
};

/// Checks every invariant and returns the weight-normalized space. Throws
/// ValidationError listing all violations; throws Error(DimensionMismatch)
/// when the raw arrays are inconsistent.
MetricMeasureSpace validate_space(RawSpace raw);

/// A subset of the point indices [0, universe). Stored as a bitset, so for
/// universe <= 64 it is a single machine word.
class Subset {
 public:
  Subset() = default;
  explicit Subset(std::size_t universe);

  static Subset of(std::size_t universe, std::initializer_list<std::size_t> indices);
  static Subset of(std::size_t universe, std::span<const std::size_t> indices);
  static Subset full(std::size_t universe);
  static Subset singleton(std::size_t universe, std::size_t index);
  /// Low `universe` bits of `mask`; requires universe <= 64.
  static Subset from_mask(std::size_t universe, std::uint64_t mask);

  std::size_t universe() const noexcept { return universe_; }
  bool contains(std::size_t i) const noexcept {
    return i < universe_ && (words_[i >> 6] >> (i & 63)) & 1u;
  }
  std::size_t count() const noexcept;
  bool empty() const noexcept;
  std::vector<std::size_t> indices() const;
  bool is_subset_of(const Subset& other) const;

  void insert(std::size_t i);
  void erase(std::size_t i);
  Subset& operator|=(const Subset& other);
  friend Subset operator|(Subset a, const Subset& b) { return a |= b; }

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  friend bool operator==(const Subset&, const Subset&) = default;

 private:
  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

/// mu(A). Sums weights in ascending index order, so equal subsets always
/// produce bit-identical masses.
double measure(const MetricMeasureSpace& space, const Subset& a);

/// Throws IndexOutOfRange unless `a` ranges over exactly the space's points.
void check_subset(const MetricMeasureSpace& space, const Subset& a);
/// check_subset plus EmptySubset.
void check_nonempty(const MetricMeasureSpace& space, const Subset& a, const char* name);

}  // namespace bmconc
