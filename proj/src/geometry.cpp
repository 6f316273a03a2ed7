#include "bmconc/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace bmconc {

ExtendedReal::ExtendedReal(double finite) : value_(finite) {
  if (!(finite >= 0.0) || std::isinf(finite))
    throw Error(ErrorCode::InvalidArgument, "ExtendedReal needs a finite nonnegative value, got " +
                                                std::to_string(finite));
}

ExtendedReal ExtendedReal::scaled(double positive) const {
  if (!(positive > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale factor must be positive");
  if (is_infinite()) return *this;
  return ExtendedReal(value_ * positive);
}

ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
  if (a.is_infinite() || b.is_infinite()) return ExtendedReal::infinity();
  return ExtendedReal(a.value_ + b.value_);
}

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw Error(ErrorCode::InvalidTau, "tau must lie in (0,1), got " + std::to_string(tau));
}

void check_n(double n) {
  if (!(n > 1.0) || std::isinf(n))
    throw Error(ErrorCode::InvalidN, "n must lie in (1,inf), got " + std::to_string(n));
}

ExtendedReal distortion_coefficient(double d, double tau, double n) {
  check_tau(tau);
  check_n(n);
  if (!(d >= 0.0)) throw Error(ErrorCode::InvalidArgument, "distance must be >= 0");
  if (d >= std::numbers::pi) return ExtendedReal::infinity();
  if (d == 0.0) return ExtendedReal(1.0);
  const double exponent = (n - 1.0) / n;
  double ratio;
  if (d < 1e-4) {
    // sin(tau d)/(tau sin d) = 1 + (1 - tau^2) d^2 / 6 + O(d^4)
    ratio = 1.0 + (1.0 - tau * tau) * d * d / 6.0;
  } else {
    ratio = std::sin(tau * d) / (tau * std::sin(d));
  }
  if (std::isfinite(ratio)) return ExtendedReal(std::pow(ratio, exponent));
  // sin d underflowed relative to sin(tau d); fall back to log space.
  double log_ratio = std::log(std::sin(tau * d)) - std::log(tau) - std::log(std::sin(d));
  double v = std::exp(exponent * log_ratio);
  return std::isfinite(v) ? ExtendedReal(v) : ExtendedReal::infinity();
}

InfCoefficient inf_coefficient(const MetricMeasureSpace& space, const Subset& a0,
                               const Subset& a1, double tau, double n) {
  check_nonempty(space, a0, "A0");
  check_nonempty(space, a1, "A1");
  check_tau(tau);
  check_n(n);
  InfCoefficient best{ExtendedReal::infinity(), 0, 0};
  bool first = true;
  for (std::size_t i : a0.indices())
    for (std::size_t j : a1.indices()) {
      ExtendedReal c = distortion_coefficient(space.dist(i, j), tau, n);
      if (first || c < best.value) best = {c, i, j};
      first = false;
    }
  return best;
}

Subset intermediate_set(const MetricMeasureSpace& space, const Subset& a0, const Subset& a1,
                        double t, double eps) {
  check_nonempty(space, a0, "A0");
  check_nonempty(space, a1, "A1");
  check_tau(t);
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidEps, "eps must be >= 0");
  const auto i0 = a0.indices();
  const auto i1 = a1.indices();
  Subset out(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) {
    bool hit = false;
    for (std::size_t x0 : i0) {
      for (std::size_t x1 : i1) {
        if (is_intermediate(space.dist(x0, x), space.dist(x, x1), space.dist(x0, x1), t, eps)) {
          hit = true;
          break;
        }
      }
      if (hit) break;
    }
    if (hit) out.insert(x);
  }
  return out;
}

Subset neighborhood(const MetricMeasureSpace& space, const Subset& a, double r) {
  check_nonempty(space, a, "A");
  if (!(r > 0.0)) throw Error(ErrorCode::NonpositiveR, "r must be > 0");
  const auto members = a.indices();
  Subset out(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) {
    auto row = space.row(x);
    if (std::any_of(members.begin(), members.end(), [&](std::size_t m) { return row[m] < r; }))
      out.insert(x);
  }
  return out;
}

double set_distance(const MetricMeasureSpace& space, const Subset& a, const Subset& b) {
  check_nonempty(space, a, "A");
  check_nonempty(space, b, "B");
  double best = std::numeric_limits<double>::infinity();
  const auto ib = b.indices();
  for (std::size_t i : a.indices())
    for (std::size_t j : ib) best = std::min(best, space.dist(i, j));
  return best;
}

double diameter(const MetricMeasureSpace& space) { return space.max_distance(); }

std::pair<std::size_t, std::size_t> diameter_pair(const MetricMeasureSpace& space) {
  std::pair<std::size_t, std::size_t> best{0, 0};
  double d = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i)
    for (std::size_t j = i + 1; j < space.size(); ++j)
      if (space.dist(i, j) > d) {
        d = space.dist(i, j);
        best = {i, j};
      }
  return best;
}

CoefficientTable::CoefficientTable(const MetricMeasureSpace& space, double tau, double n)
    : size_(space.size()), values_(size_ * size_) {
  for (std::size_t i = 0; i < size_; ++i)
    for (std::size_t j = i; j < size_; ++j) {
      ExtendedReal c = distortion_coefficient(space.dist(i, j), tau, n);
      values_[i * size_ + j] = c;
      values_[j * size_ + i] = c;
    }
}

InfCoefficient CoefficientTable::infimum(const Subset& a0, const Subset& a1) const {
  if (a0.universe() != size_ || a1.universe() != size_)
    throw Error(ErrorCode::IndexOutOfRange, "subset universe does not match the table");
  if (a0.empty() || a1.empty()) throw Error(ErrorCode::EmptySubset, "A0 and A1 must be nonempty");
  InfCoefficient best{ExtendedReal::infinity(), 0, 0};
  bool first = true;
  const auto i1 = a1.indices();
  for (std::size_t i : a0.indices()) {
    const ExtendedReal* row = values_.data() + i * size_;
    for (std::size_t j : i1)
      if (first || row[j] < best.value) {
        best = {row[j], i, j};
        first = false;
      }
  }
  return best;
}

IntermediateIndex::IntermediateIndex(const MetricMeasureSpace& space, double t, double eps)
    : size_(space.size()), words_((space.size() + 63) / 64) {
  check_tau(t);
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidEps, "eps must be >= 0");
  bits_.assign(size_ * size_ * words_, 0);
  for (std::size_t x0 = 0; x0 < size_; ++x0) {
    auto r0 = space.row(x0);
    for (std::size_t x1 = 0; x1 < size_; ++x1) {
      const double d01 = r0[x1];
      auto r1 = space.row(x1);
      std::uint64_t* out = bits_.data() + (x0 * size_ + x1) * words_;
      for (std::size_t x = 0; x < size_; ++x)
        if (is_intermediate(r0[x], r1[x], d01, t, eps)) out[x >> 6] |= std::uint64_t{1} << (x & 63);
    }
  }
}

Subset IntermediateIndex::lookup(const Subset& a0, const Subset& a1) const {
  if (a0.universe() != size_ || a1.universe() != size_)
    throw Error(ErrorCode::IndexOutOfRange, "subset universe does not match the index");
  if (a0.empty() || a1.empty()) throw Error(ErrorCode::EmptySubset, "A0 and A1 must be nonempty");
  Subset out(size_);
  auto acc = out.words();
  const auto i1 = a1.indices();
  // Tail bits past `size_` are never set, so a full set compares equal to this.
  std::vector<std::uint64_t> full(words_, ~std::uint64_t{0});
  if (size_ % 64) full.back() = (std::uint64_t{1} << (size_ % 64)) - 1;
  for (std::size_t x0 : a0.indices()) {
    for (std::size_t x1 : i1) {
      const std::uint64_t* bits = pair_bits(x0, x1);
      for (std::size_t w = 0; w < words_; ++w) acc[w] |= bits[w];
    }
    if (std::equal(acc.begin(), acc.end(), full.begin())) break;
  }
  return out;
}

}  // namespace bmconc
