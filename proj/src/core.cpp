#include "bmconc/core.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace bmconc {

namespace {

double sequential_sum(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

// Scales the weights to sum to one, then nudges the last weight ulp by ulp
// until the ascending-order sum is exactly 1.0. A space whose sum is already
// exactly 1.0 is left untouched, which makes validation idempotent.
void normalize_weights(std::vector<double>& w) {
  double s = sequential_sum(w);
  if (s == 1.0) return;
  if (w.size() == 1) {
    w[0] = 1.0;
    return;
  }
  for (double& v : w) v /= s;
  double& last = w.back();
  for (int guard = 0; guard < 4096; ++guard) {
    s = sequential_sum(w);
    if (s == 1.0) return;
    last = std::nextafter(last, s < 1.0 ? 2.0 : 0.0);
  }
}

bool valid_label(const std::string& label) {
  return !label.empty() && std::none_of(label.begin(), label.end(), [](unsigned char c) {
    return std::isspace(c) || c == '#';
  });
}

}  // namespace

MetricMeasureSpace validate_space(RawSpace raw) {
  const std::size_t n = raw.weights.size();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "space must have at least one point");
  if (raw.labels.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "labels and weights differ in length");
  if (raw.dist.size() != n * n)
    throw Error(ErrorCode::DimensionMismatch, "distance matrix is not N x N");

  std::vector<Violation> found;
  auto d = [&](std::size_t i, std::size_t j) { return raw.dist[i * n + j]; };

  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid_label(raw.labels[i]))
      found.push_back({ErrorCode::InvalidArgument, {i}, "label must be nonempty without whitespace or '#'"});
    else if (!seen.insert(raw.labels[i]).second)
      found.push_back({ErrorCode::DuplicateLabel, {i}, raw.labels[i]});
  }

  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = d(i, j);
      if (!std::isfinite(v)) {
        found.push_back({ErrorCode::NonFiniteValue, {i, j}, "distance"});
        finite = false;
      } else if (v < 0.0) {
        found.push_back({ErrorCode::NegativeDistance, {i, j}, {}});
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (std::isfinite(d(i, i)) && d(i, i) != 0.0) found.push_back({ErrorCode::NonzeroDiagonal, {i}, {}});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (d(i, j) != d(j, i) && std::isfinite(d(i, j)) && std::isfinite(d(j, i)))
        found.push_back({ErrorCode::AsymmetricMatrix, {i, j}, {}});
      if (d(i, j) == 0.0 || d(j, i) == 0.0) found.push_back({ErrorCode::DuplicatePoint, {i, j}, {}});
    }
  }

  double max_dist = 0.0;
  if (finite) {
    for (double v : raw.dist) max_dist = std::max(max_dist, v);
    const double tol = 1e-9 * max_dist;
    // One report per unordered endpoint pair {i,k} and midpoint j.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = i + 1; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || j == k) continue;
          if (d(i, k) > d(i, j) + d(j, k) + tol) {
            std::ostringstream os;
            os.precision(17);
            os << d(i, k) << " > " << d(i, j) << " + " << d(j, k);
            found.push_back({ErrorCode::TriangleViolation, {i, j, k}, os.str()});
          }
        }
  }

  bool weights_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    double w = raw.weights[i];
    if (!std::isfinite(w)) {
      found.push_back({ErrorCode::NonFiniteValue, {i}, "weight"});
      weights_ok = false;
    } else if (w <= 0.0) {
      found.push_back({ErrorCode::NonpositiveWeight, {i}, {}});
      weights_ok = false;
    }
  }
  if (weights_ok) {
    double s = sequential_sum(raw.weights);
    if (!(std::abs(s - 1.0) <= 1e-9)) {
      std::ostringstream os;
      os.precision(17);
      os << "weights sum to " << s;
      found.push_back({ErrorCode::WeightSumOff, {}, os.str()});
    }
  }

  if (!found.empty()) throw ValidationError(std::move(found));

  normalize_weights(raw.weights);
  MetricMeasureSpace space;
  space.labels_ = std::move(raw.labels);
  space.dist_ = std::move(raw.dist);
  space.weights_ = std::move(raw.weights);
  space.max_dist_ = max_dist;
  return space;
}

Subset::Subset(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}

Subset Subset::of(std::size_t universe, std::initializer_list<std::size_t> indices) {
  return of(universe, std::span<const std::size_t>(indices.begin(), indices.size()));
}

Subset Subset::of(std::size_t universe, std::span<const std::size_t> indices) {
  Subset s(universe);
  for (std::size_t i : indices) {
    if (i >= universe)
      throw Error(ErrorCode::IndexOutOfRange,
                  "index " + std::to_string(i) + " outside [0," + std::to_string(universe) + ")");
    if (s.contains(i)) throw Error(ErrorCode::InvalidArgument, "duplicate index " + std::to_string(i));
    s.insert(i);
  }
  return s;
}

Subset Subset::full(std::size_t universe) {
  Subset s(universe);
  for (std::size_t i = 0; i < universe; ++i) s.insert(i);
  return s;
}

Subset Subset::singleton(std::size_t universe, std::size_t index) { return of(universe, {index}); }

Subset Subset::from_mask(std::size_t universe, std::uint64_t mask) {
  if (universe > 64) throw Error(ErrorCode::InvalidArgument, "from_mask requires universe <= 64");
  if (universe < 64 && (mask >> universe) != 0)
    throw Error(ErrorCode::IndexOutOfRange, "mask has bits beyond the universe");
  Subset s(universe);
  if (universe > 0) s.words_[0] = mask;
  return s;
}

std::size_t Subset::count() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool Subset::empty() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

std::vector<std::size_t> Subset::indices() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for (std::size_t k = 0; k < words_.size(); ++k) {
    std::uint64_t w = words_[k];
    while (w) {
      out.push_back(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
      w &= w - 1;
    }
  }
  return out;
}

bool Subset::is_subset_of(const Subset& other) const {
  if (other.universe_ != universe_) return false;
  for (std::size_t k = 0; k < words_.size(); ++k)
    if (words_[k] & ~other.words_[k]) return false;
  return true;
}

void Subset::insert(std::size_t i) {
  if (i >= universe_) throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(i));
  words_[i >> 6] |= std::uint64_t{1} << (i & 63);
}

void Subset::erase(std::size_t i) {
  if (i >= universe_) throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(i));
  words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
}

Subset& Subset::operator|=(const Subset& other) {
  if (other.universe_ != universe_) throw Error(ErrorCode::IndexOutOfRange, "subset universes differ");
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= other.words_[k];
  return *this;
}

void check_subset(const MetricMeasureSpace& space, const Subset& a) {
  if (a.universe() != space.size())
    throw Error(ErrorCode::IndexOutOfRange, "subset over " + std::to_string(a.universe()) +
                                                " points used with a space of " +
                                                std::to_string(space.size()));
}

void check_nonempty(const MetricMeasureSpace& space, const Subset& a, const char* name) {
  check_subset(space, a);
  if (a.empty()) throw Error(ErrorCode::EmptySubset, std::string(name) + " is empty");
}

double measure(const MetricMeasureSpace& space, const Subset& a) {
  check_subset(space, a);
  double s = 0.0;
  for (std::size_t i : a.indices()) s += space.weight(i);
  return s;
}

}  // namespace bmconc
