#include "bmconc/concentration.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>

#include "bmconc/geometry.hpp"
#include "bmconc/parallel.hpp"

namespace bmconc {

namespace {

void check_r(double r) {
  if (!(r > 0.0) || std::isinf(r)) throw Error(ErrorCode::NonpositiveR, "r must be finite and > 0");
}

void check_open_pi(double r) {
  if (!(r > 0.0 && r < std::numbers::pi))
    throw Error(ErrorCode::ROutOfRange, "r must lie in (0, pi), got " + std::to_string(r));
}

double alpha_over(const MetricMeasureSpace& space, const std::vector<Subset>& candidates, double r) {
  double best = 0.0;
  for (const auto& a : candidates) best = std::max(best, 1.0 - measure(space, neighborhood(space, a, r)));
  return best;
}

}  // namespace

double alpha_exact(const MetricMeasureSpace& space, double r, unsigned workers) {
  check_r(r);
  const std::size_t n = space.size();
  if (n > kAlphaExactMaxPoints)
    throw Error(ErrorCode::SpaceTooLarge, "alpha_exact supports N <= " + std::to_string(kAlphaExactMaxPoints) +
                                              ", got " + std::to_string(n));
  const std::uint32_t subsets = std::uint32_t{1} << n;

  // mass[A] adds the highest member last, matching measure() bit for bit.
  // lightest[A] is the member of smallest weight (lowest index on ties).
  std::vector<double> mass(subsets, 0.0);
  std::vector<std::uint8_t> lightest(subsets, 0);
  for (std::uint32_t a = 1; a < subsets; ++a) {
    int high = 31 - std::countl_zero(a);
    std::uint32_t rest = a & ~(std::uint32_t{1} << high);
    mass[a] = mass[rest] + space.weight(static_cast<std::size_t>(high));
    std::uint8_t h = static_cast<std::uint8_t>(high);
    lightest[a] = (rest == 0 || space.weight(h) < space.weight(lightest[rest])) ? h : lightest[rest];
  }

  std::vector<std::uint32_t> ball(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t x = 0; x < n; ++x)
      if (space.dist(i, x) < r) ball[i] |= std::uint32_t{1} << x;

  // A_r = nb_lo[A & low_mask] | nb_hi[A >> low_bits].
  const std::size_t low_bits = std::min<std::size_t>(n, 10);
  const std::size_t high_bits = n - low_bits;
  std::vector<std::uint32_t> nb_lo(std::size_t{1} << low_bits, 0), nb_hi(std::size_t{1} << high_bits, 0);
  for (std::uint32_t a = 1; a < nb_lo.size(); ++a)
    nb_lo[a] = nb_lo[a & (a - 1)] | ball[static_cast<std::size_t>(std::countr_zero(a))];
  for (std::uint32_t a = 1; a < nb_hi.size(); ++a)
    nb_hi[a] = nb_hi[a & (a - 1)] | ball[low_bits + static_cast<std::size_t>(std::countr_zero(a))];

  std::vector<double> partial(workers == 0 ? default_workers() : workers, 0.0);
  const std::uint32_t low_mask = static_cast<std::uint32_t>(nb_lo.size() - 1);
  std::size_t chunks = parallel_chunks(nb_hi.size(), workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    double best = 0.0;
    for (std::size_t hi = begin; hi < end; ++hi) {
      for (std::uint32_t lo = 0; lo <= low_mask; ++lo) {
        const std::uint32_t a = (static_cast<std::uint32_t>(hi) << low_bits) | lo;
        if (a == 0 || mass[a] < 0.5) continue;
        // A is not minimal when dropping its lightest point keeps half the
        // mass; that smaller set has a smaller neighborhood and is visited too.
        if (mass[a & ~(std::uint32_t{1} << lightest[a])] >= 0.5) continue;
        const std::uint32_t nb = nb_lo[lo] | nb_hi[hi];
        best = std::max(best, 1.0 - mass[nb]);
      }
    }
    partial[c] = best;
  });
  return *std::max_element(partial.begin(), partial.begin() + static_cast<std::ptrdiff_t>(chunks));
}

std::vector<Subset> half_mass_balls(const MetricMeasureSpace& space) {
  const std::size_t n = space.size();
  std::vector<Subset> out;
  out.reserve(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto row = space.row(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return row[a] != row[b] ? row[a] < row[b] : a < b;
    });
    Subset ball(n);
    double running = 0.0;
    for (std::size_t x : order) {
      ball.insert(x);
      running += space.weight(x);
      // `running` is only a cheap filter; feasibility is decided by measure().
      if (running >= 0.5 - 1e-9 && measure(space, ball) >= 0.5) break;
    }
    out.push_back(std::move(ball));
  }
  return out;
}

double alpha_lower_greedy(const MetricMeasureSpace& space, double r) {
  check_r(r);
  return alpha_over(space, half_mass_balls(space), r);
}

double gaussian_bound(double n, double r) {
  check_n(n);
  if (!(r >= 0.0)) throw Error(ErrorCode::NonpositiveR, "r must be >= 0");
  return 2.0 * std::exp(-(n - 1.0) * r * r / (std::numbers::pi * std::numbers::pi));
}

double improved_bound(double n, double r) {
  check_n(n);
  check_open_pi(r);
  const double bracket = 1.0 + std::pow(2.0, -1.0 / n) - 2.0 * std::pow(std::cos(r / 2.0), (n - 1.0) / n);
  return std::exp(-n * bracket);
}

ChainValues theorem_chain_check(double n, double r) {
  check_n(n);
  check_open_pi(r);
  const double power = 2.0 * (n - 1.0);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  ChainValues v;
  v.cosine = 2.0 * std::pow(std::cos(r / 2.0), power);
  v.polynomial = 2.0 * std::pow(1.0 - r * r / (2.0 * pi2), power);
  v.gaussian = 2.0 * std::exp(-(n - 1.0) * r * r / pi2);
  return v;
}

AlphaStrategy parse_alpha_strategy(const std::string& name) {
  if (name == "exact") return AlphaStrategy::Exact;
  if (name == "greedy") return AlphaStrategy::Greedy;
  if (name == "auto") return AlphaStrategy::Auto;
  throw Error(ErrorCode::InvalidArgument, "strategy must be exact, greedy or auto, got '" + name + "'");
}

std::string to_string(AlphaStrategy s) {
  switch (s) {
    case AlphaStrategy::Exact: return "exact";
    case AlphaStrategy::Greedy: return "greedy";
    case AlphaStrategy::Auto: return "auto";
  }
  return "auto";
}

std::string to_string(Exactness e) { return e == Exactness::Exact ? "exact" : "lower_bound"; }

std::vector<std::size_t> ConcentrationProfile::bound_exceedances() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < entries.size(); ++k)
    if (entries[k].alpha > entries[k].bound_thm1) out.push_back(k);
  return out;
}

double shift_off_breakpoint(const MetricMeasureSpace& space, double r) {
  const double delta = 1e-12 * space.max_distance();
  const std::size_t n = space.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = space.dist(i, j);
      if (std::abs(r - d) <= delta && d - delta > 0.0) return d - delta;
    }
  return r;
}

ConcentrationProfile concentration_profile(const MetricMeasureSpace& space,
                                           std::span<const double> r_values, double n,
                                           AlphaStrategy strategy, unsigned workers) {
  check_n(n);
  for (std::size_t k = 0; k < r_values.size(); ++k) {
    check_r(r_values[k]);
    if (k > 0 && !(r_values[k] > r_values[k - 1]))
      throw Error(ErrorCode::InvalidArgument, "r values must be strictly increasing");
  }
  bool exact = strategy == AlphaStrategy::Exact ||
               (strategy == AlphaStrategy::Auto && space.size() <= kAlphaExactMaxPoints);
  if (exact && space.size() > kAlphaExactMaxPoints)
    throw Error(ErrorCode::SpaceTooLarge, "exact strategy supports N <= " + std::to_string(kAlphaExactMaxPoints));

  ConcentrationProfile profile;
  profile.n = n;
  profile.strategy = strategy;
  profile.space_size = space.size();
  profile.space_diameter = diameter(space);

  std::vector<Subset> candidates;
  if (!exact) candidates = half_mass_balls(space);

  for (double r : r_values) {
    ProfileEntry e;
    e.r = r;
    e.r_evaluated = shift_off_breakpoint(space, r);
    e.alpha = exact ? alpha_exact(space, e.r_evaluated, workers) : alpha_over(space, candidates, e.r_evaluated);
    e.exactness = exact ? Exactness::Exact : Exactness::LowerBound;
    e.bound_thm1 = gaussian_bound(n, r);
    if (r < std::numbers::pi) e.bound_improved = improved_bound(n, r);
    profile.entries.push_back(e);
  }
  return profile;
}

}  // namespace bmconc
