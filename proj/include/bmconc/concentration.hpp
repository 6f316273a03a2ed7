#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmconc/core.hpp"

namespace bmconc {

/// Largest space alpha_exact accepts (full subset enumeration).
inline constexpr std::size_t kAlphaExactMaxPoints = 20;

/// alpha(r) = max over A with mu(A) >= 1/2 of 1 - mu(A_r).
double alpha_exact(const MetricMeasureSpace& space, double r, unsigned workers = 1);

/// Lower bound on alpha(r) from the half-mass balls around each point.
double alpha_lower_greedy(const MetricMeasureSpace& space, double r);

/// Candidate family used by alpha_lower_greedy: for each center, the
/// shortest prefix of points sorted by (distance, index) with mass >= 1/2.
std::vector<Subset> half_mass_balls(const MetricMeasureSpace& space);

/// 2 exp(-(n-1) r^2 / pi^2).
double gaussian_bound(double n, double r);

/// exp(-n [1 + 2^(-1/n) - 2 cos(r/2)^((n-1)/n)]), for r in (0, pi).
double improved_bound(double n, double r);

/// The three majorants 2cos(r/2)^(2(n-1)) <= 2(1 - r^2/(2 pi^2))^(2(n-1))
/// <= 2 exp(-(n-1) r^2 / pi^2).
struct ChainValues {
  double cosine = 0.0;
  double polynomial = 0.0;
  double gaussian = 0.0;

  bool holds(double tol = 1e-12) const {
    return cosine <= polynomial + tol && polynomial <= gaussian + tol;
  }
};

ChainValues theorem_chain_check(double n, double r);

enum class AlphaStrategy { Exact, Greedy, Auto };
enum class Exactness { Exact, LowerBound };

AlphaStrategy parse_alpha_strategy(const std::string& name);
std::string to_string(AlphaStrategy s);
std::string to_string(Exactness e);

struct ProfileEntry {
  double r = 0.0;
  double r_evaluated = 0.0;  // r after the breakpoint shift
  double alpha = 0.0;
  Exactness exactness = Exactness::Exact;
  double bound_thm1 = 0.0;
  std::optional<double> bound_improved;  // defined only for r < pi
};

struct ConcentrationProfile {
  double n = 2.0;
  AlphaStrategy strategy = AlphaStrategy::Auto;
  std::size_t space_size = 0;
  double space_diameter = 0.0;
  std::vector<ProfileEntry> entries;

  /// Indices of entries with alpha above the Gaussian bound.
  std::vector<std::size_t> bound_exceedances() const;
};

/// r values within 1e-12 * max(dist) of a stored distance are moved to
/// exactly that far below it, so alpha is sampled on the left of each jump.
double shift_off_breakpoint(const MetricMeasureSpace& space, double r);

ConcentrationProfile concentration_profile(const MetricMeasureSpace& space,
                                           std::span<const double> r_values, double n,
                                           AlphaStrategy strategy, unsigned workers = 1);

}  // namespace bmconc
