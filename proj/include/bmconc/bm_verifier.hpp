#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bmconc/core.hpp"
#include "bmconc/geometry.hpp"
#include "bmconc/rng.hpp"

namespace bmconc {

/// (eps, n, t) of one instance of the eps-approximated Brunn-Minkowski
/// inequality of dimension n and Ricci curvature >= n-1.
struct BMParams {
  double eps = 0.0;
  double n = 2.0;
  double t = 0.5;

  /// Throws InvalidEps, InvalidN or InvalidTau.
  void validate() const;
};

/// One evaluated instance: lhs = mu(I_t^eps(A0,A1))^(1/n) against
/// rhs = (1-t) c0 mu(A0)^(1/n) + t c1 mu(A1)^(1/n).
struct BMCheckResult {
  double lhs = 0.0;
  ExtendedReal rhs;
  double gap = 0.0;  // lhs - rhs; -inf when rhs is infinite
  bool satisfied = false;
  InfCoefficient coeff0;  // tau = 1 - t
  InfCoefficient coeff1;  // tau = t
  Subset a0;
  Subset a1;
  Subset intermediate;
  double t = 0.5;
};

/// rhs combination shared by every evaluation path so they agree bit for bit.
inline double combine_rhs(double t, double c0, double c1, double root0, double root1) {
  return (1.0 - t) * c0 * root0 + t * c1 * root1;
}

inline double gap_of(double lhs, double rhs) {
  return std::isinf(rhs) ? -std::numeric_limits<double>::infinity() : lhs - rhs;
}

inline bool within_tolerance(double gap, double tol_report) {
  return gap != -std::numeric_limits<double>::infinity() && gap >= -tol_report;
}

ExtendedReal bm_rhs(const MetricMeasureSpace& space, const Subset& a0, const Subset& a1,
                    const BMParams& params);

/// Direct evaluation of one instance from the geometry primitives.
BMCheckResult bm_check_pair(const MetricMeasureSpace& space, const Subset& a0, const Subset& a1,
                            const BMParams& params, double tol_report = 0.0);

/// Table-backed evaluator for many instances at one (eps, n, t). Produces the
/// same results as bm_check_pair.
class BMEvaluator {
 public:
  BMEvaluator(const MetricMeasureSpace& space, const BMParams& params);

  BMCheckResult check(const Subset& a0, const Subset& a1, double tol_report = 0.0) const;
  const BMParams& params() const noexcept { return params_; }

 private:
  const MetricMeasureSpace* space_;
  BMParams params_;
  CoefficientTable coeff0_;
  CoefficientTable coeff1_;
  std::optional<IntermediateIndex> index_;
};

enum class SamplerKind { Singletons, Balls, RandomSubsets };

/// Distribution of (A0, A1) pairs for sampled verification.
///  - singletons: independent uniform points
///  - balls: closed ball around a uniform center, radius uniform in [0, diam/2]
///  - random: uniform k-subset, k uniform in [1, min(max_cardinality, N)]
struct SubsetSampler {
  SamplerKind kind = SamplerKind::Balls;
  std::size_t max_cardinality = 20;

  /// "singletons", "balls", "random" or "random:<k>". Throws UnknownSampler.
  static SubsetSampler parse(std::string_view name);
  std::string name() const;

  Subset draw(const MetricMeasureSpace& space, double diameter, Rng& rng) const;
};

struct VerifyConfig {
  double eps = 0.0;
  double n = 2.0;
  std::vector<double> t_values{0.5};
  double tol_report = 0.0;
  unsigned workers = 1;  // 0 = hardware concurrency; results do not depend on it
};

/// t = k / (m + 1) for k = 1..m. An approximation of "all t in (0,1)".
std::vector<double> uniform_t_grid(std::size_t m);

struct VerifyStrategy {
  enum class Kind { Exhaustive, Sampled } kind = Kind::Exhaustive;
  std::uint64_t seed = 0;
  std::size_t pair_count = 0;
  SubsetSampler sampler;
};

struct LemmaWitness {
  std::size_t i;
  std::size_t j;
  double distance;
};

struct BMVerifyReport {
  std::size_t checked_count = 0;
  std::size_t violation_count = 0;
  std::optional<BMCheckResult> worst;  // minimum-gap instance
  VerifyStrategy strategy;
  std::optional<LemmaWitness> lemma_shortcircuit;  // a pair farther apart than pi
  VerifyConfig config;

  /// True when some instance failed or the diameter rules the space out.
  bool refuted() const { return lemma_shortcircuit.has_value() || violation_count > 0; }
};

/// Largest space bm_verify_exhaustive accepts.
inline constexpr std::size_t kExhaustiveMaxPoints = 14;

/// Every ordered pair of nonempty subsets at every t. When the diameter
/// exceeds pi the space is reported unsatisfiable from the far pair alone.
BMVerifyReport bm_verify_exhaustive(const MetricMeasureSpace& space, const VerifyConfig& config);

/// pair_count (A0, A1) pairs drawn from `sampler`; bit-reproducible per seed.
BMVerifyReport bm_verify_sampled(const MetricMeasureSpace& space, const VerifyConfig& config,
                                 std::size_t pair_count, const SubsetSampler& sampler,
                                 std::uint64_t seed);

}  // namespace bmconc
