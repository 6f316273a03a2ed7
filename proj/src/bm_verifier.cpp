#include "bmconc/bm_verifier.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bmconc/parallel.hpp"

namespace bmconc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Above this size the per-pair intermediate bitsets no longer pay for themselves.
constexpr std::size_t kIndexMaxPoints = 1024;

void check_t_values(const std::vector<double>& t_values) {
  if (t_values.empty()) throw Error(ErrorCode::EmptyTGrid, "at least one t value is required");
  for (double t : t_values) check_tau(t);
}

void check_config(const VerifyConfig& config) {
  BMParams{config.eps, config.n, 0.5}.validate();
  check_t_values(config.t_values);
  if (!(config.tol_report >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tol_report must be >= 0");
}

std::optional<LemmaWitness> far_pair(const MetricMeasureSpace& space) {
  if (diameter(space) <= std::numbers::pi) return std::nullopt;
  auto [i, j] = diameter_pair(space);
  return LemmaWitness{i, j, space.dist(i, j)};
}

BMVerifyReport lemma_report(const MetricMeasureSpace& space, const VerifyConfig& config,
                            const LemmaWitness& witness, VerifyStrategy strategy) {
  BMVerifyReport report;
  report.config = config;
  report.strategy = std::move(strategy);
  report.lemma_shortcircuit = witness;
  // The witness singletons already have rhs = +inf; record that one instance.
  const std::size_t n = space.size();
  report.worst = bm_check_pair(space, Subset::singleton(n, witness.i), Subset::singleton(n, witness.j),
                               {config.eps, config.n, config.t_values.front()}, config.tol_report);
  report.checked_count = 1;
  report.violation_count = 1;
  return report;
}

// Ordering key that makes the worst-instance choice independent of how the
// work was split between threads.
struct Candidate {
  double gap = kInf;
  std::size_t t_index = 0;
  std::uint64_t key = 0;
  bool valid = false;

  bool better_than(const Candidate& other) const {
    if (!other.valid) return valid;
    if (!valid) return false;
    if (gap != other.gap) return gap < other.gap;
    if (t_index != other.t_index) return t_index < other.t_index;
    return key < other.key;
  }
};

}  // namespace

void BMParams::validate() const {
  if (!(eps >= 0.0) || std::isinf(eps)) throw Error(ErrorCode::InvalidEps, "eps must be finite and >= 0");
  check_n(n);
  check_tau(t);
}

ExtendedReal bm_rhs(const MetricMeasureSpace& space, const Subset& a0, const Subset& a1,
                    const BMParams& params) {
  params.validate();
  InfCoefficient c0 = inf_coefficient(space, a0, a1, 1.0 - params.t, params.n);
  InfCoefficient c1 = inf_coefficient(space, a0, a1, params.t, params.n);
  double root0 = std::pow(measure(space, a0), 1.0 / params.n);
  double root1 = std::pow(measure(space, a1), 1.0 / params.n);
  double rhs = combine_rhs(params.t, c0.value.value(), c1.value.value(), root0, root1);
  return std::isinf(rhs) ? ExtendedReal::infinity() : ExtendedReal(rhs);
}

BMCheckResult bm_check_pair(const MetricMeasureSpace& space, const Subset& a0, const Subset& a1,
                            const BMParams& params, double tol_report) {
  params.validate();
  BMCheckResult r;
  r.a0 = a0;
  r.a1 = a1;
  r.t = params.t;
  r.intermediate = intermediate_set(space, a0, a1, params.t, params.eps);
  r.coeff0 = inf_coefficient(space, a0, a1, 1.0 - params.t, params.n);
  r.coeff1 = inf_coefficient(space, a0, a1, params.t, params.n);
  const double inv_n = 1.0 / params.n;
  r.lhs = std::pow(measure(space, r.intermediate), inv_n);
  double rhs = combine_rhs(params.t, r.coeff0.value.value(), r.coeff1.value.value(),
                           std::pow(measure(space, a0), inv_n), std::pow(measure(space, a1), inv_n));
  r.rhs = std::isinf(rhs) ? ExtendedReal::infinity() : ExtendedReal(rhs);
  r.gap = gap_of(r.lhs, rhs);
  r.satisfied = within_tolerance(r.gap, tol_report);
  return r;
}

BMEvaluator::BMEvaluator(const MetricMeasureSpace& space, const BMParams& params)
    : space_(&space),
      params_((params.validate(), params)),
      coeff0_(space, 1.0 - params.t, params.n),
      coeff1_(space, params.t, params.n) {
  if (space.size() <= kIndexMaxPoints) index_.emplace(space, params.t, params.eps);
}

BMCheckResult BMEvaluator::check(const Subset& a0, const Subset& a1, double tol_report) const {
  const auto& space = *space_;
  check_nonempty(space, a0, "A0");
  check_nonempty(space, a1, "A1");
  BMCheckResult r;
  r.a0 = a0;
  r.a1 = a1;
  r.t = params_.t;
  r.intermediate = index_ ? index_->lookup(a0, a1) : intermediate_set(space, a0, a1, params_.t, params_.eps);
  r.coeff0 = coeff0_.infimum(a0, a1);
  r.coeff1 = coeff1_.infimum(a0, a1);
  const double inv_n = 1.0 / params_.n;
  r.lhs = std::pow(measure(space, r.intermediate), inv_n);
  double rhs = combine_rhs(params_.t, r.coeff0.value.value(), r.coeff1.value.value(),
                           std::pow(measure(space, a0), inv_n), std::pow(measure(space, a1), inv_n));
  r.rhs = std::isinf(rhs) ? ExtendedReal::infinity() : ExtendedReal(rhs);
  r.gap = gap_of(r.lhs, rhs);
  r.satisfied = within_tolerance(r.gap, tol_report);
  return r;
}

SubsetSampler SubsetSampler::parse(std::string_view name) {
  if (name == "singletons") return {SamplerKind::Singletons, 1};
  if (name == "balls") return {SamplerKind::Balls, 0};
  if (name == "random") return {SamplerKind::RandomSubsets, 20};
  if (name.starts_with("random:")) {
    auto digits = name.substr(7);
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 1)
      return {SamplerKind::RandomSubsets, k};
  }
  throw Error(ErrorCode::UnknownSampler, "unknown sampler '" + std::string(name) +
                                             "' (expected singletons, balls, random or random:<k>)");
}

std::string SubsetSampler::name() const {
  switch (kind) {
    case SamplerKind::Singletons: return "singletons";
    case SamplerKind::Balls: return "balls";
    case SamplerKind::RandomSubsets: return "random:" + std::to_string(max_cardinality);
  }
  return "unknown";
}

Subset SubsetSampler::draw(const MetricMeasureSpace& space, double diam, Rng& rng) const {
  const std::size_t n = space.size();
  switch (kind) {
    case SamplerKind::Singletons:
      return Subset::singleton(n, rng.below(n));
    case SamplerKind::Balls: {
      std::size_t center = rng.below(n);
      double radius = rng.uniform(0.0, diam / 2.0);
      Subset s(n);
      auto row = space.row(center);
      for (std::size_t x = 0; x < n; ++x)
        if (row[x] <= radius) s.insert(x);
      return s;
    }
    case SamplerKind::RandomSubsets: {
      std::size_t cap = std::min(max_cardinality, n);
      std::size_t k = 1 + rng.below(cap);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      Subset s(n);
      for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng.below(n - i);
        std::swap(perm[i], perm[j]);
        s.insert(perm[i]);
      }
      return s;
    }
  }
  throw Error(ErrorCode::UnknownSampler, "unhandled sampler kind");
}

std::vector<double> uniform_t_grid(std::size_t m) {
  if (m == 0) throw Error(ErrorCode::EmptyTGrid, "grid size must be >= 1");
  std::vector<double> out;
  for (std::size_t k = 1; k <= m; ++k) out.push_back(static_cast<double>(k) / static_cast<double>(m + 1));
  return out;
}

BMVerifyReport bm_verify_exhaustive(const MetricMeasureSpace& space, const VerifyConfig& config) {
  check_config(config);
  const std::size_t n = space.size();
  if (n > kExhaustiveMaxPoints)
    throw Error(ErrorCode::SpaceTooLarge, "exhaustive verification supports N <= " +
                                              std::to_string(kExhaustiveMaxPoints) + ", got " +
                                              std::to_string(n));
  if (auto witness = far_pair(space)) return lemma_report(space, config, *witness, {});

  const std::uint32_t subsets = std::uint32_t{1} << n;
  const double inv_n = 1.0 / config.n;

  // mass[A] adds the highest member last, which reproduces measure() exactly.
  std::vector<double> mass(subsets, 0.0);
  std::vector<double> root(subsets, 0.0);
  for (std::uint32_t a = 1; a < subsets; ++a) {
    int high = 31 - std::countl_zero(a);
    mass[a] = mass[a & ~(std::uint32_t{1} << high)] + space.weight(static_cast<std::size_t>(high));
  }
  for (std::uint32_t a = 0; a < subsets; ++a) root[a] = std::pow(mass[a], inv_n);

  BMVerifyReport report;
  report.config = config;
  report.strategy.kind = VerifyStrategy::Kind::Exhaustive;
  Candidate overall;
  std::size_t violations = 0;

  for (std::size_t ti = 0; ti < config.t_values.size(); ++ti) {
    const double t = config.t_values[ti];
    std::vector<std::uint32_t> pair_mask(n * n, 0);
    std::vector<double> c0(n * n), c1(n * n);
    for (std::size_t x0 = 0; x0 < n; ++x0)
      for (std::size_t x1 = 0; x1 < n; ++x1) {
        const double d01 = space.dist(x0, x1);
        for (std::size_t x = 0; x < n; ++x)
          if (is_intermediate(space.dist(x0, x), space.dist(x, x1), d01, t, config.eps))
            pair_mask[x0 * n + x1] |= std::uint32_t{1} << x;
        c0[x0 * n + x1] = distortion_coefficient(d01, 1.0 - t, config.n).value();
        c1[x0 * n + x1] = distortion_coefficient(d01, t, config.n).value();
      }

    struct Partial {
      Candidate best;
      std::size_t violations = 0;
    };
    std::vector<Partial> partials(config.workers == 0 ? default_workers() : config.workers);
    const double tol = config.tol_report;

    std::size_t chunks = parallel_chunks(subsets - 1, config.workers, [&](std::size_t c, std::size_t begin,
                                                                          std::size_t end) {
      std::vector<std::uint32_t> set_i(subsets);
      std::vector<double> set_c0(subsets), set_c1(subsets);
      std::vector<std::uint32_t> row_i(n);
      std::vector<double> row_c0(n), row_c1(n);
      Partial local;
      for (std::size_t k = begin; k < end; ++k) {
        const std::uint32_t a1 = static_cast<std::uint32_t>(k + 1);
        for (std::size_t x0 = 0; x0 < n; ++x0) {
          std::uint32_t bits = 0;
          double m0 = kInf, m1 = kInf;
          for (std::uint32_t rest = a1; rest; rest &= rest - 1) {
            std::size_t x1 = static_cast<std::size_t>(std::countr_zero(rest));
            bits |= pair_mask[x0 * n + x1];
            m0 = std::min(m0, c0[x0 * n + x1]);
            m1 = std::min(m1, c1[x0 * n + x1]);
          }
          row_i[x0] = bits;
          row_c0[x0] = m0;
          row_c1[x0] = m1;
        }
        set_i[0] = 0;
        set_c0[0] = kInf;
        set_c1[0] = kInf;
        const double root1 = root[a1];
        for (std::uint32_t a0 = 1; a0 < subsets; ++a0) {
          const std::uint32_t prev = a0 & (a0 - 1);
          const std::size_t low = static_cast<std::size_t>(std::countr_zero(a0));
          set_i[a0] = set_i[prev] | row_i[low];
          set_c0[a0] = std::min(set_c0[prev], row_c0[low]);
          set_c1[a0] = std::min(set_c1[prev], row_c1[low]);
          const double lhs = root[set_i[a0]];
          const double rhs = combine_rhs(t, set_c0[a0], set_c1[a0], root[a0], root1);
          const double gap = gap_of(lhs, rhs);
          if (!within_tolerance(gap, tol)) ++local.violations;
          // Within one chunk keys increase, so strict < keeps the earliest tie.
          if (!local.best.valid || gap < local.best.gap)
            local.best = {gap, ti, (std::uint64_t{a1} << 32) | a0, true};
        }
      }
      partials[c] = local;
    });

    for (std::size_t c = 0; c < chunks; ++c) {
      violations += partials[c].violations;
      if (partials[c].best.better_than(overall)) overall = partials[c].best;
    }
  }

  report.checked_count = static_cast<std::size_t>(subsets - 1) * (subsets - 1) * config.t_values.size();
  report.violation_count = violations;
  if (overall.valid) {
    Subset a0 = Subset::from_mask(n, overall.key & 0xffffffffu);
    Subset a1 = Subset::from_mask(n, overall.key >> 32);
    report.worst = bm_check_pair(space, a0, a1, {config.eps, config.n, config.t_values[overall.t_index]},
                                 config.tol_report);
  }
  return report;
}

BMVerifyReport bm_verify_sampled(const MetricMeasureSpace& space, const VerifyConfig& config,
                                 std::size_t pair_count, const SubsetSampler& sampler,
                                 std::uint64_t seed) {
  check_config(config);
  if (pair_count == 0) throw Error(ErrorCode::BadPairCount, "pair_count must be >= 1");
  VerifyStrategy strategy{VerifyStrategy::Kind::Sampled, seed, pair_count, sampler};
  if (auto witness = far_pair(space)) return lemma_report(space, config, *witness, strategy);

  // Draw all pairs up front from one stream so the set of instances does not
  // depend on the worker count.
  const double diam = diameter(space);
  Rng rng(mix_seed(seed, 0));
  std::vector<std::pair<Subset, Subset>> pairs;
  pairs.reserve(pair_count);
  for (std::size_t k = 0; k < pair_count; ++k) {
    Subset a0 = sampler.draw(space, diam, rng);
    Subset a1 = sampler.draw(space, diam, rng);
    pairs.emplace_back(std::move(a0), std::move(a1));
  }

  BMVerifyReport report;
  report.config = config;
  report.strategy = strategy;
  Candidate overall;
  std::optional<BMCheckResult> worst;

  for (std::size_t ti = 0; ti < config.t_values.size(); ++ti) {
    BMEvaluator evaluator(space, {config.eps, config.n, config.t_values[ti]});
    struct Partial {
      Candidate best;
      std::optional<BMCheckResult> result;
      std::size_t violations = 0;
    };
    std::vector<Partial> partials(config.workers == 0 ? default_workers() : config.workers);
    std::size_t chunks = parallel_chunks(pairs.size(), config.workers, [&](std::size_t c, std::size_t begin,
                                                                           std::size_t end) {
      Partial local;
      for (std::size_t k = begin; k < end; ++k) {
        BMCheckResult r = evaluator.check(pairs[k].first, pairs[k].second, config.tol_report);
        if (!r.satisfied) ++local.violations;
        if (!local.best.valid || r.gap < local.best.gap) {
          local.best = {r.gap, ti, k, true};
          local.result = std::move(r);
        }
      }
      partials[c] = std::move(local);
    });
    for (std::size_t c = 0; c < chunks; ++c) {
      report.violation_count += partials[c].violations;
      if (partials[c].best.better_than(overall)) {
        overall = partials[c].best;
        worst = std::move(partials[c].result);
      }
    }
  }
  report.checked_count = pair_count * config.t_values.size();
  report.worst = std::move(worst);
  return report;
}

}  // namespace bmconc
