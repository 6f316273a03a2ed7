#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bmconc/bm_verifier.hpp"
#include "test_support.hpp"

using namespace bmconc;
using namespace bmconc::testing;

namespace {

// mpmath, 30 digits: sqrt(1/2) * (sin 0.5 / (0.5 sin 1))^(1/2)
constexpr double kTwoPointRhs = 0.754815847516647308737;

MetricMeasureSpace far_space() {
  // p0 - p1 at 0.5, p2 at 3.5 from p0 and 3.0 from p1
  return make_space({0, 0.5, 3.5, 0.5, 0, 3.0, 3.5, 3.0, 0}, {0.3, 0.3, 0.4});
}

}  // namespace

TEST_CASE("params validation") {
  CHECK_NOTHROW(BMParams{0.0, 2.0, 0.5}.validate());
  CHECK_THROWS_AS(BMParams({-0.1, 2.0, 0.5}).validate(), Error);
  CHECK_THROWS_AS(BMParams({0.0, 1.0, 0.5}).validate(), Error);
  CHECK_THROWS_AS(BMParams({0.0, 2.0, 1.0}).validate(), Error);
}

TEST_CASE("bm_rhs examples") {
  auto two = two_point(1.0);
  auto a0 = Subset::of(2, {0}), a1 = Subset::of(2, {1});
  CHECK(bm_rhs(two, a0, a1, {0.0, 2.0, 0.5}).value() == doctest::Approx(kTwoPointRhs).epsilon(1e-13));
  // full set: coefficient 1 from the diagonal pairs, masses 1
  CHECK(bm_rhs(two, Subset::full(2), Subset::full(2), {0.0, 2.0, 0.5}).value() == 1.0);
  auto far = make_space({0, 3.2, 3.2, 0}, {0.5, 0.5});
  CHECK(bm_rhs(far, Subset::of(2, {0}), Subset::of(2, {1}), {0.0, 2.0, 0.5}).is_infinite());
}

TEST_CASE("bm_check_pair examples") {
  auto two = two_point(1.0);
  auto r = bm_check_pair(two, Subset::of(2, {0}), Subset::of(2, {1}), {0.0, 2.0, 0.5});
  CHECK(r.lhs == 0.0);
  CHECK(r.rhs.value() == doctest::Approx(kTwoPointRhs).epsilon(1e-13));
  CHECK_FALSE(r.satisfied);
  CHECK(r.intermediate.empty());

  auto full = bm_check_pair(path3(), Subset::full(3), Subset::full(3), {2.0, 3.0, 0.3});
  CHECK(full.lhs == 1.0);
  CHECK(full.satisfied == (full.rhs.value() <= 1.0));

  auto far = make_space({0, 3.2, 3.2, 0}, {0.5, 0.5});
  auto inf = bm_check_pair(far, Subset::of(2, {0}), Subset::of(2, {1}), {10.0, 2.0, 0.5}, 1e9);
  CHECK(inf.rhs.is_infinite());
  CHECK(std::isinf(inf.gap));
  CHECK(inf.gap < 0);
  CHECK_FALSE(inf.satisfied);  // no tolerance rescues an infinite rhs
}

TEST_CASE("tolerance decides borderline instances") {
  auto two = two_point(1.0);
  auto a0 = Subset::of(2, {0}), a1 = Subset::of(2, {1});
  CHECK_FALSE(bm_check_pair(two, a0, a1, {0.0, 2.0, 0.5}, 0.75).satisfied);
  CHECK(bm_check_pair(two, a0, a1, {0.0, 2.0, 0.5}, 0.76).satisfied);
}

TEST_CASE("evaluator agrees with direct evaluation bit for bit") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const std::size_t n = 10;
    auto s = random_metric_space(seed, n, 0.1, 1.5);
    Rng rng(seed);
    BMParams p{rng.uniform(0.0, 0.4), 1.5 + 3 * rng.uniform(), 0.1 + 0.8 * rng.uniform()};
    BMEvaluator ev(s, p);
    for (int k = 0; k < 10; ++k) {
      Subset a0 = Subset::from_mask(n, 1 + rng.below((1 << n) - 1));
      Subset a1 = Subset::from_mask(n, 1 + rng.below((1 << n) - 1));
      auto direct = bm_check_pair(s, a0, a1, p);
      auto fast = ev.check(a0, a1);
      CHECK(direct.lhs == fast.lhs);
      CHECK(direct.rhs == fast.rhs);
      CHECK(direct.intermediate == fast.intermediate);
      CHECK(direct.coeff0.i == fast.coeff0.i);
      CHECK(direct.coeff1.j == fast.coeff1.j);
    }
  }
}

TEST_CASE("swapping A0, A1 with t -> 1 - t preserves lhs and rhs") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::size_t n = 8;
    auto s = random_metric_space(seed, n, 0.1, 1.5);
    Rng rng(seed * 3);
    Subset a0 = Subset::from_mask(n, 1 + rng.below((1 << n) - 1));
    Subset a1 = Subset::from_mask(n, 1 + rng.below((1 << n) - 1));
    double eps = rng.uniform(0.0, 0.3);
    auto fwd = bm_check_pair(s, a0, a1, {eps, 2.5, 0.5});
    auto rev = bm_check_pair(s, a1, a0, {eps, 2.5, 0.5});
    CHECK(fwd.lhs == rev.lhs);
    CHECK(fwd.rhs.value() == doctest::Approx(rev.rhs.value()).epsilon(1e-15));
    // general t: the swapped t is 1 - t up to rounding
    double t = 0.15 + 0.7 * rng.uniform();
    auto g = bm_check_pair(s, a0, a1, {eps, 2.5, t});
    auto h = bm_check_pair(s, a1, a0, {eps, 2.5, 1.0 - t});
    CHECK(g.rhs.value() == doctest::Approx(h.rhs.value()).epsilon(1e-12));
  }
}

TEST_CASE("satisfaction is monotone in eps") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::size_t n = 8;
    auto s = random_metric_space(seed, n, 0.1, 1.5);
    Rng rng(seed * 5);
    Subset a0 = Subset::from_mask(n, 1 + rng.below((1 << n) - 1));
    Subset a1 = Subset::from_mask(n, 1 + rng.below((1 << n) - 1));
    bool before = false;
    for (double eps = 0.0; eps < 1.5; eps += 0.05) {
      bool now = bm_check_pair(s, a0, a1, {eps, 2.0, 0.5}).satisfied;
      CHECK((!before || now));
      before = now;
    }
  }
}

TEST_CASE("exhaustive verification on the two-point space") {
  VerifyConfig config;
  config.eps = 0.0;
  auto report = bm_verify_exhaustive(two_point(1.0), config);
  CHECK(report.checked_count == 9);
  CHECK(report.violation_count >= 1);
  REQUIRE(report.worst);
  CHECK(report.worst->gap == doctest::Approx(-kTwoPointRhs).epsilon(1e-13));
  CHECK(report.worst->a0.count() == 1);
  CHECK(report.worst->a1.count() == 1);
  CHECK_FALSE(report.lemma_shortcircuit);
}

TEST_CASE("one-point space satisfies every instance") {
  VerifyConfig config;
  config.t_values = uniform_t_grid(9);
  auto report = bm_verify_exhaustive(one_point(), config);
  CHECK(report.violation_count == 0);
  CHECK(report.checked_count == 9);
  CHECK(report.worst->lhs == 1.0);
  CHECK(report.worst->rhs.value() == 1.0);
}

TEST_CASE("a pair farther than pi short-circuits verification") {
  VerifyConfig config;
  auto report = bm_verify_exhaustive(far_space(), config);
  REQUIRE(report.lemma_shortcircuit);
  CHECK(report.lemma_shortcircuit->i == 0);
  CHECK(report.lemma_shortcircuit->j == 2);
  CHECK(report.lemma_shortcircuit->distance == 3.5);
  CHECK(report.refuted());
  CHECK(report.checked_count == 1);
  CHECK(report.worst->rhs.is_infinite());

  auto sampled = bm_verify_sampled(far_space(), config, 100, SubsetSampler::parse("balls"), 1);
  CHECK(sampled.lemma_shortcircuit);
}

TEST_CASE("exhaustive worst gap matches a brute-force scan") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Rng rng(seed);
    std::size_t n = 2 + rng.below(4);
    auto s = random_metric_space(seed, n, 0.2, 2.5);
    double eps = rng.uniform(0.0, 0.6);
    double n_dim = 1.5 + 4 * rng.uniform();
    double t = 0.2 + 0.6 * rng.uniform();
    VerifyConfig config{eps, n_dim, {t}, 0.0, 1};
    auto report = bm_verify_exhaustive(s, config);
    double oracle = bm_worst_gap_brute(s, eps, n_dim, t);
    REQUIRE(report.worst);
    if (std::isinf(oracle))
      CHECK(std::isinf(report.worst->gap));
    else
      CHECK(report.worst->gap == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("exhaustive results do not depend on the worker count") {
  auto s = random_metric_space(77, 9, 0.2, 1.2);
  VerifyConfig a{0.1, 3.0, {0.25, 0.5}, 0.0, 1};
  VerifyConfig b = a;
  b.workers = 4;
  auto ra = bm_verify_exhaustive(s, a), rb = bm_verify_exhaustive(s, b);
  CHECK(ra.violation_count == rb.violation_count);
  CHECK(ra.worst->gap == rb.worst->gap);
  CHECK(ra.worst->a0 == rb.worst->a0);
  CHECK(ra.worst->a1 == rb.worst->a1);
  CHECK(ra.worst->t == rb.worst->t);
}

TEST_CASE("exhaustive guards") {
  VerifyConfig config;
  auto big = random_metric_space(1, 15);
  CHECK_THROWS_AS(bm_verify_exhaustive(big, config), Error);
  config.t_values.clear();
  CHECK_THROWS_AS(bm_verify_exhaustive(two_point(), config), Error);
}

TEST_CASE("sampled verification") {
  VerifyConfig config;
  auto two = two_point(1.0);
  auto singles = bm_verify_sampled(two, config, 50, SubsetSampler::parse("singletons"), 9);
  REQUIRE(singles.worst);
  CHECK(singles.worst->gap == doctest::Approx(-kTwoPointRhs).epsilon(1e-13));
  CHECK_THROWS_AS(bm_verify_sampled(two, config, 0, SubsetSampler::parse("balls"), 1), Error);
  CHECK_THROWS_AS(SubsetSampler::parse("cubes"), Error);
  CHECK(SubsetSampler::parse("random:7").max_cardinality == 7);
}

TEST_CASE("sampled verification is reproducible and worker independent") {
  auto s = random_metric_space(5, 40, 0.05, 0.8);
  VerifyConfig config{0.2, 2.0, {0.5}, 0.0, 1};
  auto sampler = SubsetSampler::parse("random:6");
  auto a = bm_verify_sampled(s, config, 500, sampler, 42);
  config.workers = 4;
  auto b = bm_verify_sampled(s, config, 500, sampler, 42);
  CHECK(a.violation_count == b.violation_count);
  CHECK(a.worst->gap == b.worst->gap);
  CHECK(a.worst->a0 == b.worst->a0);
  auto c = bm_verify_sampled(s, config, 500, sampler, 43);
  CHECK(c.checked_count == 500);
}

TEST_CASE("samplers draw valid subsets") {
  auto s = random_metric_space(8, 30, 0.1, 1.0);
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    CHECK(SubsetSampler::parse("singletons").draw(s, 1.0, rng).count() == 1);
    auto r = SubsetSampler::parse("random:5").draw(s, 1.0, rng).count();
    CHECK(r >= 1);
    CHECK(r <= 5);
    CHECK_FALSE(SubsetSampler::parse("balls").draw(s, 1.0, rng).empty());
  }
}

TEST_CASE("uniform t grid") {
  CHECK(uniform_t_grid(1) == std::vector<double>{0.5});
  CHECK(uniform_t_grid(3) == std::vector<double>{0.25, 0.5, 0.75});
}
