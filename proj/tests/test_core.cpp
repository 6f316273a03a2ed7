#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "bmconc/core.hpp"
#include "test_support.hpp"

using namespace bmconc;
using bmconc::testing::make_space;
using bmconc::testing::raw_space;

namespace {

std::vector<Violation> violations_of(RawSpace raw) {
  try {
    validate_space(std::move(raw));
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool has(const std::vector<Violation>& vs, ErrorCode code, std::vector<std::size_t> idx) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.code == code && v.indices == idx; });
}

}  // namespace

TEST_CASE("smallest nondegenerate space validates") {
  auto s = make_space({0, 1, 1, 0}, {0.5, 0.5});
  CHECK(s.size() == 2);
  CHECK(s.dist(0, 1) == 1.0);
  CHECK(s.max_distance() == 1.0);
}

TEST_CASE("triangle violation names the offending triple") {
  auto vs = violations_of(raw_space({0, 1, 5, 1, 0, 1, 5, 1, 0}, {0.25, 0.5, 0.25}));
  REQUIRE(vs.size() == 1);
  CHECK(has(vs, ErrorCode::TriangleViolation, {0, 1, 2}));
}

TEST_CASE("zero weight breaks full support") {
  auto vs = violations_of(raw_space({0, 1, 1, 0}, {0.7, 0.0}));
  CHECK(has(vs, ErrorCode::NonpositiveWeight, {1}));
}

TEST_CASE("every violation is reported, not only the first") {
  // asymmetric, nonzero diagonal, duplicate point, negative weight all at once
  auto vs = violations_of(raw_space({0.1, 1, 0, 2, 0, 1, 0, 1, 0}, {0.5, -0.1, 0.6}));
  CHECK(has(vs, ErrorCode::NonzeroDiagonal, {0}));
  CHECK(has(vs, ErrorCode::AsymmetricMatrix, {0, 1}));
  CHECK(has(vs, ErrorCode::DuplicatePoint, {0, 2}));
  CHECK(has(vs, ErrorCode::NonpositiveWeight, {1}));
}

TEST_CASE("weight sum must be within 1e-9 of one") {
  CHECK(has(violations_of(raw_space({0, 1, 1, 0}, {0.5, 0.6})), ErrorCode::WeightSumOff, {}));
  auto s = make_space({0, 1, 1, 0}, {0.5 + 4e-10, 0.5});
  CHECK(s.weight(0) + s.weight(1) == 1.0);
}

TEST_CASE("dimension mismatch throws before validation") {
  RawSpace raw = raw_space({0, 1, 1}, {0.5, 0.5});
  CHECK_THROWS_AS(validate_space(raw), Error);
  try {
    validate_space(raw);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("duplicate labels are rejected") {
  RawSpace raw = raw_space({0, 1, 1, 0}, {0.5, 0.5});
  raw.labels = {"x", "x"};
  CHECK(has(violations_of(raw), ErrorCode::DuplicateLabel, {1}));
}

TEST_CASE("triangle tolerance is relative to the largest distance") {
  // 2 + 1e-10 exceeds 1 + 1 by 1e-10 < 1e-9 * 2: accepted
  CHECK_NOTHROW(make_space({0, 1, 2 + 1e-10, 1, 0, 1, 2 + 1e-10, 1, 0}, {0.3, 0.3, 0.4}));
  CHECK_THROWS_AS(make_space({0, 1, 2 + 1e-8, 1, 0, 1, 2 + 1e-8, 1, 0}, {0.3, 0.3, 0.4}), ValidationError);
}

TEST_CASE("validation is idempotent and weights sum to exactly one") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(seed);
    std::size_t n = 2 + rng.below(15);
    auto s = bmconc::testing::random_metric_space(seed, n);
    double sum = 0.0;
    for (double w : s.weights()) sum += w;
    CHECK(sum == 1.0);
    CHECK(validate_space(s.to_raw()) == s);
    CHECK(measure(s, Subset::full(n)) == 1.0);
  }
}

TEST_CASE("validated spaces satisfy the triangle inequality within tolerance") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    auto s = bmconc::testing::random_metric_space(seed, 9);
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 9; ++j)
        for (std::size_t k = 0; k < 9; ++k)
          CHECK(s.dist(i, k) <= s.dist(i, j) + s.dist(j, k) + s.triangle_tolerance());
  }
}

TEST_CASE("measure examples") {
  auto four = make_space({0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0}, {0.25, 0.25, 0.25, 0.25});
  CHECK(measure(four, Subset::of(4, {0, 1})) == 0.5);
  CHECK(measure(four, Subset(4)) == 0.0);
  auto path = bmconc::testing::path3();
  CHECK(measure(path, Subset::of(3, {1, 2})) == 0.75);
}

TEST_CASE("measure rejects subsets over the wrong universe") {
  auto s = bmconc::testing::two_point();
  CHECK_THROWS_AS(measure(s, Subset::of(3, {2})), Error);
  CHECK_THROWS_AS(Subset::of(2, {2}), Error);
}

TEST_CASE("measure is additive on disjoint sets and monotone under inclusion") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto s = bmconc::testing::random_metric_space(seed, 12);
    Rng rng(seed * 7);
    std::uint64_t a = rng.below(1 << 12), b = rng.below(1 << 12) & ~a;
    Subset sa = Subset::from_mask(12, a), sb = Subset::from_mask(12, b);
    CHECK(measure(s, sa | sb) == doctest::Approx(measure(s, sa) + measure(s, sb)).epsilon(1e-14));
    CHECK(measure(s, sa) <= measure(s, sa | sb));
  }
}

TEST_CASE("subset bitset semantics beyond one word") {
  Subset s = Subset::of(130, {0, 63, 64, 129});
  CHECK(s.count() == 4);
  CHECK(s.contains(129));
  CHECK_FALSE(s.contains(128));
  CHECK(s.indices() == std::vector<std::size_t>{0, 63, 64, 129});
  CHECK(Subset::of(130, {64}).is_subset_of(s));
  CHECK_THROWS_AS(Subset::of(5, {1, 1}), Error);
}
