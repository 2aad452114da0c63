#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gtsim/bounds.hpp"
#include "gtsim/decoders.hpp"
#include "gtsim/designs.hpp"
#include "gtsim/errors.hpp"

using namespace gtsim;

namespace {

PoolingDesign make_design(std::size_t n, std::vector<std::vector<std::uint32_t>> tests) {
  return PoolingDesign::from_test_lists(n, std::move(tests));
}

GroundTruth truth_of(std::size_t n, std::vector<std::uint32_t> support) {
  return GroundTruth::from_support(n, std::move(support));
}

}  // namespace

TEST_CASE("comp_decode hand cases") {
  // all negative: every tested individual healthy
  {
    const PoolingDesign d = make_design(4, {{0, 1}, {2}});
    const TestOutcomes out = evaluate_tests(d, truth_of(4, {}));
    const Estimate est = comp_decode(d, out);
    CHECK(!est.calls.test(0));
    CHECK(!est.calls.test(1));
    CHECK(!est.calls.test(2));
    CHECK(est.calls.test(3));  // isolated: no exonerating evidence
  }
  // a1={x1,x2}+, a2={x3}-: calls {x1,x2}, erring exactly on the disguised x2
  {
    const PoolingDesign d = make_design(3, {{0, 1}, {2}});
    const GroundTruth truth = truth_of(3, {0});
    const TestOutcomes out = evaluate_tests(d, truth);
    const Estimate est = comp_decode(d, out);
    CHECK(est.calls.ones() == std::vector<std::uint32_t>{0, 1});
    const VPartition parts = classify_vsets(d, truth, out);
    CHECK(parts.v0_plus == std::vector<std::uint32_t>{1});
  }
  // a1={x1,x2}+, a2={x2}-: exact recovery
  {
    const PoolingDesign d = make_design(2, {{0, 1}, {1}});
    const TestOutcomes out = evaluate_tests(d, truth_of(2, {0}));
    CHECK(comp_decode(d, out).calls.ones() == std::vector<std::uint32_t>{0});
  }
}

TEST_CASE("dd_decode hand cases") {
  // a1={x1,x2}+, a2={x2}-: x2 exonerated, x1 proven
  {
    const PoolingDesign d = make_design(2, {{0, 1}, {1}});
    const TestOutcomes out = evaluate_tests(d, truth_of(2, {0}));
    CHECK(dd_decode(d, out).calls.ones() == std::vector<std::uint32_t>{0});
  }
  // a1={x1,x2}+, a2={x3}-: x2 not exonerated, so x1 stays unproven
  {
    const PoolingDesign d = make_design(3, {{0, 1}, {2}});
    const TestOutcomes out = evaluate_tests(d, truth_of(3, {0}));
    CHECK(dd_decode(d, out).calls.count() == 0);
  }
  // all tests negative: no calls
  {
    const PoolingDesign d = make_design(3, {{0, 1}, {2}});
    const TestOutcomes out = evaluate_tests(d, truth_of(3, {}));
    CHECK(dd_decode(d, out).calls.count() == 0);
  }
}

TEST_CASE("scored_dd thresholds") {
  // x0 sits in five positive tests; in exactly three of them the other
  // member is exonerated by a negative singleton test.
  const PoolingDesign d = make_design(
      6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {1}, {2}, {3}});
  const GroundTruth truth = truth_of(6, {0});
  const TestOutcomes out = evaluate_tests(d, truth);

  CHECK(scored_dd(d, out, 3).calls.test(0));
  CHECK(!scored_dd(d, out, 4).calls.test(0));
  CHECK_THROWS_AS(scored_dd(d, out, 0), InvalidParameterError);

  // C5: calls shrink weakly as the threshold grows
  std::size_t previous = scored_dd(d, out, 1).calls.count();
  for (std::uint64_t t = 2; t <= 6; ++t) {
    const std::size_t current = scored_dd(d, out, t).calls.count();
    CHECK(current <= previous);
    previous = current;
  }
}

TEST_CASE("scored_dd(1) is dd_decode bit-exactly on random instances") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(50);
    const std::size_t k = rng.below(std::min<std::size_t>(n, 5) + 1);
    const std::size_t m = 1 + rng.below(30);
    const GroundTruth truth = sample_ground_truth(n, k, rng);
    const PoolingDesign design =
        (trial % 2 == 0) ? bernoulli_design(n, m, 0.2, rng)
                         : constant_column_design(n, m, rng.below(std::min<std::uint64_t>(m, 5) + 1), rng);
    const TestOutcomes out = evaluate_tests(design, truth);
    CHECK(dd_decode(design, out).calls == scored_dd(design, out, 1).calls);
  }
}

TEST_CASE("decoder identities C1-C3 against the V-set classification") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    const std::size_t k = rng.below(std::min<std::size_t>(n, 6) + 1);
    const std::size_t m = rng.below(40);
    const GroundTruth truth = sample_ground_truth(n, k, rng);
    const PoolingDesign design =
        (trial % 2 == 0) ? bernoulli_design(n, m, 0.15, rng)
                         : constant_column_design(n, m, m == 0 ? 0 : rng.below(std::min<std::uint64_t>(m, 6) + 1), rng);
    const TestOutcomes out = evaluate_tests(design, truth);
    const VPartition parts = classify_vsets(design, truth, out);

    // C2: comp calls exactly V1 union V0+
    std::vector<std::uint32_t> expected_comp;
    expected_comp.insert(expected_comp.end(), truth.infected.begin(), truth.infected.end());
    expected_comp.insert(expected_comp.end(), parts.v0_plus.begin(), parts.v0_plus.end());
    std::sort(expected_comp.begin(), expected_comp.end());
    const std::vector<std::uint32_t> comp_calls = comp_decode(design, out).calls.ones();
    CHECK(comp_calls == expected_comp);

    // C1: no false negatives
    for (std::uint32_t x : truth.infected) CHECK(comp_decode(design, out).calls.test(x));

    // C3: dd calls subset of V1- subset of V1
    const std::vector<std::uint32_t> dd_calls = dd_decode(design, out).calls.ones();
    CHECK(std::includes(parts.v1_minus.begin(), parts.v1_minus.end(), dd_calls.begin(),
                        dd_calls.end()));
    CHECK(std::includes(truth.infected.begin(), truth.infected.end(), parts.v1_minus.begin(),
                        parts.v1_minus.end()));
  }
}

TEST_CASE("unexplained_fraction") {
  // unique infected individual: all its tests unexplained
  {
    const PoolingDesign d = make_design(3, {{0, 1}, {0, 2}, {0}});
    const GroundTruth truth = truth_of(3, {0});
    CHECK(unexplained_fraction(d, truth, evaluate_tests(d, truth), 0) == 1.0);
  }
  // every test shared with another infected
  {
    const PoolingDesign d = make_design(3, {{0, 1}, {0, 1, 2}});
    const GroundTruth truth = truth_of(3, {0, 1});
    CHECK(unexplained_fraction(d, truth, evaluate_tests(d, truth), 0) == 0.0);
  }
  // half and half
  {
    const PoolingDesign d = make_design(3, {{0, 1}, {0, 2}});
    const GroundTruth truth = truth_of(3, {0, 1});
    CHECK(unexplained_fraction(d, truth, evaluate_tests(d, truth), 0) == 0.5);
  }
  // errors: healthy x, isolated x
  {
    const PoolingDesign d = make_design(3, {{0, 1}});
    const GroundTruth truth = truth_of(3, {0, 2});
    const TestOutcomes out = evaluate_tests(d, truth);
    CHECK_THROWS_AS(unexplained_fraction(d, truth, out, 1), InvalidParameterError);
    CHECK_THROWS_AS(unexplained_fraction(d, truth, out, 2), InvalidParameterError);
  }
}

TEST_CASE("consistent_configurations enumerates exactly") {
  // a1={x1,x2}+, a2={x3}-, k=1: {x1} and {x2} both explain the outcomes
  {
    const PoolingDesign d = make_design(3, {{0, 1}, {2}});
    const TestOutcomes out = evaluate_tests(d, truth_of(3, {0}));
    const auto sets = consistent_configurations(d, out, 1);
    REQUIRE(sets.size() == 2);
    CHECK(sets[0] == std::vector<std::uint32_t>{0});
    CHECK(sets[1] == std::vector<std::uint32_t>{1});
  }
  // no tests: all C(4,2) = 6 pairs, lexicographic
  {
    const PoolingDesign d = make_design(4, {});
    const TestOutcomes out{BitVec(0)};
    const auto sets = consistent_configurations(d, out, 2);
    REQUIRE(sets.size() == 6);
    CHECK(sets.front() == std::vector<std::uint32_t>{0, 1});
    CHECK(sets.back() == std::vector<std::uint32_t>{2, 3});
    CHECK(std::is_sorted(sets.begin(), sets.end()));
  }
  // cap: C(30, 5) = 142506 > 1000 candidates
  {
    const PoolingDesign d = make_design(30, {});
    const TestOutcomes out{BitVec(0)};
    CHECK_THROWS_AS(consistent_configurations(d, out, 5, 1000), ResourceLimitError);
  }
}

TEST_CASE("C4: the truth and every consistent decoder output appear in the enumeration") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(12);
    const std::size_t k = rng.below(std::min<std::size_t>(n, 4) + 1);
    const std::size_t m = rng.below(12);
    const GroundTruth truth = sample_ground_truth(n, k, rng);
    const PoolingDesign design = bernoulli_design(n, m, 0.25, rng);
    const TestOutcomes out = evaluate_tests(design, truth);
    const auto sets = consistent_configurations(design, out, k);
    CHECK(std::find(sets.begin(), sets.end(), truth.infected) != sets.end());

    const Estimate comp = comp_decode(design, out);
    if (comp.calls.count() == k) {
      const TestOutcomes replay = evaluate_tests(design, truth_of(n, comp.calls.ones()));
      if (replay.positive == out.positive)
        CHECK(std::find(sets.begin(), sets.end(), comp.calls.ones()) != sets.end());
    }
  }
}

TEST_CASE("map_margins") {
  // two consistent singletons: 0.5 each, third individual 0
  {
    const PoolingDesign d = make_design(3, {{0, 1}, {2}});
    const TestOutcomes out = evaluate_tests(d, truth_of(3, {0}));
    const MarginalTable table = map_margins(d, out, 1);
    CHECK(table.support_count == 2);
    CHECK(table.marginal[0] == doctest::Approx(0.5));
    CHECK(table.marginal[1] == doctest::Approx(0.5));
    CHECK(table.marginal[2] == 0.0);
  }
  // unique consistent set: marginals in {0,1}
  {
    const PoolingDesign d = make_design(2, {{0, 1}, {1}});
    const TestOutcomes out = evaluate_tests(d, truth_of(2, {0}));
    const MarginalTable table = map_margins(d, out, 1);
    CHECK(table.support_count == 1);
    CHECK(table.marginal[0] == 1.0);
    CHECK(table.marginal[1] == 0.0);
  }
  // inconsistent outcomes: model violation
  {
    const PoolingDesign d = make_design(2, {{0}, {0}});
    TestOutcomes out{BitVec(2)};
    out.positive.set(0);  // same individual cannot be both positive and negative
    CHECK_THROWS_AS(map_margins(d, out, 1), ModelViolationError);
  }
}

TEST_CASE("C6 and exoneration: margins sum to k, negative-test individuals get 0") {
  SplitMix64 rng(37);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng.below(11);
    const std::size_t k = rng.below(std::min<std::size_t>(n, 4) + 1);
    const std::size_t m = rng.below(10);
    const GroundTruth truth = sample_ground_truth(n, k, rng);
    const PoolingDesign design = bernoulli_design(n, m, 0.3, rng);
    const TestOutcomes out = evaluate_tests(design, truth);
    const MarginalTable table = map_margins(design, out, k);
    REQUIRE(table.support_count > 0);

    double sum = 0.0;
    for (double p : table.marginal) sum += p;
    CHECK(sum == doctest::Approx(static_cast<double>(k)).epsilon(1e-9));

    for (std::size_t a = 0; a < m; ++a)
      if (!out.positive.test(a))
        for (std::uint32_t x : design.members(static_cast<std::uint32_t>(a)))
          CHECK(table.marginal[x] == 0.0);
  }
}

TEST_CASE("tuned stage-1 design leaves about half of an infected's tests unexplained") {
  // Monte-Carlo check of the 1/2 tuning at moderate scale; the analytic
  // value is (1 - delta/m)^(k-1).
  SplitMix64 rng(41);
  const std::size_t n = 2000;
  const std::size_t k = 45;  // ~ n^0.5
  const auto m = static_cast<std::size_t>(std::llround(2.0 * m_one_stage(n, 0.5)));
  const std::uint64_t delta = tuned_delta(m, k);
  const double analytic =
      std::pow(1.0 - static_cast<double>(delta) / static_cast<double>(m),
               static_cast<double>(k - 1));

  double total = 0.0;
  std::size_t samples = 0;
  for (int seed_round = 0; seed_round < 25; ++seed_round) {
    const GroundTruth truth = sample_ground_truth(n, k, rng);
    const PoolingDesign design = constant_column_design(n, m, delta, rng);
    const TestOutcomes out = evaluate_tests(design, truth);
    for (std::uint32_t x : truth.infected) {
      total += unexplained_fraction(design, truth, out, x);
      ++samples;
    }
  }
  const double mean = total / static_cast<double>(samples);
  CHECK(std::abs(mean - analytic) < 0.05);
  CHECK(analytic > 0.40);
  CHECK(analytic < 0.60);
}
