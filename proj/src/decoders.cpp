#include "gtsim/decoders.hpp"

#include <algorithm>
#include <cmath>

#include "gtsim/bounds.hpp"
#include "gtsim/errors.hpp"

namespace gtsim {

namespace {

void require_matching_lengths(const PoolingDesign& design, const TestOutcomes& outcomes,
                              const char* what) {
  if (outcomes.test_count() != design.test_count())
    throw InvalidParameterError(std::string(what) + ": outcome length does not match test count");
}

/// exonerated(x) == x appears in at least one negative test.
BitVec exonerated_set(const PoolingDesign& design, const TestOutcomes& outcomes) {
  const std::size_t n = design.individual_count();
  BitVec exonerated(n);
  for (std::size_t a = 0; a < design.test_count(); ++a)
    if (!outcomes.positive.test(a))
      for (std::uint32_t x : design.members(static_cast<std::uint32_t>(a))) exonerated.set(x);
  return exonerated;
}

}  // namespace

Estimate comp_decode(const PoolingDesign& design, const TestOutcomes& outcomes) {
  require_matching_lengths(design, outcomes, "comp_decode");
  const std::size_t n = design.individual_count();
  Estimate estimate{BitVec(n), "comp"};
  for (std::size_t x = 0; x < n; ++x) {
    bool negative_somewhere = false;
    for (std::uint32_t a : design.memberships(static_cast<std::uint32_t>(x)))
      if (!outcomes.positive.test(a)) {
        negative_somewhere = true;
        break;
      }
    if (!negative_somewhere) estimate.calls.set(x);
  }
  return estimate;
}

Estimate dd_decode(const PoolingDesign& design, const TestOutcomes& outcomes) {
  Estimate estimate = scored_dd(design, outcomes, 1);
  estimate.origin = "dd";
  return estimate;
}

Estimate scored_dd(const PoolingDesign& design, const TestOutcomes& outcomes,
                   std::uint64_t threshold) {
  require_matching_lengths(design, outcomes, "scored_dd");
  if (threshold < 1) throw InvalidParameterError("scored_dd: threshold must be >= 1");
  const std::size_t n = design.individual_count();
  const BitVec exonerated = exonerated_set(design, outcomes);

  // score(x) = positive tests where x is the only unexonerated member.
  std::vector<std::uint64_t> score(n, 0);
  for (std::size_t a = 0; a < design.test_count(); ++a) {
    if (!outcomes.positive.test(a)) continue;
    std::uint32_t candidate = 0;
    std::size_t unexonerated = 0;
    for (std::uint32_t x : design.members(static_cast<std::uint32_t>(a))) {
      if (!exonerated.test(x)) {
        candidate = x;
        if (++unexonerated > 1) break;
      }
    }
    if (unexonerated == 1) ++score[candidate];
  }

  Estimate estimate{BitVec(n), "scored_dd(" + std::to_string(threshold) + ")"};
  for (std::size_t x = 0; x < n; ++x)
    if (score[x] >= threshold) estimate.calls.set(x);
  return estimate;
}

double unexplained_fraction(const PoolingDesign& design, const GroundTruth& truth,
                            const TestOutcomes& outcomes, std::uint32_t x) {
  if (design.individual_count() != truth.n)
    throw InvalidParameterError("unexplained_fraction: design and truth sizes differ");
  require_matching_lengths(design, outcomes, "unexplained_fraction");
  if (x >= truth.n || !truth.is_infected(x))
    throw InvalidParameterError("unexplained_fraction: x must be infected");
  const auto tests = design.memberships(x);
  if (tests.empty())
    throw InvalidParameterError("unexplained_fraction: x participates in no test");

  std::size_t unexplained = 0;
  for (std::uint32_t a : tests) {
    if (!outcomes.positive.test(a))
      throw ModelViolationError("unexplained_fraction: negative test contains infected x");
    bool other_infected = false;
    for (std::uint32_t y : design.members(a))
      if (y != x && truth.is_infected(y)) {
        other_infected = true;
        break;
      }
    if (!other_infected) ++unexplained;
  }
  return static_cast<double>(unexplained) / static_cast<double>(tests.size());
}

std::vector<std::vector<std::uint32_t>> consistent_configurations(
    const PoolingDesign& design, const TestOutcomes& outcomes, std::size_t k,
    std::uint64_t candidate_cap) {
  require_matching_lengths(design, outcomes, "consistent_configurations");
  const std::size_t n = design.individual_count();
  if (k > n) throw InvalidParameterError("consistent_configurations: k > n");
  if (log_binomial(n, k) > std::log(static_cast<double>(candidate_cap)) + 1e-9)
    throw ResourceLimitError("consistent_configurations: C(n, k) exceeds the enumeration cap");

  const std::size_t m = design.test_count();
  const std::size_t words = (m + 63) / 64;

  // Per-individual test mask, and the exoneration flag that prunes every
  // branch through a negative test's member.
  std::vector<std::uint64_t> membership_mask(n * words, 0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::uint32_t a : design.memberships(static_cast<std::uint32_t>(x)))
      membership_mask[x * words + a / 64] |= std::uint64_t{1} << (a % 64);
  std::vector<std::uint64_t> positive_mask(words, 0);
  for (std::size_t a = 0; a < m; ++a)
    if (outcomes.positive.test(a)) positive_mask[a / 64] |= std::uint64_t{1} << (a % 64);
  BitVec exonerated = exonerated_set(design, outcomes);

  std::vector<std::vector<std::uint32_t>> found;
  std::vector<std::uint32_t> chosen;
  chosen.reserve(k);
  // covered[level] = union of masks of chosen[0..level)
  std::vector<std::uint64_t> covered((k + 1) * words, 0);

  // Lexicographic depth-first walk over k-subsets of the unexonerated pool.
  auto walk = [&](auto&& self, std::size_t next, std::size_t depth) -> void {
    if (depth == k) {
      if (std::equal(covered.begin() + static_cast<std::ptrdiff_t>(depth * words),
                     covered.begin() + static_cast<std::ptrdiff_t>((depth + 1) * words),
                     positive_mask.begin()))
        found.push_back(chosen);
      return;
    }
    for (std::size_t x = next; x + (k - depth) <= n; ++x) {
      if (exonerated.test(x)) continue;
      const std::uint64_t* parent = covered.data() + depth * words;
      std::uint64_t* child = covered.data() + (depth + 1) * words;
      const std::uint64_t* mask = membership_mask.data() + x * words;
      for (std::size_t w = 0; w < words; ++w) child[w] = parent[w] | mask[w];
      chosen.push_back(static_cast<std::uint32_t>(x));
      self(self, x + 1, depth + 1);
      chosen.pop_back();
    }
  };
  walk(walk, 0, 0);
  return found;
}

MarginalTable map_margins(const PoolingDesign& design, const TestOutcomes& outcomes,
                          std::size_t k, std::uint64_t candidate_cap) {
  const auto supports = consistent_configurations(design, outcomes, k, candidate_cap);
  if (supports.empty())
    throw ModelViolationError("map_margins: outcomes are inconsistent with every weight-k truth");
  MarginalTable table;
  table.support_count = supports.size();
  table.marginal.assign(design.individual_count(), 0.0);
  for (const auto& support : supports)
    for (std::uint32_t x : support) table.marginal[x] += 1.0;
  for (double& p : table.marginal) p /= static_cast<double>(table.support_count);
  return table;
}

}  // namespace gtsim
