#pragma once

#include <cstdint>
#include <vector>

#include "gtsim/model.hpp"

namespace gtsim {

/// Posterior marginals under the uniform weight-k prior, from exact
/// enumeration of the consistent configurations.
struct MarginalTable {
  std::vector<double> marginal;     // per-individual inclusion probability
  std::uint64_t support_count = 0;  // number of consistent weight-k sets
};

/// COMP: healthy iff some adjacent test is negative. Individuals in no test
/// are called infected (no exonerating evidence), which keeps the call set a
/// superset of the truth on every consistent instance.
Estimate comp_decode(const PoolingDesign& design, const TestOutcomes& outcomes);

/// Definite defectives: call x iff x has no negative test and some positive
/// test contains, besides x, only exonerated individuals. Sound: never calls
/// a healthy individual when outcomes are consistent with some truth.
Estimate dd_decode(const PoolingDesign& design, const TestOutcomes& outcomes);

/// DD with a proof-count threshold: score(x) = number of positive tests
/// whose other members are all exonerated; call iff unexonerated and
/// score >= threshold. threshold == 1 reduces exactly to dd_decode.
Estimate scored_dd(const PoolingDesign& design, const TestOutcomes& outcomes,
                   std::uint64_t threshold);

/// Diagnostic: fraction of x's tests containing no other infected individual
/// under the true sigma. Requires x infected with at least one test.
double unexplained_fraction(const PoolingDesign& design, const GroundTruth& truth,
                            const TestOutcomes& outcomes, std::uint32_t x);

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// All weight-k supports reproducing the outcomes exactly, in lexicographic
/// order. Refuses (ResourceLimitError) when C(n, k) exceeds the cap; the
/// oracle is exact or it does not answer.
std::vector<std::vector<std::uint32_t>> consistent_configurations(
    const PoolingDesign& design, const TestOutcomes& outcomes, std::size_t k,
    std::uint64_t candidate_cap = kDefaultEnumerationCap);

/// marginal[x] = fraction of consistent weight-k sets containing x. Throws
/// ModelViolationError when no weight-k set is consistent.
MarginalTable map_margins(const PoolingDesign& design, const TestOutcomes& outcomes,
                          std::size_t k, std::uint64_t candidate_cap = kDefaultEnumerationCap);

}  // namespace gtsim
