#pragma once

#include <cstddef>
#include <cstdint>

#include "gtsim/model.hpp"
#include "gtsim/rng.hpp"

namespace gtsim {

/// Column weight that prices a test at even odds of containing a second
/// infected member: Delta = max(1, round(m ln2 / k)), capped at m.
/// Returns 0 when k == 0 or m == 0 (nothing to tune).
std::uint64_t tuned_delta(std::uint64_t m, std::uint64_t k);

/// Each individual joins exactly delta of the m tests, drawn uniformly
/// without replacement, independently across individuals.
PoolingDesign constant_column_design(std::size_t n, std::size_t m, std::uint64_t delta,
                                     SplitMix64& rng);

/// Every (individual, test) pair joined independently with probability p.
/// Draw order: individuals outer, tests inner.
PoolingDesign bernoulli_design(std::size_t n, std::size_t m, double p, SplitMix64& rng);

/// ceil(n / group_size) contiguous groups; test j holds [j*s, min((j+1)*s, n)).
/// The remainder group stays smaller, never merged.
PoolingDesign dorfman_partition(std::size_t n, std::size_t group_size);

/// One singleton test per listed individual, in list order. Individuals not
/// listed join no test.
PoolingDesign individual_design(const std::vector<std::uint32_t>& indices, std::size_t n);

/// Integer group size in [1, n] minimizing the exact Dorfman expectation,
/// ties broken toward smaller sizes. k == 0 returns n (degenerate: a single
/// pool suffices in expectation).
std::uint64_t optimal_dorfman_group_size(std::size_t n, std::size_t k);

}  // namespace gtsim
