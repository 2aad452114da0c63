#include "gtsim/designs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gtsim/bounds.hpp"
#include "gtsim/errors.hpp"

namespace gtsim {

std::uint64_t tuned_delta(std::uint64_t m, std::uint64_t k) {
  if (k == 0 || m == 0) return 0;
  const double raw = static_cast<double>(m) * std::numbers::ln2 / static_cast<double>(k);
  auto delta = static_cast<std::uint64_t>(std::llround(raw));
  delta = std::max<std::uint64_t>(delta, 1);
  return std::min(delta, m);
}

namespace {

// rows are tiny; insertion sort beats introsort here
void sort_small_row(std::uint32_t* first, std::uint32_t* last) {
  for (std::uint32_t* i = first + 1; i < last; ++i) {
    const std::uint32_t v = *i;
    std::uint32_t* j = i;
    while (j > first && j[-1] > v) {
      *j = j[-1];
      --j;
    }
    *j = v;
  }
}

}  // namespace

PoolingDesign constant_column_design(std::size_t n, std::size_t m, std::uint64_t delta,
                                     SplitMix64& rng) {
  if (delta > m) throw InvalidParameterError("constant_column_design: delta > m");
  std::vector<std::uint64_t> offsets(n + 1);
  std::vector<std::uint32_t> data(n * delta);
  // Floyd sampling inline; exactly delta bounded draws per individual
  for (std::size_t x = 0; x < n; ++x) {
    offsets[x] = x * delta;
    std::uint32_t* row = data.data() + x * delta;
    std::size_t filled = 0;
    for (std::uint64_t j = m - delta; j < m; ++j) {
      const auto t = static_cast<std::uint32_t>(rng.below(j + 1));
      std::uint32_t* const end = row + filled;
      const std::uint32_t pick =
          (std::find(row, end, t) != end) ? static_cast<std::uint32_t>(j) : t;
      row[filled++] = pick;
    }
    sort_small_row(row, row + delta);
  }
  offsets[n] = n * delta;
  return PoolingDesign::from_sorted_flat_memberships(n, m, std::move(offsets), std::move(data));
}

PoolingDesign bernoulli_design(std::size_t n, std::size_t m, double p, SplitMix64& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidParameterError("bernoulli_design: p must lie in [0, 1]");
  std::vector<std::uint64_t> offsets(1, 0);
  offsets.reserve(n + 1);
  std::vector<std::uint32_t> data;
  data.reserve(static_cast<std::size_t>(static_cast<double>(n) * static_cast<double>(m) * p) + 16);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t a = 0; a < m; ++a)
      if (rng.next_double() < p) data.push_back(static_cast<std::uint32_t>(a));
    offsets.push_back(data.size());
  }
  return PoolingDesign::from_sorted_flat_memberships(n, m, std::move(offsets), std::move(data));
}

PoolingDesign dorfman_partition(std::size_t n, std::size_t group_size) {
  if (group_size < 1) throw InvalidParameterError("dorfman_partition: group_size must be >= 1");
  const std::size_t groups = n == 0 ? 0 : (n + group_size - 1) / group_size;
  std::vector<std::uint64_t> offsets(n + 1);
  std::vector<std::uint32_t> data(n);
  for (std::size_t x = 0; x < n; ++x) {
    offsets[x] = x;
    data[x] = static_cast<std::uint32_t>(x / group_size);
  }
  offsets[n] = n;
  return PoolingDesign::from_sorted_flat_memberships(n, groups, std::move(offsets),
                                                     std::move(data));
}

PoolingDesign individual_design(const std::vector<std::uint32_t>& indices, std::size_t n) {
  BitVec seen(n);
  for (std::uint32_t x : indices) {
    if (x >= n) throw InvalidParameterError("individual_design: index out of range");
    if (seen.test(x)) throw InvalidParameterError("individual_design: duplicate index");
    seen.set(x);
  }
  std::vector<std::vector<std::uint32_t>> tests;
  tests.reserve(indices.size());
  for (std::uint32_t x : indices) tests.push_back({x});
  return PoolingDesign::from_test_lists(n, std::move(tests));
}

std::uint64_t optimal_dorfman_group_size(std::size_t n, std::size_t k) {
  if (n == 0) throw InvalidParameterError("optimal_dorfman_group_size: n must be >= 1");
  if (k > n) throw InvalidParameterError("optimal_dorfman_group_size: k > n");
  if (k == 0) return n;

  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_s = 1;
  for (std::uint64_t s = 1; s <= n; ++s) {
    const double e = dorfman_expected_tests(n, k, s);
    if (e < best) {
      best = e;
      best_s = s;
    }
    // Scan cutoff. Every t > s is provably worse than the incumbent once
    // min over the remaining range of the stage-2 floor exceeds it:
    // for t in [s, n/2] the expectation is >= (n/2)(1 - e^{-ks/n});
    // for t > n/2 it is >= n/4 since the big group is positive w.p. >= 1/2.
    if (s <= n / 2) {
      const double floor_mid = nd / 2.0 * -std::expm1(-kd * static_cast<double>(s) / nd);
      if (std::min(floor_mid, nd / 4.0) > best) break;
    }
  }
  return best_s;
}

}  // namespace gtsim
