#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gtsim/bitvec.hpp"
#include "gtsim/errors.hpp"
#include "gtsim/rng.hpp"

namespace gtsim {

/// The hidden infection vector sigma: a population of n individuals of which
/// exactly |infected| carry the trait. Immutable after construction.
struct GroundTruth {
  std::size_t n = 0;
  std::vector<std::uint32_t> infected;  // sorted, duplicate-free support
  BitVec mask;                          // same support, O(1) membership
  std::optional<double> theta;          // sparsity exponent, metadata only

  std::size_t k() const { return infected.size(); }
  bool is_infected(std::uint32_t x) const { return mask.test(x); }

  /// Validates range/order/uniqueness; sorts and rejects duplicates.
  static GroundTruth from_support(std::size_t n, std::vector<std::uint32_t> support);
};

/// k = round(n^theta), clamped to [1, n-1]. Requires n >= 2, theta in (0,1).
std::size_t k_from_theta(std::size_t n, double theta);

/// Bipartite individuals-to-tests graph, stored CSR in both directions so
/// membership lists and test member lists are O(1) span lookups. The two
/// directions are exact transposes by construction.
class PoolingDesign {
 public:
  PoolingDesign() = default;

  /// Build from per-test member lists. Lists are sorted and de-duplicated
  /// (a second copy of an individual carries no information under the OR
  /// channel); out-of-range indices are rejected.
  static PoolingDesign from_test_lists(std::size_t n,
                                       std::vector<std::vector<std::uint32_t>> tests);

  /// Build from per-individual test lists; same normalization as above.
  static PoolingDesign from_memberships(std::size_t n, std::size_t m,
                                        std::vector<std::vector<std::uint32_t>> memberships);

  /// Fast path for the design generators: rows already sorted and
  /// duplicate-free, flattened with offsets[x] .. offsets[x+1] delimiting
  /// individual x's tests. Indices are still range-checked.
  static PoolingDesign from_sorted_flat_memberships(std::size_t n, std::size_t m,
                                                    std::vector<std::uint64_t> offsets,
                                                    std::vector<std::uint32_t> data);

  std::size_t individual_count() const { return n_; }
  std::size_t test_count() const { return m_; }
  std::size_t edge_count() const { return memb_data_.size(); }
  bool has_empty_tests() const { return has_empty_tests_; }

  /// Members of test a (sorted individual indices).
  std::span<const std::uint32_t> members(std::uint32_t a) const {
    return {test_data_.data() + test_off_[a], test_data_.data() + test_off_[a + 1]};
  }

  /// Tests containing individual x (sorted test indices).
  std::span<const std::uint32_t> memberships(std::uint32_t x) const {
    return {memb_data_.data() + memb_off_[x], memb_data_.data() + memb_off_[x + 1]};
  }

  std::size_t degree(std::uint32_t x) const { return memb_off_[x + 1] - memb_off_[x]; }
  std::size_t test_size(std::uint32_t a) const { return test_off_[a + 1] - test_off_[a]; }

 private:
  void build_test_side_from_memberships();

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<std::uint64_t> memb_off_{0};
  std::vector<std::uint32_t> memb_data_;
  std::vector<std::uint64_t> test_off_{0};
  std::vector<std::uint32_t> test_data_;
  bool has_empty_tests_ = false;
};

/// OR-channel result vector for one design: positive[a] = 1 iff test a
/// contains at least one infected member.
struct TestOutcomes {
  BitVec positive;

  std::size_t test_count() const { return positive.size(); }
  std::size_t positive_count() const { return positive.count(); }
};

/// A decoder's classification of every individual plus its provenance.
struct Estimate {
  BitVec calls;        // calls.test(x) == 1 means "called infected"
  std::string origin;  // producing decoder/stage, e.g. "comp", "dd"

  std::size_t size() const { return calls.size(); }
};

/// Four-way classification of individuals by test evidence:
///   v0_minus  healthy, appears in at least one negative test
///   v0_plus   healthy, only positive tests (disguised) -- includes isolated
///   v1_minus  infected, some test contains no other infected
///   v1_plus   infected, every test contains another infected -- includes isolated
struct VPartition {
  std::vector<std::uint32_t> v0_minus;
  std::vector<std::uint32_t> v0_plus;
  std::vector<std::uint32_t> v1_minus;
  std::vector<std::uint32_t> v1_plus;
};

/// Uniform weight-k infection vector. Deterministic given the stream state.
GroundTruth sample_ground_truth(std::size_t n, std::size_t k, SplitMix64& rng);

/// positive[a] = 1 iff some member of test a is infected; empty tests negative.
TestOutcomes evaluate_tests(const PoolingDesign& design, const GroundTruth& truth);

/// Classify every individual; throws ModelViolationError if outcomes are
/// inconsistent with (design, truth).
VPartition classify_vsets(const PoolingDesign& design, const GroundTruth& truth,
                          const TestOutcomes& outcomes);

/// ||tau - sigma||_1. Throws on length mismatch.
std::size_t hamming_distance(const Estimate& estimate, const GroundTruth& truth);

}  // namespace gtsim
