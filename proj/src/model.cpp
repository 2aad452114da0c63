#include "gtsim/model.hpp"

#include <algorithm>
#include <cmath>

namespace gtsim {

GroundTruth GroundTruth::from_support(std::size_t n, std::vector<std::uint32_t> support) {
  std::sort(support.begin(), support.end());
  if (std::adjacent_find(support.begin(), support.end()) != support.end())
    throw InvalidParameterError("GroundTruth: duplicate indices in support");
  if (!support.empty() && support.back() >= n)
    throw InvalidParameterError("GroundTruth: index out of range");
  GroundTruth truth;
  truth.n = n;
  truth.mask = BitVec(n);
  for (std::uint32_t x : support) truth.mask.set(x);
  truth.infected = std::move(support);
  return truth;
}

std::size_t k_from_theta(std::size_t n, double theta) {
  if (n < 2) throw InvalidParameterError("k_from_theta: n must be at least 2");
  if (!(theta > 0.0 && theta < 1.0))
    throw InvalidParameterError("k_from_theta: theta must lie in (0, 1)");
  const double raw = std::pow(static_cast<double>(n), theta);
  auto k = static_cast<std::uint64_t>(std::llround(raw));
  k = std::max<std::uint64_t>(k, 1);
  k = std::min<std::uint64_t>(k, n - 1);
  return k;
}

PoolingDesign PoolingDesign::from_test_lists(std::size_t n,
                                             std::vector<std::vector<std::uint32_t>> tests) {
  PoolingDesign d;
  d.n_ = n;
  d.m_ = tests.size();
  d.test_off_.assign(1, 0);
  d.test_off_.reserve(tests.size() + 1);
  for (auto& row : tests) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    if (!row.empty() && row.back() >= n)
      throw InvalidParameterError("PoolingDesign: individual index out of range");
    d.test_data_.insert(d.test_data_.end(), row.begin(), row.end());
    d.test_off_.push_back(d.test_data_.size());
    if (row.empty()) d.has_empty_tests_ = true;
  }

  // Counting-sort transpose: membership rows come out sorted because tests
  // are visited in increasing order.
  std::vector<std::uint64_t> deg(n, 0);
  for (std::uint32_t x : d.test_data_) ++deg[x];
  d.memb_off_.assign(n + 1, 0);
  for (std::size_t x = 0; x < n; ++x) d.memb_off_[x + 1] = d.memb_off_[x] + deg[x];
  d.memb_data_.resize(d.test_data_.size());
  std::vector<std::uint64_t> cursor(d.memb_off_.begin(), d.memb_off_.end() - 1);
  for (std::size_t a = 0; a < d.m_; ++a)
    for (std::uint32_t x : d.members(static_cast<std::uint32_t>(a)))
      d.memb_data_[cursor[x]++] = static_cast<std::uint32_t>(a);
  return d;
}

PoolingDesign PoolingDesign::from_memberships(
    std::size_t n, std::size_t m, std::vector<std::vector<std::uint32_t>> memberships) {
  if (memberships.size() != n)
    throw InvalidParameterError("PoolingDesign: need one membership list per individual");
  std::vector<std::uint64_t> offsets(1, 0);
  offsets.reserve(n + 1);
  std::vector<std::uint32_t> data;
  for (auto& row : memberships) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    data.insert(data.end(), row.begin(), row.end());
    offsets.push_back(data.size());
  }
  return from_sorted_flat_memberships(n, m, std::move(offsets), std::move(data));
}

PoolingDesign PoolingDesign::from_sorted_flat_memberships(std::size_t n, std::size_t m,
                                                          std::vector<std::uint64_t> offsets,
                                                          std::vector<std::uint32_t> data) {
  if (offsets.size() != n + 1 || offsets.front() != 0 || offsets.back() != data.size())
    throw InvalidParameterError("PoolingDesign: malformed membership offsets");
  for (std::uint32_t a : data)
    if (a >= m) throw InvalidParameterError("PoolingDesign: test index out of range");
  PoolingDesign d;
  d.n_ = n;
  d.m_ = m;
  d.memb_off_ = std::move(offsets);
  d.memb_data_ = std::move(data);
  d.build_test_side_from_memberships();
  return d;
}

void PoolingDesign::build_test_side_from_memberships() {
  std::vector<std::uint64_t> size(m_, 0);
  for (std::uint32_t a : memb_data_) ++size[a];
  test_off_.assign(m_ + 1, 0);
  for (std::size_t a = 0; a < m_; ++a) test_off_[a + 1] = test_off_[a] + size[a];
  test_data_.resize(memb_data_.size());
  std::vector<std::uint64_t> cursor(test_off_.begin(), test_off_.end() - 1);
  for (std::size_t x = 0; x < n_; ++x)
    for (std::uint32_t a : memberships(static_cast<std::uint32_t>(x)))
      test_data_[cursor[a]] = static_cast<std::uint32_t>(x), ++cursor[a];
  has_empty_tests_ = false;
  for (std::size_t a = 0; a < m_; ++a)
    if (test_off_[a + 1] == test_off_[a]) {
      has_empty_tests_ = true;
      break;
    }
}

GroundTruth sample_ground_truth(std::size_t n, std::size_t k, SplitMix64& rng) {
  if (k > n) throw InvalidParameterError("sample_ground_truth: k > n");
  GroundTruth truth;
  truth.n = n;
  truth.infected = sample_sorted_subset(n, k, rng);
  truth.mask = BitVec(n);
  for (std::uint32_t x : truth.infected) truth.mask.set(x);
  return truth;
}

TestOutcomes evaluate_tests(const PoolingDesign& design, const GroundTruth& truth) {
  if (design.individual_count() != truth.n)
    throw InvalidParameterError("evaluate_tests: design and truth population sizes differ");
  TestOutcomes outcomes{BitVec(design.test_count())};
  for (std::uint32_t x : truth.infected)
    for (std::uint32_t a : design.memberships(x)) outcomes.positive.set(a);
  return outcomes;
}

VPartition classify_vsets(const PoolingDesign& design, const GroundTruth& truth,
                          const TestOutcomes& outcomes) {
  if (design.individual_count() != truth.n)
    throw InvalidParameterError("classify_vsets: design and truth population sizes differ");
  if (outcomes.test_count() != design.test_count())
    throw InvalidParameterError("classify_vsets: outcome length does not match test count");

  const std::size_t m = design.test_count();
  std::vector<std::uint32_t> infected_in_test(m, 0);
  for (std::uint32_t x : truth.infected)
    for (std::uint32_t a : design.memberships(x)) ++infected_in_test[a];
  for (std::size_t a = 0; a < m; ++a) {
    const bool should_be_positive = infected_in_test[a] > 0;
    if (outcomes.positive.test(a) != should_be_positive)
      throw ModelViolationError(should_be_positive
                                    ? "classify_vsets: negative test contains an infected member"
                                    : "classify_vsets: positive test contains no infected member");
  }

  VPartition parts;
  for (std::size_t xi = 0; xi < truth.n; ++xi) {
    const auto x = static_cast<std::uint32_t>(xi);
    const auto tests = design.memberships(x);
    if (truth.is_infected(x)) {
      bool alone_somewhere = false;
      for (std::uint32_t a : tests)
        if (infected_in_test[a] == 1) {
          alone_somewhere = true;
          break;
        }
      (alone_somewhere ? parts.v1_minus : parts.v1_plus).push_back(x);
    } else {
      bool negative_somewhere = false;
      for (std::uint32_t a : tests)
        if (!outcomes.positive.test(a)) {
          negative_somewhere = true;
          break;
        }
      (negative_somewhere ? parts.v0_minus : parts.v0_plus).push_back(x);
    }
  }
  return parts;
}

std::size_t hamming_distance(const Estimate& estimate, const GroundTruth& truth) {
  if (estimate.calls.size() != truth.n)
    throw InvalidParameterError("hamming_distance: length mismatch");
  return BitVec::hamming(estimate.calls, truth.mask);
}

}  // namespace gtsim
