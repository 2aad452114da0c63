#pragma once

#include <cstdint>

namespace gtsim {

/// Every closed-form test-count figure for one (n, theta), plus the exact
/// Dorfman optimum for scale.
struct BoundReport {
  std::uint64_t n = 0;
  double theta = 0.0;
  std::uint64_t k = 0;
  double m_inf = 0.0;
  double m_one_stage = 0.0;
  double m_mezard = 0.0;
  double m_counting = 0.0;
  std::uint64_t dorfman_group_size = 0;
  double m_dorfman_expected = 0.0;
};

/// ln C(n, k) via log-gamma; exact to double precision far past overflow.
/// Returns -inf when k > n.
double log_binomial(std::uint64_t n, std::uint64_t k);

/// Universal counting lower bound (1-theta)/ln2 * n^theta * ln n.
/// Natural logs throughout; the /ln2 carries the bit conversion.
double m_inf(std::uint64_t n, double theta);

/// One-stage floor max{(1-theta)/ln2, theta/ln^2 2} * n^theta * ln n.
/// Coincides with m_inf for theta <= ln2/(1+ln2), exceeds it above.
double m_one_stage(std::uint64_t n, double theta);

/// Two-stage floor for identify-then-test-individually schemes: m_inf / ln2.
double mezard_bound(std::uint64_t n, double theta);

/// log2 C(n, k): bits needed to index every weight-k configuration.
double counting_bound(std::uint64_t n, std::uint64_t k);

/// Exact expected total of the two-stage Dorfman scheme with the given group
/// size: groups + sum over groups of size * P(group positive), with the
/// hypergeometric positive probability 1 - C(n-s_j, k)/C(n, k) evaluated in
/// log space.
double dorfman_expected_tests(std::uint64_t n, std::uint64_t k, std::uint64_t group_size);

/// COMP budget ceil((1+eps) * k_upper * ln n / ln^2 2); 0 when k_upper == 0.
std::uint64_t comp_budget(std::uint64_t n, std::uint64_t k_upper, double epsilon);

BoundReport make_bound_report(std::uint64_t n, double theta);

}  // namespace gtsim
