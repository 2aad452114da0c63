#include "gtsim/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gtsim/designs.hpp"
#include "gtsim/errors.hpp"
#include "gtsim/model.hpp"

namespace gtsim {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kLn2Sq = kLn2 * kLn2;

void require_theta_open_unit(double theta, const char* what) {
  if (!(theta > 0.0 && theta < 1.0))
    throw InvalidParameterError(std::string(what) + ": theta must lie in (0, 1)");
}

/// P(a group of size s contains at least one infected) for k infected among
/// n individuals: 1 - C(n-s, k)/C(n, k), in log space.
double group_positive_probability(std::uint64_t n, std::uint64_t k, std::uint64_t s) {
  if (k == 0) return 0.0;
  if (s + k > n) return 1.0;  // C(n-s, k) = 0
  const double log_ratio = log_binomial(n - s, k) - log_binomial(n, k);
  return -std::expm1(log_ratio);
}

}  // namespace

double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

double m_inf(std::uint64_t n, double theta) {
  require_theta_open_unit(theta, "m_inf");
  if (n < 2) throw InvalidParameterError("m_inf: n must be at least 2");
  const auto nd = static_cast<double>(n);
  return (1.0 - theta) / kLn2 * std::pow(nd, theta) * std::log(nd);
}

double m_one_stage(std::uint64_t n, double theta) {
  require_theta_open_unit(theta, "m_one_stage");
  if (n < 2) throw InvalidParameterError("m_one_stage: n must be at least 2");
  const auto nd = static_cast<double>(n);
  const double rate = std::max((1.0 - theta) / kLn2, theta / kLn2Sq);
  return rate * std::pow(nd, theta) * std::log(nd);
}

double mezard_bound(std::uint64_t n, double theta) { return m_inf(n, theta) / kLn2; }

double counting_bound(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw InvalidParameterError("counting_bound: k > n");
  return log_binomial(n, k) / kLn2;
}

double dorfman_expected_tests(std::uint64_t n, std::uint64_t k, std::uint64_t group_size) {
  if (group_size < 1 || group_size > n)
    throw InvalidParameterError("dorfman_expected_tests: group_size outside [1, n]");
  if (k > n) throw InvalidParameterError("dorfman_expected_tests: k > n");
  const std::uint64_t groups = (n + group_size - 1) / group_size;
  const std::uint64_t remainder = n % group_size;
  const std::uint64_t full = remainder == 0 ? groups : groups - 1;

  double expected = static_cast<double>(groups);
  expected += static_cast<double>(full) * static_cast<double>(group_size) *
              group_positive_probability(n, k, group_size);
  if (remainder > 0)
    expected += static_cast<double>(remainder) * group_positive_probability(n, k, remainder);
  return expected;
}

std::uint64_t comp_budget(std::uint64_t n, std::uint64_t k_upper, double epsilon) {
  if (epsilon < 0.0) throw InvalidParameterError("comp_budget: epsilon must be >= 0");
  if (k_upper == 0) return 0;
  const double value = (1.0 + epsilon) * static_cast<double>(k_upper) *
                       std::log(static_cast<double>(n)) / kLn2Sq;
  return static_cast<std::uint64_t>(std::ceil(value));
}

BoundReport make_bound_report(std::uint64_t n, double theta) {
  BoundReport report;
  report.n = n;
  report.theta = theta;
  report.k = k_from_theta(n, theta);
  report.m_inf = m_inf(n, theta);
  report.m_one_stage = m_one_stage(n, theta);
  report.m_mezard = mezard_bound(n, theta);
  report.m_counting = counting_bound(n, report.k);
  report.dorfman_group_size = optimal_dorfman_group_size(n, report.k);
  report.m_dorfman_expected = dorfman_expected_tests(n, report.k, report.dorfman_group_size);
  return report;
}

}  // namespace gtsim
