#include "gtsim/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "gtsim/bounds.hpp"
#include "gtsim/decoders.hpp"
#include "gtsim/designs.hpp"
#include "gtsim/errors.hpp"

namespace gtsim {

namespace {

constexpr double kLn2Sq = std::numbers::ln2 * std::numbers::ln2;

using Clock = std::chrono::steady_clock;

double implied_theta(std::size_t n, std::size_t k) {
  if (n < 2 || k == 0) return 0.0;
  return std::log(static_cast<double>(k)) / std::log(static_cast<double>(n));
}

std::uint64_t kprime_upper_bound(std::size_t n, std::size_t k) {
  return static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(k) / std::log(static_cast<double>(n))));
}

/// Plants min(budget, n) wrong calls into sigma, split as evenly as possible
/// between missed infecteds and false alarms (the contract bounds only the
/// total, so both downstream paths get exercised). Missed infecteds take the
/// odd error.
Estimate synthetic_estimate(const GroundTruth& truth, std::uint64_t budget, SplitMix64& rng) {
  const std::size_t n = truth.n;
  const std::size_t k = truth.k();
  const std::uint64_t total = std::min<std::uint64_t>(budget, n);
  std::uint64_t misses = std::min<std::uint64_t>((total + 1) / 2, k);
  std::uint64_t alarms = std::min<std::uint64_t>(total - misses, n - k);
  misses = std::min<std::uint64_t>(total - alarms, k);

  Estimate estimate{truth.mask, "synthetic(" + std::to_string(budget) + ")"};
  for (std::uint32_t i : sample_sorted_subset(k, misses, rng))
    estimate.calls.reset(truth.infected[i]);
  // False alarms by rejection over the healthy majority; duplicates and
  // infected draws are skipped without counting.
  std::uint64_t planted = 0;
  while (planted < alarms) {
    const auto x = static_cast<std::uint32_t>(rng.below(n));
    if (truth.is_infected(x) || estimate.calls.test(x)) continue;
    estimate.calls.set(x);
    ++planted;
  }
  return estimate;
}

}  // namespace

std::string StageOneEstimator::name() const {
  switch (kind) {
    case Kind::Comp: return "comp";
    case Kind::Dd: return "dd";
    case Kind::ScoredDd: return "scored_dd(" + std::to_string(threshold) + ")";
    case Kind::Synthetic: return "synthetic(" + std::to_string(error_budget) + ")";
  }
  return "unknown";
}

TrialRecord run_aspiv(std::size_t n, double theta, double epsilon,
                      const StageOneEstimator& estimator, std::uint64_t stage1_budget,
                      SplitMix64& rng) {
  return run_aspiv_k(n, k_from_theta(n, theta), theta, epsilon, estimator, stage1_budget, rng);
}

TrialRecord run_aspiv_k(std::size_t n, std::size_t k, std::optional<double> theta,
                        double epsilon, const StageOneEstimator& estimator,
                        std::uint64_t stage1_budget, SplitMix64& rng) {
  if (n < 2) throw InvalidParameterError("run_aspiv: n must be at least 2");
  if (k > n) throw InvalidParameterError("run_aspiv: k > n");
  if (!(epsilon > 0.0)) throw InvalidParameterError("run_aspiv: epsilon must be > 0");
  if (stage1_budget < 1) throw InvalidParameterError("run_aspiv: stage1_budget must be >= 1");

  const auto t_start = Clock::now();
  TrialRecord record;
  record.pipeline = "aspiv";
  record.estimator = estimator.name();
  record.n = n;
  record.theta = theta.value_or(implied_theta(n, k));
  record.k = k;
  record.stage1_tests = stage1_budget;

  const GroundTruth truth = sample_ground_truth(n, k, rng);

  // Stage 1: estimate tau. The synthetic estimator only charges the budget;
  // the decoders read outcomes of a tuned constant-column design.
  Estimate tau;
  if (estimator.kind == StageOneEstimator::Kind::Synthetic) {
    tau = synthetic_estimate(truth, estimator.error_budget, rng);
  } else {
    const std::uint64_t delta = tuned_delta(stage1_budget, k);
    const PoolingDesign design = constant_column_design(n, stage1_budget, delta, rng);
    const TestOutcomes outcomes = evaluate_tests(design, truth);
    switch (estimator.kind) {
      case StageOneEstimator::Kind::Comp: tau = comp_decode(design, outcomes); break;
      case StageOneEstimator::Kind::Dd: tau = dd_decode(design, outcomes); break;
      case StageOneEstimator::Kind::ScoredDd:
        tau = scored_dd(design, outcomes, estimator.threshold);
        break;
      case StageOneEstimator::Kind::Synthetic: break;  // handled above
    }
  }
  record.stage1_error = hamming_distance(tau, truth);

  // Stage 2a: individual tests over V1(tau); those coordinates become exact.
  const std::vector<std::uint32_t> v1tau = tau.calls.ones();
  record.v1tau_size = v1tau.size();
  record.stage2a_tests = v1tau.size();
  BitVec final_calls = tau.calls;
  {
    const PoolingDesign design_2a = individual_design(v1tau, n);
    const TestOutcomes outcomes_2a = evaluate_tests(design_2a, truth);
    for (std::size_t i = 0; i < v1tau.size(); ++i)
      final_calls.set(v1tau[i], outcomes_2a.positive.test(i));
  }

  // Stage 2b: COMP over V0(tau) as a fresh sub-instance, budgeted for the
  // carried-over infecteds bound k/ln n rather than the unseen true count.
  const std::size_t n_sub = n - v1tau.size();
  std::uint64_t kprime = 0;
  for (std::uint32_t x : truth.infected)
    if (!tau.calls.test(x)) ++kprime;
  record.kprime = kprime;

  bool comp_overflow = false;
  if (n_sub > 0 && k > 0) {
    const auto m0 = static_cast<std::uint64_t>(
        std::ceil((1.0 + epsilon) * static_cast<double>(k) / kLn2Sq));
    record.stage2b_tests = m0;

    std::vector<std::uint32_t> v0tau;
    v0tau.reserve(n_sub);
    for (std::size_t x = 0; x < n; ++x)
      if (!tau.calls.test(x)) v0tau.push_back(static_cast<std::uint32_t>(x));

    std::vector<std::uint32_t> sub_support;
    sub_support.reserve(kprime);
    for (std::size_t i = 0; i < v0tau.size(); ++i)
      if (truth.is_infected(v0tau[i])) sub_support.push_back(static_cast<std::uint32_t>(i));
    const GroundTruth sub_truth = GroundTruth::from_support(n_sub, std::move(sub_support));

    const std::uint64_t delta =
        tuned_delta(m0, std::max<std::uint64_t>(1, kprime_upper_bound(n, k)));
    const PoolingDesign design_2b = constant_column_design(n_sub, m0, delta, rng);
    const TestOutcomes outcomes_2b = evaluate_tests(design_2b, sub_truth);
    const Estimate comp = comp_decode(design_2b, outcomes_2b);

    const std::size_t comp_calls = comp.calls.count();
    comp_overflow = static_cast<double>(comp_calls) >
                    static_cast<double>(k) * (1.0 + std::log(static_cast<double>(n)));
    for (std::size_t i = 0; i < v0tau.size(); ++i)
      final_calls.set(v0tau[i], comp.calls.test(i));
  }

  record.total_tests = record.stage1_tests + record.stage2a_tests + record.stage2b_tests;
  record.success = !comp_overflow && final_calls == truth.mask;
  record.wall_time_s = std::chrono::duration<double>(Clock::now() - t_start).count();
  return record;
}

TrialRecord run_dorfman(std::size_t n, double theta, std::optional<std::uint64_t> group_size,
                        SplitMix64& rng) {
  return run_dorfman_k(n, k_from_theta(n, theta), group_size, rng);
}

TrialRecord run_dorfman_k(std::size_t n, std::size_t k, std::optional<std::uint64_t> group_size,
                          SplitMix64& rng) {
  if (n == 0) throw InvalidParameterError("run_dorfman: n must be >= 1");
  if (k > n) throw InvalidParameterError("run_dorfman: k > n");

  const auto t_start = Clock::now();
  const std::uint64_t s = group_size.value_or(optimal_dorfman_group_size(n, k));

  TrialRecord record;
  record.pipeline = "dorfman";
  record.estimator = "none";
  record.n = n;
  record.theta = implied_theta(n, k);
  record.k = k;

  const GroundTruth truth = sample_ground_truth(n, k, rng);
  const PoolingDesign partition = dorfman_partition(n, s);
  const TestOutcomes outcomes = evaluate_tests(partition, truth);
  record.stage1_tests = partition.test_count();

  // Stage-1 estimate for the record: everyone in a positive group.
  Estimate tau{BitVec(n), "dorfman_stage1"};
  std::vector<std::uint32_t> retest;
  for (std::size_t a = 0; a < partition.test_count(); ++a)
    if (outcomes.positive.test(a))
      for (std::uint32_t x : partition.members(static_cast<std::uint32_t>(a))) {
        tau.calls.set(x);
        retest.push_back(x);
      }
  record.stage1_error = hamming_distance(tau, truth);
  record.v1tau_size = retest.size();
  record.stage2a_tests = retest.size();

  // Stage 2: individual tests resolve every member of a positive group; the
  // rest are exonerated by their group's negative result.
  BitVec final_calls(n);
  {
    const PoolingDesign design_2 = individual_design(retest, n);
    const TestOutcomes outcomes_2 = evaluate_tests(design_2, truth);
    for (std::size_t i = 0; i < retest.size(); ++i)
      final_calls.set(retest[i], outcomes_2.positive.test(i));
  }

  record.stage2b_tests = 0;
  record.kprime = 0;
  record.total_tests = record.stage1_tests + record.stage2a_tests;
  record.success = final_calls == truth.mask;
  record.wall_time_s = std::chrono::duration<double>(Clock::now() - t_start).count();
  return record;
}

TrialRecord run_one_stage(std::size_t n, std::size_t k, std::optional<double> theta,
                          std::uint64_t m, const StageOneEstimator& decoder, SplitMix64& rng) {
  if (decoder.kind == StageOneEstimator::Kind::Synthetic)
    throw InvalidParameterError(
        "run_one_stage: decoder must be one of comp, dd, scored_dd");
  if (n == 0) throw InvalidParameterError("run_one_stage: n must be >= 1");
  if (k > n) throw InvalidParameterError("run_one_stage: k > n");

  const auto t_start = Clock::now();
  TrialRecord record;
  record.pipeline = "one_stage";
  record.estimator = decoder.name();
  record.n = n;
  record.theta = theta.value_or(implied_theta(n, k));
  record.k = k;
  record.stage1_tests = m;

  const GroundTruth truth = sample_ground_truth(n, k, rng);
  const PoolingDesign design = constant_column_design(n, m, tuned_delta(m, k), rng);
  const TestOutcomes outcomes = evaluate_tests(design, truth);

  Estimate tau;
  switch (decoder.kind) {
    case StageOneEstimator::Kind::Comp: tau = comp_decode(design, outcomes); break;
    case StageOneEstimator::Kind::Dd: tau = dd_decode(design, outcomes); break;
    case StageOneEstimator::Kind::ScoredDd:
      tau = scored_dd(design, outcomes, decoder.threshold);
      break;
    case StageOneEstimator::Kind::Synthetic: break;  // rejected above
  }

  record.stage1_error = hamming_distance(tau, truth);
  record.v1tau_size = tau.calls.count();
  std::uint64_t missed = 0;
  for (std::uint32_t x : truth.infected)
    if (!tau.calls.test(x)) ++missed;
  record.kprime = missed;
  record.total_tests = m;
  record.success = tau.calls == truth.mask;
  record.wall_time_s = std::chrono::duration<double>(Clock::now() - t_start).count();
  return record;
}

std::vector<CorollaryCheck> check_corollaries(const TrialRecord& record, std::size_t n,
                                              std::size_t k) {
  const std::uint64_t carry_bound = n >= 2 ? kprime_upper_bound(n, k) : k;
  return {
      {"v1tau_within_bound", record.v1tau_size <= k + carry_bound},
      {"kprime_within_bound", record.kprime <= carry_bound},
  };
}

}  // namespace gtsim
