#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gtsim/model.hpp"
#include "gtsim/rng.hpp"

namespace gtsim {

/// Stage-1 strategy for the two-stage pipeline. The real decoders read the
/// stage-1 outcomes; the synthetic estimator instead plants a controlled
/// number of errors directly into sigma, charging the stage-1 budget without
/// reading outcomes. It stands in for any estimator meeting the
/// small-Hamming-error contract and exercises both downstream paths.
struct StageOneEstimator {
  enum class Kind { Comp, Dd, ScoredDd, Synthetic };

  Kind kind = Kind::Dd;
  std::uint64_t threshold = 1;     // ScoredDd only
  std::uint64_t error_budget = 0;  // Synthetic only

  static StageOneEstimator comp() { return {Kind::Comp, 1, 0}; }
  static StageOneEstimator dd() { return {Kind::Dd, 1, 0}; }
  static StageOneEstimator scored_dd(std::uint64_t t) { return {Kind::ScoredDd, t, 0}; }
  static StageOneEstimator synthetic(std::uint64_t e) { return {Kind::Synthetic, 1, e}; }

  std::string name() const;
};

/// One pipeline run. total_tests = stage1 + stage2a + stage2b always;
/// stage2a_tests equals v1tau_size (one individual test per stage-1 call).
struct TrialRecord {
  std::string pipeline;
  std::string estimator;
  std::uint64_t n = 0;
  double theta = 0.0;
  std::uint64_t k = 0;
  std::uint64_t seed = 0;
  std::uint64_t stage1_tests = 0;
  std::uint64_t stage2a_tests = 0;
  std::uint64_t stage2b_tests = 0;
  std::uint64_t total_tests = 0;
  std::uint64_t stage1_error = 0;  // ||tau - sigma||_1 after stage 1
  std::uint64_t v1tau_size = 0;    // |V1(tau)| after stage 1
  std::uint64_t kprime = 0;        // infected left in V0(tau)
  bool success = false;            // exact recovery of sigma
  double wall_time_s = 0.0;
};

struct CorollaryCheck {
  std::string name;
  bool passed = false;
};

/// Two-stage pipeline: stage 1 estimates tau on a tuned constant-column
/// design; stage 2a tests V1(tau) individually; stage 2b runs COMP over
/// V0(tau) with budget ceil((1+eps) k / ln^2 2) and a column weight tuned
/// against the k/ln n carry-over bound. Both stage-2 parts use disjoint
/// fresh tests, so the whole scheme stays two-stage.
TrialRecord run_aspiv(std::size_t n, double theta, double epsilon,
                      const StageOneEstimator& estimator, std::uint64_t stage1_budget,
                      SplitMix64& rng);

/// Same pipeline with an explicit k instead of k = round(n^theta).
TrialRecord run_aspiv_k(std::size_t n, std::size_t k, std::optional<double> theta,
                        double epsilon, const StageOneEstimator& estimator,
                        std::uint64_t stage1_budget, SplitMix64& rng);

/// Classic two-stage Dorfman scheme: partition into groups, then test every
/// member of every positive group individually. Always exact.
/// group_size == nullopt selects the exact-expectation optimum.
TrialRecord run_dorfman(std::size_t n, double theta, std::optional<std::uint64_t> group_size,
                        SplitMix64& rng);

TrialRecord run_dorfman_k(std::size_t n, std::size_t k, std::optional<std::uint64_t> group_size,
                          SplitMix64& rng);

/// Single-stage run: tuned constant-column design with m tests, one decoder
/// pass, success iff exact recovery. The estimator must be a real decoder.
TrialRecord run_one_stage(std::size_t n, std::size_t k, std::optional<double> theta,
                          std::uint64_t m, const StageOneEstimator& decoder, SplitMix64& rng);

/// Post-run contract checks on a two-stage record:
///   v1tau_within_bound:  v1tau_size <= k + ceil(k / ln n)
///   kprime_within_bound: kprime <= ceil(k / ln n)
/// Violations mark the estimator as outside its contract for that run; they
/// are reported, never fatal.
std::vector<CorollaryCheck> check_corollaries(const TrialRecord& record, std::size_t n,
                                              std::size_t k);

}  // namespace gtsim
