#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gtsim/adaptive.hpp"

namespace gtsim {

/// One sweep: a pipeline, a parameter grid, and a trial count per grid
/// point. Exactly one of m_grid / m_factors may be set for aspiv and
/// one_stage (m_factors scales m_inf(n, theta)); dorfman uses s_grid or,
/// when empty, the exact-expectation optimum.
struct ExperimentConfig {
  std::string pipeline = "aspiv";  // aspiv | dorfman | one_stage
  std::uint64_t n = 0;
  std::optional<double> theta;
  std::optional<std::uint64_t> k;  // overrides theta-derived k when set
  double epsilon = 0.2;

  std::string estimator = "dd";  // comp | dd | scored_dd | synthetic
  std::uint64_t threshold = 1;
  std::optional<std::uint64_t> error_budget;  // synthetic; default floor(k/ln n)

  std::vector<std::uint64_t> m_grid;
  std::vector<double> m_factors;
  std::vector<std::uint64_t> s_grid;

  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  std::string output_path;           // empty: no file written
  std::string output_format = "csv"; // csv | json

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  void validate() const;
};

/// Aggregates for one grid point. Success rates carry a 95% Wilson interval;
/// means carry the standard error of the mean.
struct GridPointSummary {
  double grid_value = 0.0;  // resolved stage-1 budget / m / group size
  std::uint64_t trials = 0;
  double success_rate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  double mean_total_tests = 0.0;
  double se_total_tests = 0.0;
  double mean_stage1_error = 0.0;
  double se_stage1_error = 0.0;
  double m_inf = 0.0;
  double m_one_stage = 0.0;
  double m_mezard = 0.0;
};

struct SweepResult {
  std::vector<TrialRecord> records;        // ordered by global trial index
  std::vector<GridPointSummary> summary;   // ordered by grid point
};

/// Seed for trial i of a sweep: the (i+1)-th output of a SplitMix64 stream
/// seeded with master_seed. A bijection of the counter, so distinct indices
/// never collide for a fixed master seed; stable across platforms.
std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index);

struct WilsonInterval {
  double low = 0.0;
  double high = 0.0;
};

/// 95% score interval by default; well-behaved at rates near 0 and 1.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                               double z = 1.959963984540054);

/// Runs trials over the grid (parallel across trials), aggregates, and
/// writes the output file atomically when output_path is set. Results are
/// deterministic in (config, master_seed) regardless of worker count.
/// worker_override 0 reads GTSIM_MAX_WORKERS, falling back to the hardware
/// concurrency.
SweepResult run_sweep(const ExperimentConfig& config, unsigned worker_override = 0);

/// Fixed record schema:
/// trial,n,theta,k,pipeline,estimator,stage1_tests,stage2a_tests,
/// stage2b_tests,total_tests,stage1_error,v1tau_size,kprime,success,seed
std::string records_to_csv(const std::vector<TrialRecord>& records);

std::string records_to_json(const std::vector<TrialRecord>& records,
                            const std::vector<GridPointSummary>& summary);

std::string summary_to_csv(const std::vector<GridPointSummary>& summary);

/// Shortest round-trip decimal form (std::to_chars); locale-independent.
std::string format_double(double value);

}  // namespace gtsim
