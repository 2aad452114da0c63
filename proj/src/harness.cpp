#include "gtsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gtsim/bounds.hpp"
#include "gtsim/designs.hpp"
#include "gtsim/errors.hpp"

namespace gtsim {

namespace {

using nlohmann::json;

struct GridPoint {
  double value = 0.0;            // as reported in the summary
  std::uint64_t budget = 0;      // aspiv stage-1 budget / one_stage m
  std::optional<std::uint64_t> group_size;  // dorfman
};

StageOneEstimator parse_estimator(const ExperimentConfig& cfg, std::uint64_t k, std::size_t n) {
  if (cfg.estimator == "comp") return StageOneEstimator::comp();
  if (cfg.estimator == "dd") return StageOneEstimator::dd();
  if (cfg.estimator == "scored_dd") return StageOneEstimator::scored_dd(cfg.threshold);
  if (cfg.estimator == "synthetic") {
    std::uint64_t budget = cfg.error_budget.value_or(static_cast<std::uint64_t>(
        std::floor(static_cast<double>(k) / std::log(static_cast<double>(std::max<std::size_t>(n, 2))))));
    return StageOneEstimator::synthetic(budget);
  }
  throw InvalidParameterError("unknown estimator '" + cfg.estimator +
                              "' (valid: comp, dd, scored_dd, synthetic)");
}

std::uint64_t resolved_k(const ExperimentConfig& cfg) {
  if (cfg.k) return *cfg.k;
  if (!cfg.theta) throw InvalidParameterError("config needs either theta or k");
  return k_from_theta(cfg.n, *cfg.theta);
}

std::vector<GridPoint> resolve_grid(const ExperimentConfig& cfg) {
  std::vector<GridPoint> grid;
  if (cfg.pipeline == "dorfman") {
    if (cfg.s_grid.empty()) {
      const std::uint64_t s = optimal_dorfman_group_size(cfg.n, resolved_k(cfg));
      grid.push_back({static_cast<double>(s), 0, s});
    } else {
      for (std::uint64_t s : cfg.s_grid) grid.push_back({static_cast<double>(s), 0, s});
    }
    return grid;
  }
  if (!cfg.m_grid.empty()) {
    for (std::uint64_t m : cfg.m_grid) grid.push_back({static_cast<double>(m), m, {}});
  } else {
    if (!cfg.theta)
      throw InvalidParameterError("m_factors requires theta to scale m_inf(n, theta)");
    const double base = m_inf(cfg.n, *cfg.theta);
    for (double f : cfg.m_factors) {
      const auto m = static_cast<std::uint64_t>(std::ceil(f * base));
      grid.push_back({static_cast<double>(m), m, {}});
    }
  }
  return grid;
}

TrialRecord run_trial(const ExperimentConfig& cfg, const GridPoint& point,
                      std::uint64_t global_index) {
  SplitMix64 rng(derive_trial_seed(cfg.master_seed, global_index));
  const std::uint64_t k = resolved_k(cfg);
  TrialRecord record;
  if (cfg.pipeline == "aspiv") {
    record = run_aspiv_k(cfg.n, k, cfg.theta, cfg.epsilon,
                         parse_estimator(cfg, k, cfg.n), point.budget, rng);
  } else if (cfg.pipeline == "dorfman") {
    record = run_dorfman_k(cfg.n, k, point.group_size, rng);
  } else {
    record = run_one_stage(cfg.n, k, cfg.theta, point.budget, parse_estimator(cfg, k, cfg.n), rng);
  }
  record.seed = derive_trial_seed(cfg.master_seed, global_index);
  return record;
}

unsigned worker_count(unsigned override_count, std::size_t total) {
  unsigned workers = override_count;
  if (workers == 0) {
    if (const char* env = std::getenv("GTSIM_MAX_WORKERS")) {
      const auto parsed = std::strtoul(env, nullptr, 10);
      if (parsed > 0) workers = static_cast<unsigned>(parsed);
    }
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(total, 1)));
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double se_of_mean(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output path for writing: " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot move output into place: " + ec.message());
}

/// Create-and-remove probe so an unwritable path fails before any compute,
/// without clobbering a previous output file.
void probe_writable(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output path for writing: " + tmp.string());
  }
  std::error_code ec;
  fs::remove(tmp, ec);
}

json record_to_json(const TrialRecord& r, std::uint64_t trial) {
  return json{{"trial", trial},
              {"n", r.n},
              {"theta", r.theta},
              {"k", r.k},
              {"pipeline", r.pipeline},
              {"estimator", r.estimator},
              {"stage1_tests", r.stage1_tests},
              {"stage2a_tests", r.stage2a_tests},
              {"stage2b_tests", r.stage2b_tests},
              {"total_tests", r.total_tests},
              {"stage1_error", r.stage1_error},
              {"v1tau_size", r.v1tau_size},
              {"kprime", r.kprime},
              {"success", r.success ? 1 : 0},
              {"seed", r.seed}};
}

}  // namespace

std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  // Counter-mode SplitMix64: output for state master_seed + (i+1)*gamma.
  std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ull * (trial_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double nd = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = (p + z2 / (2.0 * nd)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("pipeline")) cfg.pipeline = j.at("pipeline").get<std::string>();
    cfg.n = j.at("n").get<std::uint64_t>();
    if (j.contains("theta")) cfg.theta = j.at("theta").get<double>();
    if (j.contains("k")) cfg.k = j.at("k").get<std::uint64_t>();
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    if (j.contains("estimator")) cfg.estimator = j.at("estimator").get<std::string>();
    if (j.contains("threshold")) cfg.threshold = j.at("threshold").get<std::uint64_t>();
    if (j.contains("error_budget")) cfg.error_budget = j.at("error_budget").get<std::uint64_t>();
    if (j.contains("m_grid")) cfg.m_grid = j.at("m_grid").get<std::vector<std::uint64_t>>();
    if (j.contains("m_factors")) cfg.m_factors = j.at("m_factors").get<std::vector<double>>();
    if (j.contains("s_grid")) cfg.s_grid = j.at("s_grid").get<std::vector<std::uint64_t>>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<std::uint64_t>();
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("output_path")) cfg.output_path = j.at("output_path").get<std::string>();
    if (j.contains("output_format")) cfg.output_format = j.at("output_format").get<std::string>();
  } catch (const json::exception& e) {
    throw InvalidParameterError(std::string("bad config field: ") + e.what());
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (pipeline != "aspiv" && pipeline != "dorfman" && pipeline != "one_stage")
    throw InvalidParameterError("unknown pipeline '" + pipeline +
                                "' (valid: aspiv, dorfman, one_stage)");
  if (estimator != "comp" && estimator != "dd" && estimator != "scored_dd" &&
      estimator != "synthetic")
    throw InvalidParameterError("unknown estimator '" + estimator +
                                "' (valid: comp, dd, scored_dd, synthetic)");
  if (n == 0) throw InvalidParameterError("n must be >= 1");
  if (!theta && !k) throw InvalidParameterError("config needs either theta or k");
  if (theta && !(*theta > 0.0 && *theta < 1.0))
    throw InvalidParameterError("theta must lie in (0, 1)");
  if (trials < 1) throw InvalidParameterError("trials must be >= 1");
  if (pipeline == "dorfman") {
    for (std::uint64_t s : s_grid)
      if (s < 1) throw InvalidParameterError("group sizes must be >= 1");
  } else {
    if (m_grid.empty() && m_factors.empty())
      throw InvalidParameterError("config needs m_grid or m_factors");
    if (!m_grid.empty() && !m_factors.empty())
      throw InvalidParameterError("give m_grid or m_factors, not both");
    for (double f : m_factors)
      if (!(f > 0.0)) throw InvalidParameterError("budget multipliers must be > 0");
    for (std::uint64_t m : m_grid)
      if (m < 1) throw InvalidParameterError("budgets must be >= 1");
  }
  if (output_format != "csv" && output_format != "json")
    throw InvalidParameterError("unknown output_format '" + output_format +
                                "' (valid: csv, json)");
}

SweepResult run_sweep(const ExperimentConfig& config, unsigned worker_override) {
  config.validate();
  const std::vector<GridPoint> grid = resolve_grid(config);
  const std::size_t total = grid.size() * config.trials;

  // Fail on an unwritable output path before any compute.
  if (!config.output_path.empty()) probe_writable(config.output_path);

  SweepResult result;
  result.records.resize(total);

  const unsigned workers = worker_count(worker_override, total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        result.records[i] = run_trial(config, grid[i / config.trials], i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Single-threaded aggregation in trial order.
  double base_m_inf = std::nan("");
  double base_one_stage = std::nan("");
  double base_mezard = std::nan("");
  const std::uint64_t k = resolved_k(config);
  double theta = config.theta.value_or(
      (k >= 1 && config.n >= 2)
          ? std::log(static_cast<double>(k)) / std::log(static_cast<double>(config.n))
          : 0.0);
  if (theta > 0.0 && theta < 1.0 && config.n >= 2) {
    base_m_inf = m_inf(config.n, theta);
    base_one_stage = m_one_stage(config.n, theta);
    base_mezard = mezard_bound(config.n, theta);
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    GridPointSummary point;
    point.grid_value = grid[g].value;
    point.trials = config.trials;
    std::uint64_t successes = 0;
    std::vector<double> totals, errors;
    totals.reserve(config.trials);
    errors.reserve(config.trials);
    for (std::size_t t = 0; t < config.trials; ++t) {
      const TrialRecord& r = result.records[g * config.trials + t];
      successes += r.success ? 1 : 0;
      totals.push_back(static_cast<double>(r.total_tests));
      errors.push_back(static_cast<double>(r.stage1_error));
    }
    point.success_rate = static_cast<double>(successes) / static_cast<double>(config.trials);
    const WilsonInterval wi = wilson_interval(successes, config.trials);
    point.wilson_low = wi.low;
    point.wilson_high = wi.high;
    point.mean_total_tests = mean_of(totals);
    point.se_total_tests = se_of_mean(totals, point.mean_total_tests);
    point.mean_stage1_error = mean_of(errors);
    point.se_stage1_error = se_of_mean(errors, point.mean_stage1_error);
    point.m_inf = base_m_inf;
    point.m_one_stage = base_one_stage;
    point.m_mezard = base_mezard;
    result.summary.push_back(point);
  }

  if (!config.output_path.empty()) {
    const std::string content = config.output_format == "json"
                                    ? records_to_json(result.records, result.summary)
                                    : records_to_csv(result.records);
    write_file_atomic(config.output_path, content);
  }
  return result;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::string out =
      "trial,n,theta,k,pipeline,estimator,stage1_tests,stage2a_tests,stage2b_tests,"
      "total_tests,stage1_error,v1tau_size,kprime,success,seed\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TrialRecord& r = records[i];
    out += std::to_string(i);
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += format_double(r.theta);
    out += ',';
    out += std::to_string(r.k);
    out += ',';
    out += r.pipeline;
    out += ',';
    out += r.estimator;
    out += ',';
    out += std::to_string(r.stage1_tests);
    out += ',';
    out += std::to_string(r.stage2a_tests);
    out += ',';
    out += std::to_string(r.stage2b_tests);
    out += ',';
    out += std::to_string(r.total_tests);
    out += ',';
    out += std::to_string(r.stage1_error);
    out += ',';
    out += std::to_string(r.v1tau_size);
    out += ',';
    out += std::to_string(r.kprime);
    out += ',';
    out += r.success ? '1' : '0';
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

std::string records_to_json(const std::vector<TrialRecord>& records,
                            const std::vector<GridPointSummary>& summary) {
  json doc;
  doc["records"] = json::array();
  for (std::size_t i = 0; i < records.size(); ++i)
    doc["records"].push_back(record_to_json(records[i], i));
  doc["summary"] = json::array();
  for (const GridPointSummary& s : summary) {
    doc["summary"].push_back(json{{"grid_value", s.grid_value},
                                  {"trials", s.trials},
                                  {"success_rate", s.success_rate},
                                  {"wilson_low", s.wilson_low},
                                  {"wilson_high", s.wilson_high},
                                  {"mean_total_tests", s.mean_total_tests},
                                  {"se_total_tests", s.se_total_tests},
                                  {"mean_stage1_error", s.mean_stage1_error},
                                  {"se_stage1_error", s.se_stage1_error},
                                  {"m_inf", s.m_inf},
                                  {"m_one_stage", s.m_one_stage},
                                  {"m_mezard", s.m_mezard}});
  }
  return doc.dump(2) + "\n";
}

std::string summary_to_csv(const std::vector<GridPointSummary>& summary) {
  std::string out =
      "grid_value,trials,success_rate,wilson_low,wilson_high,mean_total_tests,"
      "se_total_tests,mean_stage1_error,se_stage1_error,m_inf,m_one_stage,m_mezard\n";
  for (const GridPointSummary& s : summary) {
    out += format_double(s.grid_value);
    out += ',';
    out += std::to_string(s.trials);
    out += ',';
    out += format_double(s.success_rate);
    out += ',';
    out += format_double(s.wilson_low);
    out += ',';
    out += format_double(s.wilson_high);
    out += ',';
    out += format_double(s.mean_total_tests);
    out += ',';
    out += format_double(s.se_total_tests);
    out += ',';
    out += format_double(s.mean_stage1_error);
    out += ',';
    out += format_double(s.se_stage1_error);
    out += ',';
    out += format_double(s.m_inf);
    out += ',';
    out += format_double(s.m_one_stage);
    out += ',';
    out += format_double(s.m_mezard);
    out += '\n';
  }
  return out;
}

}  // namespace gtsim
