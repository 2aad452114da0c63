#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gtsim/adaptive.hpp"
#include "gtsim/bounds.hpp"
#include "gtsim/decoders.hpp"
#include "gtsim/designs.hpp"
#include "gtsim/errors.hpp"
#include "gtsim/harness.hpp"
#include "gtsim/model.hpp"
#include "gtsim/rng.hpp"

namespace py = pybind11;
using namespace gtsim;

namespace {

std::optional<std::uint64_t> opt_u64(py::object value) {
  if (value.is_none()) return std::nullopt;
  return value.cast<std::uint64_t>();
}

std::optional<double> opt_double(py::object value) {
  if (value.is_none()) return std::nullopt;
  return value.cast<double>();
}

}  // namespace

PYBIND11_MODULE(gtsim, m) {
  m.doc() = "Pooled-testing simulation: designs, decoders, two-stage pipelines and bounds";

  py::register_exception<InvalidParameterError>(m, "InvalidParameterError", PyExc_ValueError);
  py::register_exception<ModelViolationError>(m, "ModelViolationError", PyExc_RuntimeError);
  py::register_exception<ResourceLimitError>(m, "ResourceLimitError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<SplitMix64>(m, "SplitMix64")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &SplitMix64::next_u64)
      .def("next_double", &SplitMix64::next_double)
      .def("below", &SplitMix64::below, py::arg("bound"));

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_static("from_support", &GroundTruth::from_support, py::arg("n"), py::arg("support"))
      .def_readonly("n", &GroundTruth::n)
      .def_readonly("infected", &GroundTruth::infected)
      .def_property_readonly("k", &GroundTruth::k)
      .def("is_infected", &GroundTruth::is_infected, py::arg("x"));

  py::class_<PoolingDesign>(m, "PoolingDesign")
      .def_static("from_test_lists", &PoolingDesign::from_test_lists, py::arg("n"),
                  py::arg("tests"))
      .def_property_readonly("n", &PoolingDesign::individual_count)
      .def_property_readonly("m", &PoolingDesign::test_count)
      .def_property_readonly("edge_count", &PoolingDesign::edge_count)
      .def_property_readonly("has_empty_tests", &PoolingDesign::has_empty_tests)
      .def("members",
           [](const PoolingDesign& d, std::uint32_t a) {
             auto s = d.members(a);
             return std::vector<std::uint32_t>(s.begin(), s.end());
           },
           py::arg("test"))
      .def("memberships",
           [](const PoolingDesign& d, std::uint32_t x) {
             auto s = d.memberships(x);
             return std::vector<std::uint32_t>(s.begin(), s.end());
           },
           py::arg("individual"));

  py::class_<TestOutcomes>(m, "TestOutcomes")
      .def_property_readonly("m", &TestOutcomes::test_count)
      .def_property_readonly("positive_count", &TestOutcomes::positive_count)
      .def("is_positive", [](const TestOutcomes& o, std::size_t a) { return o.positive.test(a); },
           py::arg("test"))
      .def("positives", [](const TestOutcomes& o) { return o.positive.ones(); });

  py::class_<Estimate>(m, "Estimate")
      .def_readonly("origin", &Estimate::origin)
      .def_property_readonly("n", &Estimate::size)
      .def("is_called", [](const Estimate& e, std::size_t x) { return e.calls.test(x); },
           py::arg("individual"))
      .def("calls", [](const Estimate& e) { return e.calls.ones(); });

  py::class_<VPartition>(m, "VPartition")
      .def_readonly("v0_minus", &VPartition::v0_minus)
      .def_readonly("v0_plus", &VPartition::v0_plus)
      .def_readonly("v1_minus", &VPartition::v1_minus)
      .def_readonly("v1_plus", &VPartition::v1_plus);

  py::class_<MarginalTable>(m, "MarginalTable")
      .def_readonly("marginal", &MarginalTable::marginal)
      .def_readonly("support_count", &MarginalTable::support_count);

  py::class_<StageOneEstimator>(m, "StageOneEstimator")
      .def_static("comp", &StageOneEstimator::comp)
      .def_static("dd", &StageOneEstimator::dd)
      .def_static("scored_dd", &StageOneEstimator::scored_dd, py::arg("threshold"))
      .def_static("synthetic", &StageOneEstimator::synthetic, py::arg("error_budget"))
      .def_property_readonly("name", &StageOneEstimator::name);

  py::class_<TrialRecord>(m, "TrialRecord")
      .def_readonly("pipeline", &TrialRecord::pipeline)
      .def_readonly("estimator", &TrialRecord::estimator)
      .def_readonly("n", &TrialRecord::n)
      .def_readonly("theta", &TrialRecord::theta)
      .def_readonly("k", &TrialRecord::k)
      .def_readonly("seed", &TrialRecord::seed)
      .def_readonly("stage1_tests", &TrialRecord::stage1_tests)
      .def_readonly("stage2a_tests", &TrialRecord::stage2a_tests)
      .def_readonly("stage2b_tests", &TrialRecord::stage2b_tests)
      .def_readonly("total_tests", &TrialRecord::total_tests)
      .def_readonly("stage1_error", &TrialRecord::stage1_error)
      .def_readonly("v1tau_size", &TrialRecord::v1tau_size)
      .def_readonly("kprime", &TrialRecord::kprime)
      .def_readonly("success", &TrialRecord::success)
      .def_readonly("wall_time_s", &TrialRecord::wall_time_s);

  py::class_<CorollaryCheck>(m, "CorollaryCheck")
      .def_readonly("name", &CorollaryCheck::name)
      .def_readonly("passed", &CorollaryCheck::passed);

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("n", &BoundReport::n)
      .def_readonly("theta", &BoundReport::theta)
      .def_readonly("k", &BoundReport::k)
      .def_readonly("m_inf", &BoundReport::m_inf)
      .def_readonly("m_one_stage", &BoundReport::m_one_stage)
      .def_readonly("m_mezard", &BoundReport::m_mezard)
      .def_readonly("m_counting", &BoundReport::m_counting)
      .def_readonly("dorfman_group_size", &BoundReport::dorfman_group_size)
      .def_readonly("m_dorfman_expected", &BoundReport::m_dorfman_expected);

  // core model
  m.def("k_from_theta", &k_from_theta, py::arg("n"), py::arg("theta"));
  m.def("sample_ground_truth", &sample_ground_truth, py::arg("n"), py::arg("k"), py::arg("rng"));
  m.def("evaluate_tests", &evaluate_tests, py::arg("design"), py::arg("truth"));
  m.def("classify_vsets", &classify_vsets, py::arg("design"), py::arg("truth"),
        py::arg("outcomes"));
  m.def("hamming_distance", &hamming_distance, py::arg("estimate"), py::arg("truth"));

  // designs
  m.def("tuned_delta", &tuned_delta, py::arg("m"), py::arg("k"));
  m.def("constant_column_design", &constant_column_design, py::arg("n"), py::arg("m"),
        py::arg("delta"), py::arg("rng"));
  m.def("bernoulli_design", &bernoulli_design, py::arg("n"), py::arg("m"), py::arg("p"),
        py::arg("rng"));
  m.def("dorfman_partition", &dorfman_partition, py::arg("n"), py::arg("group_size"));
  m.def("individual_design", &individual_design, py::arg("indices"), py::arg("n"));
  m.def("optimal_dorfman_group_size", &optimal_dorfman_group_size, py::arg("n"), py::arg("k"));

  // decoders
  m.def("comp_decode", &comp_decode, py::arg("design"), py::arg("outcomes"));
  m.def("dd_decode", &dd_decode, py::arg("design"), py::arg("outcomes"));
  m.def("scored_dd", &scored_dd, py::arg("design"), py::arg("outcomes"), py::arg("threshold"));
  m.def("unexplained_fraction", &unexplained_fraction, py::arg("design"), py::arg("truth"),
        py::arg("outcomes"), py::arg("x"));
  m.def("consistent_configurations", &consistent_configurations, py::arg("design"),
        py::arg("outcomes"), py::arg("k"), py::arg("candidate_cap") = kDefaultEnumerationCap);
  m.def("map_margins", &map_margins, py::arg("design"), py::arg("outcomes"), py::arg("k"),
        py::arg("candidate_cap") = kDefaultEnumerationCap);

  // bounds
  m.def("log_binomial", &log_binomial, py::arg("n"), py::arg("k"));
  m.def("m_inf", &m_inf, py::arg("n"), py::arg("theta"));
  m.def("m_one_stage", &m_one_stage, py::arg("n"), py::arg("theta"));
  m.def("mezard_bound", &mezard_bound, py::arg("n"), py::arg("theta"));
  m.def("counting_bound", &counting_bound, py::arg("n"), py::arg("k"));
  m.def("dorfman_expected_tests", &dorfman_expected_tests, py::arg("n"), py::arg("k"),
        py::arg("group_size"));
  m.def("comp_budget", &comp_budget, py::arg("n"), py::arg("k_upper"), py::arg("epsilon"));
  m.def("make_bound_report", &make_bound_report, py::arg("n"), py::arg("theta"));

  // pipelines
  m.def("run_aspiv", &run_aspiv, py::arg("n"), py::arg("theta"), py::arg("epsilon"),
        py::arg("estimator"), py::arg("stage1_budget"), py::arg("rng"));
  m.def(
      "run_aspiv_k",
      [](std::size_t n, std::size_t k, py::object theta, double epsilon,
         const StageOneEstimator& estimator, std::uint64_t stage1_budget, SplitMix64& rng) {
        return run_aspiv_k(n, k, opt_double(theta), epsilon, estimator, stage1_budget, rng);
      },
      py::arg("n"), py::arg("k"), py::arg("theta"), py::arg("epsilon"), py::arg("estimator"),
      py::arg("stage1_budget"), py::arg("rng"));
  m.def(
      "run_dorfman",
      [](std::size_t n, double theta, py::object group_size, SplitMix64& rng) {
        return run_dorfman(n, theta, opt_u64(group_size), rng);
      },
      py::arg("n"), py::arg("theta"), py::arg("group_size"), py::arg("rng"));
  m.def(
      "run_dorfman_k",
      [](std::size_t n, std::size_t k, py::object group_size, SplitMix64& rng) {
        return run_dorfman_k(n, k, opt_u64(group_size), rng);
      },
      py::arg("n"), py::arg("k"), py::arg("group_size"), py::arg("rng"));
  m.def(
      "run_one_stage",
      [](std::size_t n, std::size_t k, py::object theta, std::uint64_t m_tests,
         const StageOneEstimator& decoder, SplitMix64& rng) {
        return run_one_stage(n, k, opt_double(theta), m_tests, decoder, rng);
      },
      py::arg("n"), py::arg("k"), py::arg("theta"), py::arg("m"), py::arg("decoder"),
      py::arg("rng"));
  m.def("check_corollaries", &check_corollaries, py::arg("record"), py::arg("n"), py::arg("k"));

  // harness
  m.def("derive_trial_seed", &derive_trial_seed, py::arg("master_seed"), py::arg("trial_index"));
  m.def(
      "run_sweep_json",
      [](const std::string& config_text, unsigned workers) {
        const auto cfg = ExperimentConfig::from_json_text(config_text);
        const SweepResult result = run_sweep(cfg, workers);
        return records_to_json(result.records, result.summary);
      },
      py::arg("config_json"), py::arg("workers") = 0,
      "Run a sweep from a JSON config string; returns the records/summary JSON document");
}
