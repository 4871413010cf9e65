#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pricing/config.hpp"
#include "pricing/policies.hpp"
#include "pricing/solver.hpp"
#include "pricing/synthetic.hpp"

namespace pricing {

/// hinge_cv, quantile_cv, eps_cv: cross-validated convex losses.
/// hinge, quantile, eps: fixed-parameter convex losses.
/// dm_logistic, dm_kernel: direct method; kernel_ipw; model_free.
struct LearnerSpec {
  std::string name;
  std::string kind;
  double param = 0.0;  // c or tau for fixed hinge / quantile
  std::optional<double> c1, c2;
  double bandwidth = 0.2;
  std::vector<double> grid;  // optional custom CV grid (hinge / quantile)
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<Scenario> scenarios;
  std::vector<LearnerSpec> learners;
  std::vector<std::size_t> n_grid;
  int replications = 1;
  std::uint64_t base_seed = 0;
  std::filesystem::path output_dir = "results";
  std::size_t test_size = 10000;
  std::size_t oracle_n = 10000;
  double theta0 = 0.5;
  SolverConfig convex;  // fit_convex settings
  SolverConfig search;  // pattern search settings for non-convex learners
  SolverConfig oracle;  // pattern search settings for the oracle
  DemandKind cv_demand = DemandKind::kernel;
  std::size_t cv_max_eval_points = 0;
  double cv_holdout = 0.0;
  bool timing = false;
};

ExperimentConfig parse_experiment_config(const Config& cfg);

struct ResultRow {
  std::size_t scenario_index = 0, learner_index = 0, n_index = 0;
  std::string scenario, learner;
  std::size_t n = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  double distance = 0.0, revenue = 0.0, revenue_se = 0.0;
  double fit_seconds = 0.0;
  std::string status = "ok";
  std::string detail;
};

struct SummaryRow {
  std::string scenario, learner;
  std::size_t n = 0;
  int reps = 0, failures = 0;
  double distance_mean = 0.0, distance_se = 0.0;
  double revenue_mean = 0.0, revenue_se = 0.0;
};

struct ExperimentResults {
  std::vector<ResultRow> rows;  // canonical order: scenario, learner, n, rep
  std::vector<SummaryRow> summary;
};

/// Seed of the dataset for (scenario, n, rep); shared by all learners so they are compared on identical data.
std::uint64_t data_seed(std::uint64_t base, std::size_t scenario_index, std::size_t n, int rep);
/// Seed of one learner's randomized search on that dataset.
std::uint64_t learner_seed(std::uint64_t data_seed, std::size_t learner_index);

using ProgressFn = std::function<void(const std::string&)>;
ExperimentResults run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

inline constexpr const char* kResultsSchema = "pricing-results/1";
void write_results_csv(const std::vector<ResultRow>& rows, bool timing, std::ostream& out);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);

}  // namespace pricing
