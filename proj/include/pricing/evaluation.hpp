#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "pricing/core.hpp"
#include "pricing/policies.hpp"
#include "pricing/synthetic.hpp"

namespace pricing {

struct RevenueEstimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Monte-Carlo over fresh features of pi(x) P(V >= pi(x) | x), using the
/// closed-form conditional survival of the scenario.
RevenueEstimate true_expected_revenue(const LinearPolicy& policy, const ScenarioInstance& inst, std::size_t n_mc,
                                      std::uint64_t seed);
/// Same, over the given row-major features.
RevenueEstimate true_expected_revenue(const LinearPolicy& policy, const ScenarioInstance& inst,
                                      std::span<const double> features);

/// (1/n) sum pi(x_i) f_eval(x_i, pi(x_i)) over eval_data's features.
double model_based_revenue(const LinearPolicy& policy, const Dataset& eval_data, const DemandModel& evaluator);

struct Split {
  Dataset prescription;
  Dataset evaluation;
};

/// Random disjoint split; round(fraction * n) rows go to the prescription set.
Split split_dataset(const Dataset& data, double prescription_fraction, std::uint64_t seed);

}  // namespace pricing
