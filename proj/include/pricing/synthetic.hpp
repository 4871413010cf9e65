#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pricing/core.hpp"
#include "pricing/distributions.hpp"
#include "pricing/solver.hpp"

namespace pricing {

enum class ValuationFamily {
  uniform_band,         // V = g(X) + Uniform(0, width)
  shifted_exponential,  // V = location + Exponential(mean g(X))
  constant,             // V = value, regardless of X
};
enum class GKind { linear, step };

ValuationFamily parse_valuation_family(const std::string& s);
GKind parse_g_kind(const std::string& s);
std::string to_string(ValuationFamily f);
std::string to_string(GKind g);

struct Scenario {
  std::string name = "uniform_linear";
  ValuationFamily family = ValuationFamily::uniform_band;
  GKind g = GKind::linear;
  std::size_t feature_dim = 2;
  /// X ~ Uniform(feature_lo, feature_hi)^m. lo == hi gives a constant feature.
  double feature_lo = 1.0, feature_hi = 2.0;
  PropensityModel price_law = PropensityModel::uniform(1.0, 3.0);
  double band_width = 3.0;
  double location = 5.0;
  double constant_value = 7.0;
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  /// Defaults of the two benchmark settings.
  static Scenario uniform_band(GKind g);
  static Scenario shifted_exponential(GKind g);
};

double g_linear(std::span<const double> x);
double g_step(std::span<const double> x, std::span<const double> feature_means);

/// A scenario with its step-function thresholds frozen.
struct ScenarioInstance {
  Scenario scenario;
  std::vector<double> feature_means;

  double g(std::span<const double> x) const;
  ValuationDistribution conditional_valuation(std::span<const double> x) const;
  /// P(V >= p | x) in closed form.
  double conditional_survival(std::span<const double> x, double p) const;
  /// argmax_p p P(V >= p | x) in closed form.
  double pointwise_optimal_price(std::span<const double> x) const;
  /// Draws V | x.
  double sample_valuation(std::span<const double> x, Rng& rng) const;
};

struct Generated {
  ScenarioInstance instance;
  Dataset data;
  std::vector<double> valuations;
};

/// Draws X, V and P from independent substreams of scenario.seed, sets
/// Y = 1{P <= V} and fills propensities from the price law.
Generated generate(const Scenario& scenario);

/// n feature vectors (row-major) from the scenario's feature law.
std::vector<double> sample_features(const Scenario& scenario, std::size_t n, Rng& rng);

struct OraclePolicy {
  LinearPolicy policy;
  double valuation_objective = 0.0;
  /// Objective of the least-squares start, for reference.
  double ls_start_objective = 0.0;
};

/// Best linear no-intercept policy for (1/n) sum pi(x_i) 1{pi(x_i) <= V_i}
/// on n_oracle fresh valuation samples, by multi-start pattern search.
OraclePolicy oracle_policy(const ScenarioInstance& inst, std::size_t n_oracle, std::uint64_t seed,
                           const SolverConfig& cfg = {});

/// Mean over test features (row-major) of |pi*(x) - pi(x)|.
double distance_to_oracle(const LinearPolicy& candidate, const LinearPolicy& oracle,
                          std::span<const double> test_features);

}  // namespace pricing
