#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pricing/core.hpp"
#include "pricing/losses.hpp"

namespace pricing {

struct SolverConfig {
  int max_iters = 50000;
  /// Relative objective improvement over one checkpoint window that counts as converged.
  double tol = 1e-9;
  int window = 100;
  /// Norm cap B on ||theta||_2.
  double norm_cap = 100.0;
  /// Ridge weight lambda on ||theta||_2^2.
  double reg_lambda = 0.0;
  /// Step scale s for the s/sqrt(t) schedule; unset means mean price / sqrt(m).
  std::optional<double> step_scale;
  /// Stalled epochs restart from the best point with the step halved; the fit
  /// ends once the step factor drops below this.
  double min_step_ratio = 1e-6;
  /// Clip for inverse-propensity weights inside the empirical risk.
  double weight_cap = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  /// Pattern search: total starts = user starts + (multistarts - user starts, at least 0) random starts.
  int multistarts = 10;
  /// Pattern search initial step; unset means 0.5 * ||theta0||_inf floored at 0.1.
  std::optional<double> ps_initial_step;
  double ps_shrink = 0.5;
  double ps_min_step = 1e-5;
  int ps_max_evals = 20000;
  bool record_trace = false;
};

struct FitResult {
  LinearPolicy policy;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Best objective at each checkpoint (convex path) or per start (pattern search).
  std::vector<double> trace;
};

class DivergenceError : public Error {
 public:
  DivergenceError(int iteration, double value);
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Step length at iteration t (1-based): 1/(lambda t) when lambda > 0, else s/sqrt(t).
double subgradient_step(const SolverConfig& cfg, double step_scale, int t);

/// Euclidean projection onto {||theta||_2 <= radius}.
void project_to_ball(std::span<double> theta, double radius);

/// Minimizes empirical risk + lambda ||theta||^2 over ||theta|| <= B by projected
/// subgradient descent with suffix iterate averaging. With lambda = 0 the
/// subgradient is normalized before the s/sqrt(t) step. The returned policy is
/// the best averaged iterate seen at a checkpoint.
FitResult fit_convex(const LossSpec& spec, const Dataset& data, const SolverConfig& cfg,
                     std::optional<std::vector<double>> theta0 = std::nullopt, bool intercept = false);

using PolicyObjective = std::function<double(std::span<const double>)>;

/// Maximizes objective by compass search from each start, inside ||theta|| <= B.
/// Starts: the given ones, then seeded random starts up to cfg.multistarts.
FitResult fit_nonconvex(const PolicyObjective& objective, std::size_t dim, const SolverConfig& cfg,
                        const std::vector<std::vector<double>>& starts = {});

/// Ridge weight from the generalization bound: sqrt(2 max(tau,1-tau)^2 / (d^2 B^2 n)).
double bound_lambda(double tau_or_c, double d, double B, std::size_t n);
/// Lipschitz constant max(tau, 1-tau) / d of the hinge / quantile losses.
double lipschitz_constant(double tau_or_c, double d);
/// Smallest n with 8 max(tau,1-tau)^2 B^2 / (d^2 eps^2) <= n.
std::size_t sample_complexity(double tau_or_c, double d, double B, double eps);

}  // namespace pricing
