#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pricing/core.hpp"
#include "pricing/losses.hpp"
#include "pricing/solver.hpp"

namespace pricing {

/// Estimated purchase probability f(x, p), clipped to [0, 1].
class DemandModel {
 public:
  virtual ~DemandModel() = default;
  virtual double predict(std::span<const double> x, double p) const = 0;
  virtual std::string name() const = 0;
};

class ConstantDemand final : public DemandModel {
 public:
  explicit ConstantDemand(double q);
  double predict(std::span<const double>, double) const override { return q_; }
  std::string name() const override { return "constant"; }

 private:
  double q_;
};

/// Wraps an arbitrary callable; the output is clipped to [0, 1].
class FunctionDemand final : public DemandModel {
 public:
  explicit FunctionDemand(std::function<double(std::span<const double>, double)> f, std::string label = "function")
      : f_(std::move(f)), label_(std::move(label)) {}
  double predict(std::span<const double> x, double p) const override;
  std::string name() const override { return label_; }

 private:
  std::function<double(std::span<const double>, double)> f_;
  std::string label_;
};

/// Logistic regression on [x; p; 1], fitted on standardized columns.
class LogisticDemand final : public DemandModel {
 public:
  double predict(std::span<const double> x, double p) const override;
  std::string name() const override { return "logistic"; }

  /// Weights on the original scale, ordered [x_0 .. x_{m-1}, p, bias].
  std::vector<double> weights() const;
  bool separation_warning() const { return separation_; }
  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }

  friend LogisticDemand fit_logistic_demand(const Dataset& data, int max_iters, double grad_tol);

 private:
  std::vector<double> mean_, scale_;  // per column of [x; p]; scale 0 marks a constant column
  std::vector<double> w_;             // standardized weights, bias last
  bool separation_ = false;
  bool converged_ = false;
  int iterations_ = 0;
};

/// Maximum likelihood by gradient ascent (Barzilai-Borwein step with Armijo
/// backtracking). Stops when the gradient sup-norm drops below grad_tol.
LogisticDemand fit_logistic_demand(const Dataset& data, int max_iters = 10000, double grad_tol = 1e-8);

/// Nadaraya-Watson smoother of Y with a product Gaussian kernel over (x, p).
class KernelDemand final : public DemandModel {
 public:
  double predict(std::span<const double> x, double p) const override;
  std::string name() const override { return "kernel"; }
  /// Bandwidths ordered [x_0 .. x_{m-1}, p].
  const std::vector<double>& bandwidths() const { return h_; }

  friend KernelDemand fit_kernel_demand(const Dataset& data, std::optional<std::vector<double>> bandwidths);

 private:
  std::size_t m_ = 0;
  std::vector<double> h_;
  std::vector<double> inv_h_;
  std::vector<double> X_;  // sorted by price
  std::vector<double> P_;
  std::vector<double> Y_;
  double mean_y_ = 0.0;
};

/// Default bandwidths 1.06 sd n^{-1/5} per dimension. Needs n >= 50.
KernelDemand fit_kernel_demand(const Dataset& data, std::optional<std::vector<double>> bandwidths = std::nullopt);

enum class DemandKind { logistic, kernel };
DemandKind parse_demand_kind(const std::string& s);
std::unique_ptr<DemandModel> fit_demand(DemandKind kind, const Dataset& data);

/// Mean of pi(x_i) f(x_i, pi(x_i)) over the rows of X (row-major).
double estimated_revenue(const DemandModel& demand, const LinearPolicy& policy, std::span<const double> X);

/// Maximizes the estimated revenue (1/n) sum pi(x_i) f(x_i, pi(x_i)) by pattern search.
FitResult direct_method_policy(const DemandModel& demand, const Dataset& data, const SolverConfig& cfg,
                               const std::vector<std::vector<double>>& starts = {});
/// Maximizes the kernel-smoothed IPW revenue estimate.
FitResult kernel_ipw_policy(const Dataset& data, double bandwidth, const SolverConfig& cfg,
                            const std::vector<std::vector<double>>& starts = {});
FitResult model_free_policy(const Dataset& data, const SolverConfig& cfg,
                            const std::vector<std::vector<double>>& starts = {});
FitResult eps_insensitive_policy(const Dataset& data, std::optional<double> c1, std::optional<double> c2,
                                 const SolverConfig& cfg, std::optional<std::vector<double>> theta0 = std::nullopt);

struct CvOptions {
  /// Revenue estimates use at most this many training rows (0 = all).
  std::size_t max_eval_points = 0;
  std::uint64_t seed = 0;
  /// Initial theta for every grid fit; unset means the solver default.
  std::optional<double> theta0;
  /// If > 0, this fraction of rows is held out: policies are fitted on the
  /// rest and revenue is estimated on the held-out features.
  double holdout_fraction = 0.0;
};

struct CvResult {
  std::vector<LossSpec> grid;
  std::vector<LinearPolicy> policies;
  std::vector<double> estimated_revenues;
  std::size_t chosen_index = 0;
  const LossSpec& chosen() const { return grid[chosen_index]; }
  const LinearPolicy& chosen_policy() const { return policies[chosen_index]; }
};

/// Default parameter grids for hinge, quantile and eps_insensitive.
std::vector<LossSpec> default_cv_grid(LossKind kind);

/// Fits each grid loss, scores it with the demand model on the training
/// features, and picks the best. Exact ties go to the parameter closest to the
/// robust default (c = 0.8234, tau = 0.209), or the lexicographically smallest
/// (c1, c2) for eps_insensitive.
CvResult cross_validate(const std::vector<LossSpec>& grid, const Dataset& data, const DemandModel& demand,
                        const SolverConfig& cfg, const CvOptions& opt = {});

}  // namespace pricing
