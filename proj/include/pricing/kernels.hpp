#pragma once

// Hot loops behind empirical risk evaluation.
//
// RiskProblem is the production path: precomputed IPW weights, chunked
// OpenMP reduction with deterministic summation order. The *_serial free
// functions are the plain reference implementations used by tests and by the
// benchmark target; they call the pointwise loss functions directly.

#include <span>
#include <vector>

#include "pricing/core.hpp"
#include "pricing/losses.hpp"

namespace pricing::kernels {

class RiskProblem {
 public:
  /// theta has feature_dim entries, or feature_dim + 1 when intercept is set.
  RiskProblem(const LossSpec& spec, const Dataset& data, double weight_cap, bool intercept = false);

  std::size_t size() const { return data_->size(); }
  std::size_t theta_dim() const { return data_->feature_dim() + (intercept_ ? 1 : 0); }
  const LossSpec& spec() const { return spec_; }

  /// Mean per-sample value.
  double value(std::span<const double> theta) const;
  /// Mean value; writes the mean subgradient into grad. Convex kinds only.
  double value_and_gradient(std::span<const double> theta, std::span<double> grad) const;

 private:
  LossSpec spec_;
  const Dataset* data_;
  bool intercept_;
  std::vector<double> weight_;  // clipped 1/phi
};

double risk_serial(const LossSpec& spec, std::span<const double> theta, const Dataset& data,
                   double weight_cap, bool intercept = false);
double risk_gradient_serial(const LossSpec& spec, std::span<const double> theta, const Dataset& data,
                            double weight_cap, std::span<double> grad, bool intercept = false);

}  // namespace pricing::kernels
