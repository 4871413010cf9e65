#pragma once

#include <string>
#include <vector>

#include "pricing/distributions.hpp"

namespace pricing::bounds {

/// below_opt: the f-branch (surrogate price below p*); above_opt: the z-branch.
enum class Branch { below_opt, above_opt };
std::string to_string(Branch b);

struct BoundValue {
  double value = 0.0;
  Branch branch = Branch::below_opt;
  /// Argmin of the active inner problem (f, or z).
  double inner_argmin = 0.0;
  double f_value = 0.0, f_argmin = 0.0;
  double z_value = 0.0, z_argmin = 0.0;
};

/// c (f-1) e^{c (f-1)} / (f ln f) with its f -> 1 limit c.
double f_branch_objective(double c, double f);
/// min over 0 < f < 1 of f_branch_objective(c, f); argmin 1 means the limit is active.
std::pair<double, double> f_branch_min(double c);

/// c z e^{-z (1/c - 1) - 1} / (z + c) for z <= -2c.
double hinge_z_objective(double c, double z);
/// Stationary point -(c/2)(sqrt((c-5)/(c-1)) + 1) of hinge_z_objective, 0 < c < 1.
double hinge_z_closed_form(double c);

/// (z tau (ln z + 1) - z^2) / (tau - z) on (tau, 1].
double quantile_z_objective(double tau, double z);

/// Revenue-ratio lower bound for the hinge loss with parameter c in (0, 1].
BoundValue hinge_bound(double c);
/// Revenue-ratio lower bound for the quantile loss with parameter tau in (0, 1).
BoundValue quantile_bound(double tau);

/// (c + 1) e^{-c}; a candidate bound that never turns out to be the minimum.
double hinge_alternative_term(double c);

enum class LossFamily { hinge, quantile };
LossFamily parse_family(const std::string& s);

struct RobustParameter {
  double param = 0.0;
  double value = 0.0;
};
/// Parameter maximizing the worst-case revenue ratio.
RobustParameter robust_parameter(LossFamily kind);

struct BoundCurve {
  std::vector<double> parameter_grid;
  std::vector<double> values;
  std::vector<Branch> branch;
};
BoundCurve bound_curve(LossFamily kind, const std::vector<double>& grid);

enum class WorstCase { hinge_below, hinge_above, quantile_below, quantile_above };
WorstCase parse_worst_case(const std::string& s);
std::string to_string(WorstCase k);

/// t(c) = (sqrt((c-5)/(c-1)) - 1) / 2.
double hinge_t(double c);

/// Log-concave valuation law on which the corresponding bound is attained.
ValuationDistribution worst_case_distribution(WorstCase kind, double param);

struct TightnessReport {
  WorstCase kind = WorstCase::hinge_below;
  double parameter = 0.0;
  /// Bound of the branch this case is built for (f-branch for *_below, z-branch for *_above).
  double bound_value = 0.0;
  /// Full bound (minimum over both branches).
  double theorem_bound = 0.0;
  double achieved_ratio = 0.0;
  double gap = 0.0;  // achieved_ratio - bound_value
  double surrogate_price = 0.0;
  double optimal_price = 0.0;
};

TightnessReport verify_tightness(WorstCase kind, double param);

}  // namespace pricing::bounds
