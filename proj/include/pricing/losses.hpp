#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pricing/core.hpp"

namespace pricing {

enum class LossKind { hinge, quantile, eps_insensitive, model_free, kernel_ipw };

/// Tagged surrogate-loss choice with its parameters.
///
/// hinge(c), 0 < c <= 1; quantile(tau), 0 < tau < 1; eps_insensitive(c1, c2)
/// with c1 > 1 and c2 < 1, where an absent c1 / c2 stands for +inf / -inf;
/// model_free; kernel_ipw(bandwidth > 0). The last two are rewards to maximize.
class LossSpec {
 public:
  static LossSpec hinge(double c);
  static LossSpec quantile(double tau);
  static LossSpec eps_insensitive(std::optional<double> c1, std::optional<double> c2);
  static LossSpec model_free();
  static LossSpec kernel_ipw(double bandwidth);

  LossKind kind() const { return kind_; }
  bool is_convex() const {
    return kind_ == LossKind::hinge || kind_ == LossKind::quantile || kind_ == LossKind::eps_insensitive;
  }
  /// c for hinge, tau for quantile, bandwidth for kernel_ipw.
  double param() const { return a_; }
  std::optional<double> c1() const { return c1_; }
  std::optional<double> c2() const { return c2_; }

  std::string name() const;
  /// e.g. "hinge(c=0.8)".
  std::string describe() const;

 private:
  LossSpec(LossKind k, double a) : kind_(k), a_(a) {}
  LossKind kind_;
  double a_ = 0.0;
  std::optional<double> c1_, c2_;
};

LossKind parse_loss_kind(const std::string& name);

/// Inverse-propensity weight 1/phi, clipped at cap.
inline double ipw_weight(double propensity, double cap = std::numeric_limits<double>::infinity()) {
  const double w = 1.0 / propensity;
  return w < cap ? w : cap;
}

double hinge_loss(double pi, const Observation& s, double c);
double quantile_loss(double pi, const Observation& s, double tau);
double eps_insensitive_loss(double pi, const Observation& s, std::optional<double> c1, std::optional<double> c2);
/// pi * Y * 1{P > pi}; to be maximized.
double model_free_objective(double pi, const Observation& s);
/// (1/(h phi)) K((pi - P)/h) P Y with K the standard normal density; to be maximized.
double kernel_ipw_reward(double pi, const Observation& s, double bandwidth);

/// Per-sample value of spec at pi; the IPW factor is clipped at weight_cap.
double pointwise_value(const LossSpec& spec, double pi, const Observation& s,
                       double weight_cap = std::numeric_limits<double>::infinity());

/// Element of the subdifferential in pi. At a kink the element closest to zero
/// is returned. Throws for non-convex kinds.
double subgradient(const LossSpec& spec, double pi, const Observation& s,
                   double weight_cap = std::numeric_limits<double>::infinity());

struct RiskOptions {
  /// Clip for 1/phi; +inf disables capping.
  double weight_cap = std::numeric_limits<double>::infinity();
};

/// Mean per-sample value over data at policy prices (loss for convex kinds,
/// reward for model_free / kernel_ipw). Throws on an empty dataset.
double empirical_risk(const LossSpec& spec, const LinearPolicy& policy, const Dataset& data,
                      const RiskOptions& opt = {});

/// Mean of subgradient(pi(x_i)) * x_i. Convex kinds only.
std::vector<double> empirical_risk_gradient(const LossSpec& spec, const LinearPolicy& policy,
                                            const Dataset& data, const RiskOptions& opt = {});

}  // namespace pricing
