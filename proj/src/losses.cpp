#include "pricing/losses.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pricing/kernels.hpp"

namespace pricing {

LossSpec LossSpec::hinge(double c) {
  if (!(c > 0.0 && c <= 1.0)) throw Error("hinge loss: c must lie in (0, 1]");
  return {LossKind::hinge, c};
}

LossSpec LossSpec::quantile(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error("quantile loss: tau must lie in (0, 1)");
  return {LossKind::quantile, tau};
}

LossSpec LossSpec::eps_insensitive(std::optional<double> c1, std::optional<double> c2) {
  if (c1 && !(*c1 > 1.0 && std::isfinite(*c1))) throw Error("eps-insensitive loss: c1 must be > 1");
  if (c2 && !(*c2 < 1.0 && std::isfinite(*c2))) throw Error("eps-insensitive loss: c2 must be < 1");
  LossSpec s{LossKind::eps_insensitive, 0.0};
  s.c1_ = c1;
  s.c2_ = c2;
  return s;
}

LossSpec LossSpec::model_free() { return {LossKind::model_free, 0.0}; }

LossSpec LossSpec::kernel_ipw(double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error("kernel IPW: bandwidth must be > 0");
  return {LossKind::kernel_ipw, bandwidth};
}

std::string LossSpec::name() const {
  switch (kind_) {
    case LossKind::hinge: return "hinge";
    case LossKind::quantile: return "quantile";
    case LossKind::eps_insensitive: return "eps_insensitive";
    case LossKind::model_free: return "model_free";
    case LossKind::kernel_ipw: return "kernel_ipw";
  }
  return "?";
}

std::string LossSpec::describe() const {
  std::ostringstream os;
  os << name();
  switch (kind_) {
    case LossKind::hinge: os << "(c=" << format_double(a_) << ")"; break;
    case LossKind::quantile: os << "(tau=" << format_double(a_) << ")"; break;
    case LossKind::kernel_ipw: os << "(h=" << format_double(a_) << ")"; break;
    case LossKind::eps_insensitive:
      os << "(c1=" << (c1_ ? format_double(*c1_) : std::string("inf"))
         << ",c2=" << (c2_ ? format_double(*c2_) : std::string("-inf")) << ")";
      break;
    case LossKind::model_free: break;
  }
  return os.str();
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "hinge") return LossKind::hinge;
  if (name == "quantile" || name == "quant") return LossKind::quantile;
  if (name == "eps_insensitive" || name == "eps") return LossKind::eps_insensitive;
  if (name == "model_free") return LossKind::model_free;
  if (name == "kernel_ipw" || name == "kern_ipw") return LossKind::kernel_ipw;
  throw Error("unknown loss kind '" + name + "'");
}

namespace {
inline double pos(double v) { return v > 0.0 ? v : 0.0; }
}  // namespace

double hinge_loss(double pi, const Observation& s, double c) {
  const double cy = c * s.sold;
  return (cy * pos(s.price - pi) + (1.0 - cy) * pos(pi - s.price)) / s.propensity;
}

double quantile_loss(double pi, const Observation& s, double tau) {
  if (s.sold == 0) return 0.0;
  return ((1.0 - tau) * pos(s.price - pi) + tau * pos(pi - s.price)) / s.propensity;
}

double eps_insensitive_loss(double pi, const Observation& s, std::optional<double> c1, std::optional<double> c2) {
  if (s.sold) return pos(s.price - pi) + (c1 ? pos(pi - *c1 * s.price) : 0.0);
  return pos(pi - s.price) + (c2 ? pos(*c2 * s.price - pi) : 0.0);
}

double model_free_objective(double pi, const Observation& s) {
  return (s.sold && s.price > pi) ? pi : 0.0;
}

double kernel_ipw_reward(double pi, const Observation& s, double bandwidth) {
  if (!s.sold) return 0.0;
  const double u = (pi - s.price) / bandwidth;
  const double k = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return k * s.price / (bandwidth * s.propensity);
}

double pointwise_value(const LossSpec& spec, double pi, const Observation& s, double weight_cap) {
  Observation o = s;
  if (1.0 / s.propensity > weight_cap) o.propensity = 1.0 / weight_cap;
  switch (spec.kind()) {
    case LossKind::hinge: return hinge_loss(pi, o, spec.param());
    case LossKind::quantile: return quantile_loss(pi, o, spec.param());
    case LossKind::eps_insensitive: return eps_insensitive_loss(pi, s, spec.c1(), spec.c2());
    case LossKind::model_free: return model_free_objective(pi, s);
    case LossKind::kernel_ipw: return kernel_ipw_reward(pi, o, spec.param());
  }
  return 0.0;
}

double subgradient(const LossSpec& spec, double pi, const Observation& s, double weight_cap) {
  const double d = pi - s.price;
  switch (spec.kind()) {
    case LossKind::hinge: {
      const double w = ipw_weight(s.propensity, weight_cap);
      const double cy = spec.param() * s.sold;
      if (d < 0.0) return -cy * w;
      if (d > 0.0) return (1.0 - cy) * w;
      return 0.0;
    }
    case LossKind::quantile: {
      if (!s.sold) return 0.0;
      const double w = ipw_weight(s.propensity, weight_cap);
      const double tau = spec.param();
      if (d < 0.0) return -(1.0 - tau) * w;
      if (d > 0.0) return tau * w;
      return 0.0;
    }
    case LossKind::eps_insensitive: {
      if (s.sold) {
        if (d < 0.0) return -1.0;
        if (spec.c1() && pi > *spec.c1() * s.price) return 1.0;
        return 0.0;
      }
      if (d > 0.0) return 1.0;
      if (spec.c2() && pi < *spec.c2() * s.price) return -1.0;
      return 0.0;
    }
    case LossKind::model_free:
    case LossKind::kernel_ipw:
      break;
  }
  throw Error("subgradient: " + spec.name() + " is not a convex loss");
}

double empirical_risk(const LossSpec& spec, const LinearPolicy& policy, const Dataset& data,
                      const RiskOptions& opt) {
  if (data.empty()) throw Error("empirical_risk: empty dataset");
  return kernels::RiskProblem(spec, data, opt.weight_cap, policy.includes_intercept).value(policy.theta);
}

std::vector<double> empirical_risk_gradient(const LossSpec& spec, const LinearPolicy& policy,
                                            const Dataset& data, const RiskOptions& opt) {
  if (data.empty()) throw Error("empirical_risk_gradient: empty dataset");
  if (!spec.is_convex()) throw Error("empirical_risk_gradient: " + spec.name() + " is not convex");
  std::vector<double> g(policy.theta.size());
  kernels::RiskProblem(spec, data, opt.weight_cap, policy.includes_intercept).value_and_gradient(policy.theta, g);
  return g;
}

}  // namespace pricing
