#include "pricing/kernels.hpp"

#include <cmath>
#include <numbers>

#include "pricing/parallel.hpp"

namespace pricing::kernels {

namespace {

// Per-sample (value, slope) for each kind. w is the clipped IPW weight.
struct HingeTerm {
  double c;
  double value(double pi, double p, int y, double w) const {
    const double d = pi - p;
    const double cy = c * y;
    return d < 0.0 ? -cy * w * d : (1.0 - cy) * w * d;
  }
  double slope(double pi, double p, int y, double w) const {
    const double d = pi - p;
    const double cy = c * y;
    return d < 0.0 ? -cy * w : (d > 0.0 ? (1.0 - cy) * w : 0.0);
  }
  // value = slope * d since the loss is zero at the kink
  double both(double pi, double p, int y, double w, double& g) const {
    const double d = pi - p;
    const double cy = c * y;
    const double lo = -cy * w, hi = (1.0 - cy) * w;
    g = d < 0.0 ? lo : hi;
    g = d == 0.0 ? 0.0 : g;
    return g * d;
  }
};

struct QuantileTerm {
  double tau;
  double value(double pi, double p, int y, double w) const {
    if (!y) return 0.0;
    const double d = pi - p;
    return d < 0.0 ? -(1.0 - tau) * w * d : tau * w * d;
  }
  double slope(double pi, double p, int y, double w) const {
    if (!y) return 0.0;
    const double d = pi - p;
    return d < 0.0 ? -(1.0 - tau) * w : (d > 0.0 ? tau * w : 0.0);
  }
  double both(double pi, double p, int y, double w, double& g) const {
    const double d = pi - p;
    const double wy = y ? w : 0.0;
    g = d < 0.0 ? -(1.0 - tau) * wy : tau * wy;
    g = d == 0.0 ? 0.0 : g;
    return g * d;
  }
};

struct EpsTerm {
  bool has_c1, has_c2;
  double c1, c2;
  double value(double pi, double p, int y, double) const {
    if (y) {
      double v = p > pi ? p - pi : 0.0;
      if (has_c1 && pi > c1 * p) v += pi - c1 * p;
      return v;
    }
    double v = pi > p ? pi - p : 0.0;
    if (has_c2 && pi < c2 * p) v += c2 * p - pi;
    return v;
  }
  double slope(double pi, double p, int y, double) const {
    if (y) {
      if (pi < p) return -1.0;
      return (has_c1 && pi > c1 * p) ? 1.0 : 0.0;
    }
    if (pi > p) return 1.0;
    return (has_c2 && pi < c2 * p) ? -1.0 : 0.0;
  }
  double both(double pi, double p, int y, double w, double& g) const {
    g = slope(pi, p, y, w);
    return value(pi, p, y, w);
  }
};

struct ModelFreeTerm {
  double value(double pi, double p, int y, double) const { return (y && p > pi) ? pi : 0.0; }
  double slope(double, double, int, double) const { return 0.0; }
  double both(double pi, double p, int y, double w, double& g) const {
    g = 0.0;
    return value(pi, p, y, w);
  }
};

struct KernelIpwTerm {
  double h;
  double value(double pi, double p, int y, double w) const {
    if (!y) return 0.0;
    const double u = (pi - p) / h;
    return std::exp(-0.5 * u * u) * (1.0 / std::sqrt(2.0 * std::numbers::pi)) * p * w / h;
  }
  double slope(double, double, int, double) const { return 0.0; }
  double both(double pi, double p, int y, double w, double& g) const {
    g = 0.0;
    return value(pi, p, y, w);
  }
};

template <class F>
decltype(auto) dispatch(const LossSpec& spec, F&& f) {
  switch (spec.kind()) {
    case LossKind::hinge: return f(HingeTerm{spec.param()});
    case LossKind::quantile: return f(QuantileTerm{spec.param()});
    case LossKind::eps_insensitive:
      return f(EpsTerm{spec.c1().has_value(), spec.c2().has_value(), spec.c1().value_or(0.0),
                       spec.c2().value_or(0.0)});
    case LossKind::model_free: return f(ModelFreeTerm{});
    case LossKind::kernel_ipw: return f(KernelIpwTerm{spec.param()});
  }
  throw Error("unknown loss kind");
}

inline double policy_price(const double* x, std::span<const double> theta, std::size_t m, bool intercept) {
  double s = intercept ? theta[m] : 0.0;
  for (std::size_t j = 0; j < m; ++j) s += theta[j] * x[j];
  return s;
}

}  // namespace

RiskProblem::RiskProblem(const LossSpec& spec, const Dataset& data, double weight_cap, bool intercept)
    : spec_(spec), data_(&data), intercept_(intercept), weight_(data.size()) {
  const auto& prop = data.propensities();
  for (std::size_t i = 0; i < data.size(); ++i) weight_[i] = ipw_weight(prop[i], weight_cap);
}

double RiskProblem::value(std::span<const double> theta) const {
  if (theta.size() != theta_dim()) throw Error("risk: theta dimension mismatch");
  const std::size_t n = data_->size();
  const std::size_t m = data_->feature_dim();
  const double* X = data_->feature_matrix().data();
  const double* P = data_->prices().data();
  const int* Y = data_->sold().data();
  const double* W = weight_.data();
  const bool ic = intercept_;
  const double total = dispatch(spec_, [&](auto term) {
    return parallel::chunked_sum(n, [&](std::size_t b, std::size_t e) {
      double s = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        const double pi = policy_price(X + i * m, theta, m, ic);
        s += term.value(pi, P[i], Y[i], W[i]);
      }
      return s;
    });
  });
  return total / static_cast<double>(n);
}

double RiskProblem::value_and_gradient(std::span<const double> theta, std::span<double> grad) const {
  if (!spec_.is_convex()) throw Error("risk gradient: " + spec_.name() + " is not convex");
  if (theta.size() != theta_dim() || grad.size() != theta_dim()) {
    throw Error("risk gradient: theta dimension mismatch");
  }
  const std::size_t n = data_->size();
  const std::size_t m = data_->feature_dim();
  const std::size_t d = theta_dim();
  const double* X = data_->feature_matrix().data();
  const double* P = data_->prices().data();
  const int* Y = data_->sold().data();
  const double* W = weight_.data();
  const bool ic = intercept_;
  const double total = dispatch(spec_, [&](auto term) {
    return parallel::chunked_sum_vec(n, d, grad, [&](std::size_t b, std::size_t e, std::span<double> acc) {
      if (m == 2 && !ic) {
        // common case, kept in registers
        const double t0 = theta[0], t1 = theta[1];
        double s = 0.0, a0 = 0.0, a1 = 0.0;
        for (std::size_t i = b; i < e; ++i) {
          const double x0 = X[2 * i], x1 = X[2 * i + 1];
          double g;
          s += term.both(t0 * x0 + t1 * x1, P[i], Y[i], W[i], g);
          a0 += g * x0;
          a1 += g * x1;
        }
        acc[0] = a0;
        acc[1] = a1;
        return s;
      }
      double s = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        const double* x = X + i * m;
        const double pi = policy_price(x, theta, m, ic);
        double g;
        s += term.both(pi, P[i], Y[i], W[i], g);
        for (std::size_t j = 0; j < m; ++j) acc[j] += g * x[j];
        if (ic) acc[m] += g;
      }
      return s;
    });
  });
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& g : grad) g *= inv_n;
  return total * inv_n;
}

double risk_serial(const LossSpec& spec, std::span<const double> theta, const Dataset& data, double weight_cap,
                   bool intercept) {
  if (data.empty()) throw Error("risk: empty dataset");
  LinearPolicy pol{{theta.begin(), theta.end()}, intercept};
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    s += pointwise_value(spec, pol.price(data.features(i)), data.observation(i), weight_cap);
  }
  return s / static_cast<double>(data.size());
}

double risk_gradient_serial(const LossSpec& spec, std::span<const double> theta, const Dataset& data,
                            double weight_cap, std::span<double> grad, bool intercept) {
  if (data.empty()) throw Error("risk: empty dataset");
  LinearPolicy pol{{theta.begin(), theta.end()}, intercept};
  const std::size_t m = data.feature_dim();
  std::fill(grad.begin(), grad.end(), 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.features(i);
    const auto o = data.observation(i);
    const double pi = pol.price(x);
    s += pointwise_value(spec, pi, o, weight_cap);
    const double g = subgradient(spec, pi, o, weight_cap);
    for (std::size_t j = 0; j < m; ++j) grad[j] += g * x[j];
    if (intercept) grad[m] += g;
  }
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (auto& g : grad) g *= inv_n;
  return s * inv_n;
}

}  // namespace pricing::kernels
