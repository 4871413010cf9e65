#include "pricing/policies.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "pricing/kernels.hpp"
#include "pricing/parallel.hpp"

namespace pricing {

namespace {

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

// Kernel weights beyond this many bandwidths (in squared Mahalanobis units) are skipped.
constexpr double kCutoff = 8.0;
constexpr double kCutoff2 = kCutoff * kCutoff;

}  // namespace

ConstantDemand::ConstantDemand(double q) : q_(q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error("constant demand must lie in [0, 1]");
}

double FunctionDemand::predict(std::span<const double> x, double p) const { return clip01(f_(x, p)); }

// ---------------------------------------------------------------- logistic

LogisticDemand fit_logistic_demand(const Dataset& data, int max_iters, double grad_tol) {
  if (auto rep = validate_dataset(data); !rep.ok()) {
    // Propensities are irrelevant for a demand model; only check the rest.
    for (const auto& v : rep.violations) {
      if (v.message.find("propensity") == std::string::npos && v.message.find("overlap") == std::string::npos) {
        throw Error("fit_logistic_demand: invalid dataset: " + rep.summary());
      }
    }
  }
  if (data.empty()) throw Error("fit_logistic_demand: empty dataset");
  const std::size_t n = data.size(), m = data.feature_dim(), cols = m + 1, d = m + 2;
  LogisticDemand model;
  model.mean_.assign(cols, 0.0);
  model.scale_.assign(cols, 0.0);
  auto raw = [&](std::size_t i, std::size_t j) { return j < m ? data.features(i)[j] : data.prices()[i]; };
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += raw(i, j);
    const double mu = s / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (raw(i, j) - mu) * (raw(i, j) - mu);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    model.mean_[j] = mu;
    model.scale_[j] = sd > 1e-12 * std::max(1.0, std::abs(mu)) ? sd : 0.0;
  }
  // Standardized design, bias column last.
  std::vector<double> Z(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (model.scale_[j] > 0.0) Z[i * d + j] = (raw(i, j) - model.mean_[j]) / model.scale_[j];
    }
    Z[i * d + cols] = 1.0;
  }
  const auto& Y = data.sold();
  const double inv_n = 1.0 / static_cast<double>(n);

  auto loglik = [&](const std::vector<double>& w) {
    return inv_n * parallel::chunked_sum(n, [&](std::size_t b, std::size_t e) {
             double s = 0.0;
             for (std::size_t i = b; i < e; ++i) {
               double t = 0.0;
               for (std::size_t j = 0; j < d; ++j) t += w[j] * Z[i * d + j];
               s += Y[i] * t - softplus(t);
             }
             return s;
           });
  };
  auto gradient = [&](const std::vector<double>& w, std::vector<double>& g) {
    parallel::chunked_sum_vec(n, d, g, [&](std::size_t b, std::size_t e, std::span<double> acc) {
      for (std::size_t i = b; i < e; ++i) {
        double t = 0.0;
        for (std::size_t j = 0; j < d; ++j) t += w[j] * Z[i * d + j];
        const double r = Y[i] - sigmoid(t);
        for (std::size_t j = 0; j < d; ++j) acc[j] += r * Z[i * d + j];
      }
      return 0.0;
    });
    for (auto& v : g) v *= inv_n;
  };

  std::vector<double> w(d, 0.0), g(d), w_prev, g_prev, trial(d);
  double ll = loglik(w);
  int it = 0;
  for (; it < max_iters; ++it) {
    gradient(w, g);
    double gmax = 0.0, gg = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v)), gg += v * v;
    if (gmax < grad_tol) {
      model.converged_ = true;
      break;
    }
    double alpha = 1.0;
    if (!w_prev.empty()) {
      double sy = 0.0, ss = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double s = w[j] - w_prev[j], y = g[j] - g_prev[j];
        sy += s * y;
        ss += s * s;
      }
      if (sy != 0.0) alpha = std::clamp(ss / std::abs(sy), 1e-8, 1e8);
    }
    double ll_new = ll;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t j = 0; j < d; ++j) trial[j] = w[j] + alpha * g[j];
      ll_new = loglik(trial);
      if (ll_new >= ll + 1e-4 * alpha * gg) break;
      alpha *= 0.5;
    }
    if (!(ll_new >= ll)) break;  // no ascent possible at machine precision
    w_prev = w;
    g_prev = g;
    w = trial;
    ll = ll_new;
    double wmax = 0.0;
    for (double v : w) wmax = std::max(wmax, std::abs(v));
    if (wmax > 1e3) {
      model.separation_ = true;
      break;
    }
  }
  model.iterations_ = it;
  model.w_ = w;

  // Perfect separation also shows up as every label being predicted with certainty.
  if (!model.separation_) {
    bool all_certain = true;
    for (std::size_t i = 0; i < n && all_certain; ++i) {
      double t = 0.0;
      for (std::size_t j = 0; j < d; ++j) t += w[j] * Z[i * d + j];
      const double q = sigmoid(t);
      all_certain = (Y[i] ? q : 1.0 - q) > 1.0 - 1e-6;
    }
    model.separation_ = all_certain;
  }
  return model;
}

double LogisticDemand::predict(std::span<const double> x, double p) const {
  const std::size_t m = mean_.size() - 1;
  double t = w_.back();
  for (std::size_t j = 0; j <= m; ++j) {
    if (scale_[j] > 0.0) t += w_[j] * ((j < m ? x[j] : p) - mean_[j]) / scale_[j];
  }
  return clip01(sigmoid(t));
}

std::vector<double> LogisticDemand::weights() const {
  const std::size_t cols = mean_.size();
  std::vector<double> out(cols + 1, 0.0);
  double bias = w_.back();
  for (std::size_t j = 0; j < cols; ++j) {
    if (scale_[j] > 0.0) {
      out[j] = w_[j] / scale_[j];
      bias -= w_[j] * mean_[j] / scale_[j];
    }
  }
  out[cols] = bias;
  return out;
}

// ------------------------------------------------------------------ kernel

KernelDemand fit_kernel_demand(const Dataset& data, std::optional<std::vector<double>> bandwidths) {
  const std::size_t n = data.size(), m = data.feature_dim();
  if (n < 50) throw Error("fit_kernel_demand: needs at least 50 samples");
  KernelDemand k;
  k.m_ = m;
  if (bandwidths) {
    if (bandwidths->size() != m + 1) throw Error("fit_kernel_demand: need one bandwidth per feature plus price");
    for (double h : *bandwidths) {
      if (!(h > 0.0)) throw Error("fit_kernel_demand: bandwidths must be > 0");
    }
    k.h_ = *bandwidths;
  } else {
    k.h_.resize(m + 1);
    const double shrink = 1.06 * std::pow(static_cast<double>(n), -0.2);
    for (std::size_t j = 0; j <= m; ++j) {
      double s = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += j < m ? data.features(i)[j] : data.prices()[i];
      const double mu = s / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double v = (j < m ? data.features(i)[j] : data.prices()[i]) - mu;
        ss += v * v;
      }
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      // A constant column carries no information; any positive bandwidth works.
      k.h_[j] = sd > 0.0 ? shrink * sd : 1.0;
    }
  }
  k.inv_h_.resize(m + 1);
  for (std::size_t j = 0; j <= m; ++j) k.inv_h_[j] = 1.0 / k.h_[j];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& P = data.prices();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return P[a] < P[b]; });
  k.X_.resize(n * m);
  k.P_.resize(n);
  k.Y_.resize(n);
  double sy = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = order[r];
    std::copy_n(data.features(i).data(), m, k.X_.data() + r * m);
    k.P_[r] = P[i];
    k.Y_[r] = data.sold()[i];
    sy += k.Y_[r];
  }
  k.mean_y_ = sy / static_cast<double>(n);
  return k;
}

double KernelDemand::predict(std::span<const double> x, double p) const {
  const std::size_t n = P_.size(), m = m_;
  const double ihp = inv_h_[m];
  auto accumulate = [&](std::size_t b, std::size_t e, bool prune, double& sw, double& swy) {
    for (std::size_t r = b; r < e; ++r) {
      const double zp = (P_[r] - p) * ihp;
      double z2 = zp * zp;
      const double* xr = X_.data() + r * m;
      for (std::size_t j = 0; j < m && (!prune || z2 <= kCutoff2); ++j) {
        const double dz = (xr[j] - x[j]) * inv_h_[j];
        z2 += dz * dz;
      }
      if (prune && z2 > kCutoff2) continue;
      const double w = std::exp(-0.5 * z2);
      sw += w;
      swy += w * Y_[r];
    }
  };
  const double half = kCutoff * h_[m];
  const auto lo = static_cast<std::size_t>(std::lower_bound(P_.begin(), P_.end(), p - half) - P_.begin());
  const auto hi = static_cast<std::size_t>(std::upper_bound(P_.begin(), P_.end(), p + half) - P_.begin());
  double sw = 0.0, swy = 0.0;
  accumulate(lo, hi, true, sw, swy);
  // Pruned points carry at most n e^{-cutoff^2/2} weight in total; when the kept
  // weight is not overwhelmingly larger, redo the sum exactly.
  if (sw < static_cast<double>(n) * std::exp(-0.5 * kCutoff2) * 1e9) {
    sw = swy = 0.0;
    accumulate(0, n, false, sw, swy);
  }
  if (!(sw >= 1e-300)) return mean_y_;
  return clip01(swy / sw);
}

DemandKind parse_demand_kind(const std::string& s) {
  if (s == "logistic") return DemandKind::logistic;
  if (s == "kernel") return DemandKind::kernel;
  throw Error("unknown demand model '" + s + "' (expected logistic or kernel)");
}

std::unique_ptr<DemandModel> fit_demand(DemandKind kind, const Dataset& data) {
  if (kind == DemandKind::logistic) return std::make_unique<LogisticDemand>(fit_logistic_demand(data));
  return std::make_unique<KernelDemand>(fit_kernel_demand(data));
}

// ---------------------------------------------------------------- learners

double estimated_revenue(const DemandModel& demand, const LinearPolicy& policy, std::span<const double> X) {
  const std::size_t m = policy.feature_dim();
  if (m == 0 || X.size() % m != 0 || X.empty()) throw Error("estimated_revenue: feature shape mismatch");
  const std::size_t n = X.size() / m;
  const double s = parallel::chunked_sum(n, [&](std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      std::span<const double> x{X.data() + i * m, m};
      const double pi = policy.price(x);
      acc += pi * demand.predict(x, pi);
    }
    return acc;
  });
  return s / static_cast<double>(n);
}

namespace {

std::vector<std::vector<double>> default_starts(std::size_t dim, const std::vector<std::vector<double>>& starts) {
  if (!starts.empty()) return starts;
  return {std::vector<double>(dim, 0.5)};
}

void require_propensities(const Dataset& data, const char* who) {
  if (data.empty()) throw Error(std::string(who) + ": empty dataset");
  if (auto rep = validate_dataset(data); !rep.ok()) {
    throw Error(std::string(who) + ": invalid dataset: " + rep.summary());
  }
}

}  // namespace

FitResult direct_method_policy(const DemandModel& demand, const Dataset& data, const SolverConfig& cfg,
                               const std::vector<std::vector<double>>& starts) {
  if (data.empty()) throw Error("direct_method_policy: empty dataset");
  const std::size_t m = data.feature_dim();
  const auto& X = data.feature_matrix();
  auto objective = [&](std::span<const double> th) {
    LinearPolicy pol{{th.begin(), th.end()}, false};
    return estimated_revenue(demand, pol, X);
  };
  return fit_nonconvex(objective, m, cfg, default_starts(m, starts));
}

FitResult kernel_ipw_policy(const Dataset& data, double bandwidth, const SolverConfig& cfg,
                            const std::vector<std::vector<double>>& starts) {
  require_propensities(data, "kernel_ipw_policy");
  const kernels::RiskProblem prob(LossSpec::kernel_ipw(bandwidth), data, cfg.weight_cap);
  auto objective = [&](std::span<const double> th) { return prob.value(th); };
  return fit_nonconvex(objective, data.feature_dim(), cfg, default_starts(data.feature_dim(), starts));
}

FitResult model_free_policy(const Dataset& data, const SolverConfig& cfg,
                            const std::vector<std::vector<double>>& starts) {
  if (data.empty()) throw Error("model_free_policy: empty dataset");
  const kernels::RiskProblem prob(LossSpec::model_free(), data, cfg.weight_cap);
  auto objective = [&](std::span<const double> th) { return prob.value(th); };
  return fit_nonconvex(objective, data.feature_dim(), cfg, default_starts(data.feature_dim(), starts));
}

FitResult eps_insensitive_policy(const Dataset& data, std::optional<double> c1, std::optional<double> c2,
                                 const SolverConfig& cfg, std::optional<std::vector<double>> theta0) {
  return fit_convex(LossSpec::eps_insensitive(c1, c2), data, cfg, std::move(theta0));
}

// ------------------------------------------------------- cross-validation

std::vector<LossSpec> default_cv_grid(LossKind kind) {
  std::vector<LossSpec> g;
  switch (kind) {
    case LossKind::hinge:
      for (int k = 1; k <= 10; ++k) g.push_back(LossSpec::hinge(k / 10.0));
      break;
    case LossKind::quantile:
      for (int k = 0; k < 10; ++k) g.push_back(LossSpec::quantile(0.05 + k / 10.0));
      break;
    case LossKind::eps_insensitive:
      for (double c1 : {1.1, 1.3, 1.6, 2.0}) {
        for (double c2 : {0.9, 0.7, 0.4, 0.0}) g.push_back(LossSpec::eps_insensitive(c1, c2));
      }
      break;
    default: throw Error("default_cv_grid: only hinge, quantile and eps_insensitive are cross-validated");
  }
  return g;
}

namespace {

// Smaller key wins an exact revenue tie.
std::pair<double, double> tie_key(const LossSpec& s) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (s.kind()) {
    case LossKind::hinge: return {std::abs(s.param() - 0.8234), s.param()};
    case LossKind::quantile: return {std::abs(s.param() - 0.209), s.param()};
    case LossKind::eps_insensitive: return {s.c1().value_or(inf), s.c2().value_or(-inf)};
    default: return {0.0, 0.0};
  }
}

}  // namespace

CvResult cross_validate(const std::vector<LossSpec>& grid, const Dataset& data, const DemandModel& demand,
                        const SolverConfig& cfg, const CvOptions& opt) {
  if (grid.empty()) throw Error("cross_validate: grid must be nonempty");
  for (const auto& s : grid) {
    if (!s.is_convex()) throw Error("cross_validate: " + s.name() + " is not a convex loss");
  }
  if (data.empty()) throw Error("cross_validate: empty dataset");
  if (!(opt.holdout_fraction >= 0.0 && opt.holdout_fraction < 1.0)) {
    throw Error("cross_validate: holdout_fraction must be in [0, 1)");
  }
  const std::size_t n = data.size(), m = data.feature_dim();

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(opt.seed, {0x63765f6576616cULL}));
  std::optional<Dataset> fit_part;
  if (opt.holdout_fraction > 0.0) {
    const auto held = static_cast<std::size_t>(std::llround(opt.holdout_fraction * static_cast<double>(n)));
    if (held == 0 || held == n) throw Error("cross_validate: holdout leaves an empty part");
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::size_t> keep(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(held));
    std::sort(keep.begin(), keep.end());
    fit_part = data.subset(keep);
    idx.erase(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(held));
  }
  if (opt.max_eval_points > 0 && idx.size() > opt.max_eval_points) {
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(opt.max_eval_points);
  }
  std::sort(idx.begin(), idx.end());
  std::vector<double> Xeval;
  Xeval.reserve(idx.size() * m);
  for (std::size_t i : idx) Xeval.insert(Xeval.end(), data.features(i).begin(), data.features(i).end());
  const Dataset& train = fit_part ? *fit_part : data;

  CvResult res;
  res.grid = grid;
  res.policies.resize(grid.size());
  res.estimated_revenues.resize(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  const auto g = static_cast<long long>(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < g; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      std::optional<std::vector<double>> th0;
      if (opt.theta0) th0 = std::vector<double>(m, *opt.theta0);
      res.policies[i] = fit_convex(grid[i], train, cfg, th0).policy;
      res.estimated_revenues[i] = estimated_revenue(demand, res.policies[i], Xeval);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double a = res.estimated_revenues[k], b = res.estimated_revenues[res.chosen_index];
    if (a > b || (a == b && tie_key(grid[k]) < tie_key(grid[res.chosen_index]))) res.chosen_index = k;
  }
  return res;
}

}  // namespace pricing
