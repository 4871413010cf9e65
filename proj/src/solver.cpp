#include "pricing/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pricing/kernels.hpp"
#include "pricing/rng.hpp"

namespace pricing {

namespace {

double norm2(std::span<const double> v) {
  // scaled so huge entries do not overflow
  double big = 0.0;
  for (double x : v) big = std::max(big, std::abs(x));
  if (big == 0.0 || !std::isfinite(big)) return big;
  double s = 0.0;
  for (double x : v) s += (x / big) * (x / big);
  return big * std::sqrt(s);
}

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

std::string divergence_message(int iteration, double value) {
  std::ostringstream os;
  os << "solver diverged at iteration " << iteration << " (objective " << value << ")";
  return os.str();
}

}  // namespace

DivergenceError::DivergenceError(int iteration, double value)
    : Error(divergence_message(iteration, value)), iteration_(iteration) {}

double subgradient_step(const SolverConfig& cfg, double step_scale, int t) {
  if (cfg.reg_lambda > 0.0) return 1.0 / (cfg.reg_lambda * t);
  return step_scale / std::sqrt(static_cast<double>(t));
}

void project_to_ball(std::span<double> theta, double radius) {
  const double n = norm2(theta);
  if (n > radius) {
    const double f = radius / n;
    for (auto& v : theta) v *= f;
  }
}

FitResult fit_convex(const LossSpec& spec, const Dataset& data, const SolverConfig& cfg,
                     std::optional<std::vector<double>> theta0, bool intercept) {
  if (!spec.is_convex()) throw Error("fit_convex: " + spec.name() + " is not a convex loss");
  if (data.empty()) throw Error("fit_convex: empty dataset");
  if (auto rep = validate_dataset(data); !rep.ok()) throw Error("fit_convex: invalid dataset: " + rep.summary());
  if (!(cfg.tol > 0.0) || !(cfg.norm_cap > 0.0) || !(cfg.reg_lambda >= 0.0) || cfg.window < 1 ||
      !(cfg.min_step_ratio > 0.0 && cfg.min_step_ratio <= 1.0)) {
    throw Error("fit_convex: invalid solver configuration");
  }

  const kernels::RiskProblem problem(spec, data, cfg.weight_cap, intercept);
  const std::size_t dim = problem.theta_dim();
  std::vector<double> theta = theta0.value_or(std::vector<double>(dim, 0.0));
  if (theta.size() != dim) throw Error("fit_convex: initial theta has wrong dimension");
  project_to_ball(theta, cfg.norm_cap);

  const double lambda = cfg.reg_lambda;
  const double step_scale =
      cfg.step_scale.value_or(data.mean_price() / std::sqrt(static_cast<double>(data.feature_dim())));
  auto objective = [&](std::span<const double> th) { return problem.value(th) + lambda * sq_norm(th); };

  FitResult res;
  res.policy = {theta, intercept};
  res.objective = objective(theta);
  if (!std::isfinite(res.objective)) throw DivergenceError(0, res.objective);

  std::vector<double> grad(dim), avg(theta);
  std::size_t avg_count = 1;
  // Epochs of averaged projected subgradient. Each starts at the best averaged
  // iterate so far; when an epoch stalls the step factor is halved. Piecewise
  // linear risks have sharp minima, and a fixed s/sqrt(t) schedule alone never
  // resolves them finely.
  const int min_epoch = 2 * cfg.window;
  double factor = 1.0;
  int total = 0, local = 0;
  double window_start_best = res.objective;

  while (total < cfg.max_iters) {
    ++total;
    ++local;
    const double v = problem.value_and_gradient(theta, grad);
    if (!std::isfinite(v)) throw DivergenceError(total, v);
    for (std::size_t j = 0; j < dim; ++j) grad[j] += 2.0 * lambda * theta[j];
    const double gnorm = norm2(grad);
    if (gnorm == 0.0) {
      // zero subgradient: optimal
      const double obj = objective(theta);
      if (obj <= res.objective) res.policy.theta = theta, res.objective = obj;
      res.converged = true;
      break;
    }
    const double step = factor * subgradient_step(cfg, step_scale, local);
    const double scale = lambda > 0.0 ? step : step / gnorm;
    for (std::size_t j = 0; j < dim; ++j) theta[j] -= scale * grad[j];
    project_to_ball(theta, cfg.norm_cap);

    // averaging restarts at powers of two (the latest half of the epoch)
    if ((local & (local - 1)) == 0) {
      avg = theta;
      avg_count = 1;
    } else {
      ++avg_count;
      const double w = 1.0 / static_cast<double>(avg_count);
      for (std::size_t j = 0; j < dim; ++j) avg[j] += w * (theta[j] - avg[j]);
    }

    if (local % cfg.window == 0) {
      const double obj = objective(avg);
      if (!std::isfinite(obj)) throw DivergenceError(total, obj);
      if (obj < res.objective) {
        res.objective = obj;
        res.policy.theta = avg;
      }
      if (cfg.record_trace) res.trace.push_back(res.objective);
      const double improvement = window_start_best - res.objective;
      window_start_best = res.objective;
      if (local >= min_epoch && improvement <= cfg.tol * std::max(std::abs(res.objective), 1e-300)) {
        factor *= 0.5;
        if (factor < cfg.min_step_ratio) {
          res.converged = true;
          break;
        }
        theta = res.policy.theta;
        avg = theta;
        avg_count = 1;
        local = 0;
      }
    }
  }
  res.iterations = total;
  return res;
}

FitResult fit_nonconvex(const PolicyObjective& objective, std::size_t dim, const SolverConfig& cfg,
                        const std::vector<std::vector<double>>& starts) {
  if (cfg.multistarts < 1) throw Error("fit_nonconvex: multistarts must be >= 1");
  if (dim == 0) throw Error("fit_nonconvex: dimension must be positive");
  for (const auto& s : starts) {
    if (s.size() != dim) throw Error("fit_nonconvex: start has wrong dimension");
  }

  std::vector<std::vector<double>> all = starts;
  Rng rng = make_stream(cfg.seed, Stream::solver);
  const std::vector<double> base = starts.empty() ? std::vector<double>(dim, 0.5) : starts.front();
  double radius = 0.5;
  for (double v : base) radius = std::max(radius, std::abs(v));
  std::uniform_real_distribution<double> unif(-radius, radius);
  while (all.size() < static_cast<std::size_t>(cfg.multistarts)) {
    std::vector<double> s(dim);
    for (std::size_t j = 0; j < dim; ++j) s[j] = base[j] + unif(rng);
    all.push_back(std::move(s));
  }

  auto eval = [&](std::span<const double> th) {
    const double v = objective(th);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };

  FitResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  int total_evals = 0;
  for (auto x : all) {
    project_to_ball(x, cfg.norm_cap);
    double fx = eval(x);
    int evals = 1;
    double step = 0.1;
    if (cfg.ps_initial_step) {
      step = *cfg.ps_initial_step;
    } else {
      double inf_norm = 0.0;
      for (double v : x) inf_norm = std::max(inf_norm, std::abs(v));
      step = std::max(0.5 * inf_norm, 0.1);
    }
    std::vector<double> y(dim);
    while (step >= cfg.ps_min_step && evals < cfg.ps_max_evals) {
      bool improved = false;
      for (std::size_t j = 0; j < dim && !improved; ++j) {
        for (double sign : {1.0, -1.0}) {
          y = x;
          y[j] += sign * step;
          project_to_ball(y, cfg.norm_cap);
          const double fy = eval(y);
          ++evals;
          if (fy > fx) {
            x = y;
            fx = fy;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= cfg.ps_shrink;
    }
    total_evals += evals;
    if (cfg.record_trace) best.trace.push_back(fx);
    if (!have_best || fx > best.objective) {
      have_best = true;
      best.objective = fx;
      best.policy = {x, false};
      best.converged = step < cfg.ps_min_step;
    }
  }
  best.iterations = total_evals;
  return best;
}

double bound_lambda(double tau_or_c, double d, double B, std::size_t n) {
  if (!(d > 0.0) || !(B > 0.0) || n == 0) throw Error("bound_lambda: requires d > 0, B > 0, n >= 1");
  const double r = std::max(tau_or_c, 1.0 - tau_or_c);
  return std::sqrt(2.0 * r * r / (d * d * B * B * static_cast<double>(n)));
}

double lipschitz_constant(double tau_or_c, double d) {
  if (!(d > 0.0)) throw Error("lipschitz_constant: requires d > 0");
  return std::max(tau_or_c, 1.0 - tau_or_c) / d;
}

std::size_t sample_complexity(double tau_or_c, double d, double B, double eps) {
  if (!(d > 0.0) || !(eps > 0.0) || !(B > 0.0)) throw Error("sample_complexity: requires d, B, eps > 0");
  const double r = std::max(tau_or_c, 1.0 - tau_or_c);
  const double v = 8.0 * r * r * B * B / (d * d * eps * eps);
  // Guard against representation error pushing an exact integer over the ceiling.
  return static_cast<std::size_t>(std::ceil(v * (1.0 - 1e-12)));
}

}  // namespace pricing
