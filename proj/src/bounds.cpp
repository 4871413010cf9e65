#include "pricing/bounds.hpp"

#include <cmath>
#include <limits>
#include <tuple>

#include "pricing/numerics.hpp"

namespace pricing::bounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kInnerGrid = 401;

// Inner minimum of the quantile z-branch over (tau, 1].
std::pair<double, double> quantile_z_min(double tau) {
  std::vector<double> grid(kInnerGrid - 1);
  for (std::size_t k = 1; k < kInnerGrid; ++k) {
    grid[k - 1] = tau + (1.0 - tau) * static_cast<double>(k) / static_cast<double>(kInnerGrid - 1);
  }
  grid.back() = 1.0;
  auto f = [tau](double z) { return quantile_z_objective(tau, z); };
  const auto m = numerics::grid_golden_minimize(f, grid, 1e-12);
  return {m.value, m.x};
}

// Inner minimum of the hinge z-branch over z <= -2c.
std::pair<double, double> hinge_z_min(double c) {
  if (c == 1.0) return {std::exp(-1.0), -kInf};  // infimum as z -> -inf, not attained
  const double z = std::min(hinge_z_closed_form(c), -2.0 * c);
  return {hinge_z_objective(c, z), z};
}

template <class Eval>
RobustParameter maximize_on_grid(double lo, double hi, double step, Eval&& eval) {
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> vals(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < count; ++k) vals[static_cast<std::size_t>(k)] = eval(lo + step * static_cast<double>(k));
  std::size_t best = 0;
  for (std::size_t k = 1; k < vals.size(); ++k) {
    if (vals[k] > vals[best]) best = k;
  }
  const double a = lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
  const double b = std::min(hi, lo + step * static_cast<double>(best + 1));
  auto neg = [&](double x) { return -eval(x); };
  const auto g = numerics::golden_section_minimize(neg, a, b, 1e-12);
  RobustParameter r{lo + step * static_cast<double>(best), vals[best]};
  if (-g.value > r.value) r = {g.x, eval(g.x)};
  return r;
}

}  // namespace

std::string to_string(Branch b) { return b == Branch::below_opt ? "below_opt" : "above_opt"; }

double f_branch_objective(double c, double f) {
  const double u = f - 1.0;
  if (u == 0.0) return c;
  // (f-1)/ln f via log1p keeps full accuracy as f -> 1.
  return c * std::exp(c * u) * (u / std::log1p(u)) / f;
}

std::pair<double, double> f_branch_min(double c) {
  const auto grid = numerics::linspace(1e-6, 1.0 - 1e-6, kInnerGrid);
  auto f = [c](double x) { return f_branch_objective(c, x); };
  const auto m = numerics::grid_golden_minimize(f, grid, 1e-12);
  // The f -> 1 limit equals c and is the infimum whenever c <= 0.5.
  if (c <= m.value) return {c, 1.0};
  return {m.value, m.x};
}

double hinge_z_objective(double c, double z) {
  return c * z * std::exp(-z * (1.0 / c - 1.0) - 1.0) / (z + c);
}

double hinge_z_closed_form(double c) {
  if (!(c > 0.0 && c < 1.0)) throw Error("hinge_z_closed_form: c must lie in (0, 1)");
  return -0.5 * c * (std::sqrt((c - 5.0) / (c - 1.0)) + 1.0);
}

double quantile_z_objective(double tau, double z) {
  if (z <= tau) return kInf;
  return (z * tau * (std::log(z) + 1.0) - z * z) / (tau - z);
}

BoundValue hinge_bound(double c) {
  if (!(c > 0.0 && c <= 1.0)) throw Error("hinge_bound: c must lie in (0, 1]");
  BoundValue b;
  std::tie(b.f_value, b.f_argmin) = f_branch_min(c);
  std::tie(b.z_value, b.z_argmin) = hinge_z_min(c);
  if (b.f_value <= b.z_value) {
    b.value = b.f_value;
    b.branch = Branch::below_opt;
    b.inner_argmin = b.f_argmin;
  } else {
    b.value = b.z_value;
    b.branch = Branch::above_opt;
    b.inner_argmin = b.z_argmin;
  }
  return b;
}

BoundValue quantile_bound(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error("quantile_bound: tau must lie in (0, 1)");
  BoundValue b;
  std::tie(b.f_value, b.f_argmin) = f_branch_min(1.0 - tau);
  std::tie(b.z_value, b.z_argmin) = quantile_z_min(tau);
  if (b.f_value <= b.z_value) {
    b.value = b.f_value;
    b.branch = Branch::below_opt;
    b.inner_argmin = b.f_argmin;
  } else {
    b.value = b.z_value;
    b.branch = Branch::above_opt;
    b.inner_argmin = b.z_argmin;
  }
  return b;
}

double hinge_alternative_term(double c) { return (c + 1.0) * std::exp(-c); }

LossFamily parse_family(const std::string& s) {
  if (s == "hinge") return LossFamily::hinge;
  if (s == "quantile") return LossFamily::quantile;
  throw Error("unknown bound family '" + s + "' (expected hinge or quantile)");
}

RobustParameter robust_parameter(LossFamily kind) {
  if (kind == LossFamily::hinge) {
    return maximize_on_grid(1e-4, 1.0, 1e-4, [](double c) { return hinge_bound(c).value; });
  }
  return maximize_on_grid(1e-4, 1.0 - 1e-4, 1e-4, [](double t) { return quantile_bound(t).value; });
}

BoundCurve bound_curve(LossFamily kind, const std::vector<double>& grid) {
  BoundCurve out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error("bound_curve: grid must be strictly increasing");
  }
  out.parameter_grid = grid;
  out.values.resize(grid.size());
  out.branch.resize(grid.size());
  const auto n = static_cast<long long>(grid.size());
  // Validate up front so the parallel loop never throws.
  for (double p : grid) {
    if (kind == LossFamily::hinge && !(p > 0.0 && p <= 1.0)) throw Error("hinge bound: c must lie in (0, 1]");
    if (kind == LossFamily::quantile && !(p > 0.0 && p < 1.0)) throw Error("quantile bound: tau must lie in (0, 1)");
  }
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const BoundValue b = kind == LossFamily::hinge ? hinge_bound(grid[k]) : quantile_bound(grid[k]);
    out.values[k] = b.value;
    out.branch[k] = b.branch;
  }
  return out;
}

WorstCase parse_worst_case(const std::string& s) {
  if (s == "hinge_below") return WorstCase::hinge_below;
  if (s == "hinge_above") return WorstCase::hinge_above;
  if (s == "quantile_below") return WorstCase::quantile_below;
  if (s == "quantile_above") return WorstCase::quantile_above;
  throw Error("unknown worst case '" + s + "' (expected hinge_below, hinge_above, quantile_below or quantile_above)");
}

std::string to_string(WorstCase k) {
  switch (k) {
    case WorstCase::hinge_below: return "hinge_below";
    case WorstCase::hinge_above: return "hinge_above";
    case WorstCase::quantile_below: return "quantile_below";
    case WorstCase::quantile_above: return "quantile_above";
  }
  return "?";
}

double hinge_t(double c) {
  if (!(c > 0.0 && c < 1.0)) throw Error("hinge_t: c must lie in (0, 1)");
  return 0.5 * (std::sqrt((c - 5.0) / (c - 1.0)) - 1.0);
}

ValuationDistribution worst_case_distribution(WorstCase kind, double param) {
  switch (kind) {
    case WorstCase::hinge_below: {
      if (!(param > 0.0 && param <= 1.0)) throw Error("hinge_below: c must lie in (0, 1]");
      const double g = f_branch_min(param).second;
      if (g >= 1.0) return ValuationDistribution::step_at(1.0);
      if (g < std::exp(-1.0)) {
        throw Error("hinge_below: requires g(c) >= e^-1; g(" + format_double(param) + ") = " + format_double(g));
      }
      return ValuationDistribution::piecewise_exponential({0.0}, {0.0}, {std::log(g)}, 1.0, "hinge_below");
    }
    case WorstCase::hinge_above: {
      if (!(param >= 0.5 && param < 1.0)) throw Error("hinge_above: requires 0.5 <= c < 1");
      const double t = hinge_t(param);
      return ValuationDistribution::piecewise_exponential({0.0, t}, {0.0, 0.0}, {0.0, -1.0},
                                                          std::numeric_limits<double>::infinity(), "hinge_above");
    }
    case WorstCase::quantile_below: {
      if (!(param > 0.0 && param < 1.0)) throw Error("quantile_below: tau must lie in (0, 1)");
      return ValuationDistribution::step_at(1.0);
    }
    case WorstCase::quantile_above: {
      if (!(param > 0.0 && param <= 0.5)) throw Error("quantile_above: requires 0 < tau <= 0.5");
      const double z = quantile_z_min(param).second;
      return ValuationDistribution::piecewise_exponential({0.0, 1.0}, {0.0, 0.0}, {0.0, 1.0 - z / param},
                                                          std::numeric_limits<double>::infinity(),
                                                          "quantile_above");
    }
  }
  throw Error("unknown worst case");
}

TightnessReport verify_tightness(WorstCase kind, double param) {
  const ValuationDistribution dist = worst_case_distribution(kind, param);
  TightnessReport r;
  r.kind = kind;
  r.parameter = param;
  const bool hinge = kind == WorstCase::hinge_below || kind == WorstCase::hinge_above;
  const bool below = kind == WorstCase::hinge_below || kind == WorstCase::quantile_below;
  const BoundValue b = hinge ? hinge_bound(param) : quantile_bound(param);
  r.theorem_bound = b.value;
  r.bound_value = below ? b.f_value : b.z_value;
  r.surrogate_price = hinge ? hinge_price(dist, param) : quantile_price(dist, param);
  const PriceOptimum opt = optimal_price(dist);
  r.optimal_price = opt.price;
  r.achieved_ratio = expected_revenue(dist, r.surrogate_price) / opt.revenue;
  r.gap = r.achieved_ratio - r.bound_value;
  return r;
}

}  // namespace pricing::bounds
