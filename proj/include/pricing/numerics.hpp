#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace pricing::numerics {

struct Integral {
  double value = 0.0;
  std::size_t intervals = 0;
  bool budget_exhausted = false;
};

/// Adaptive Simpson with Richardson correction. The absolute tolerance is
/// split across subintervals; at most max_intervals leaf intervals are used.
Integral adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-13,
                          std::size_t max_intervals = 10000);

struct Minimum {
  double x = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

/// Golden-section search for a unimodal f on [a, b].
template <class F>
Minimum golden_section_minimize(F&& f, double a, double b, double x_tol = 1e-12, int max_iter = 300) {
  constexpr double inv_phi = 0.6180339887498948482;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > x_tol * (1.0 + std::abs(a) + std::abs(b)) * 0.5; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
}

/// Scans f over an increasing grid, then refines by golden section inside the
/// cell pair around the best grid point. Ties favour the smaller abscissa.
template <class F>
Minimum grid_golden_minimize(F&& f, std::span<const double> grid, double x_tol = 1e-12) {
  Minimum best;
  std::size_t k = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v < best.value) {
      best = {grid[i], v};
      k = i;
    }
  }
  if (grid.size() < 2) return best;
  const double lo = grid[k == 0 ? 0 : k - 1];
  const double hi = grid[k + 1 < grid.size() ? k + 1 : k];
  const Minimum r = golden_section_minimize(f, lo, hi, x_tol);
  if (r.value < best.value) best = r;
  return best;
}

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double a, double b, std::size_t n);

}  // namespace pricing::numerics

namespace pricing::numerics {

/// Solves A x = b (A row-major m x m) by Gaussian elimination with partial
/// pivoting. Throws std::runtime_error when A is numerically singular.
std::vector<double> solve_linear(std::vector<double> A, std::vector<double> b);

/// Least squares fit of y on the rows of X (row-major, n x m) via the normal equations.
std::vector<double> least_squares(std::span<const double> X, std::span<const double> y, std::size_t m);

}  // namespace pricing::numerics
