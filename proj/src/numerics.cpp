#include "pricing/numerics.hpp"

#include <algorithm>
#include <stdexcept>

namespace pricing::numerics {

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  std::size_t max_intervals;
  std::size_t intervals = 1;
  bool exhausted = false;
};

double simpson(double a, double fa, double fm, double b, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double refine(SimpsonState& st, double a, double fa, double m, double fm, double b, double fb, double whole,
              double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = st.f(lm), frm = st.f(rm);
  const double left = simpson(a, fa, flm, m, fm);
  const double right = simpson(m, fm, frm, b, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol || st.intervals >= st.max_intervals) {
    if (depth > 0 && std::abs(delta) > 15.0 * tol) st.exhausted = true;
    return left + right + delta / 15.0;
  }
  ++st.intervals;
  return refine(st, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         refine(st, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

Integral adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                          std::size_t max_intervals) {
  if (a == b) return {};
  if (a > b) {
    auto r = adaptive_simpson(f, b, a, abs_tol, max_intervals);
    r.value = -r.value;
    return r;
  }
  SimpsonState st{f, max_intervals};
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = simpson(a, fa, fm, b, fb);
  const double v = refine(st, a, fa, m, fm, b, fb, whole, abs_tol, 60);
  return {v, st.intervals, st.exhausted};
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {a};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = b;
  return g;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("logspace: endpoints must be positive");
  auto g = linspace(std::log(a), std::log(b), n);
  for (auto& v : g) v = std::exp(v);
  if (n) {
    g.front() = a;
    g.back() = b;
  }
  return g;
}

std::vector<double> solve_linear(std::vector<double> A, std::vector<double> b) {
  const std::size_t m = b.size();
  if (A.size() != m * m) throw std::invalid_argument("solve_linear: dimension mismatch");
  double scale = 0.0;
  for (double v : A) scale = std::max(scale, std::abs(v));
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(A[r * m + col]) > std::abs(A[piv * m + col])) piv = r;
    }
    if (!(std::abs(A[piv * m + col]) > 1e-13 * scale)) throw std::runtime_error("solve_linear: singular system");
    if (piv != col) {
      for (std::size_t j = 0; j < m; ++j) std::swap(A[col * m + j], A[piv * m + j]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = A[r * m + col] / A[col * m + col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < m; ++j) A[r * m + j] -= f * A[col * m + j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(m);
  for (std::size_t i = m; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < m; ++j) s -= A[i * m + j] * x[j];
    x[i] = s / A[i * m + i];
  }
  return x;
}

std::vector<double> least_squares(std::span<const double> X, std::span<const double> y, std::size_t m) {
  const std::size_t n = y.size();
  if (X.size() != n * m) throw std::invalid_argument("least_squares: dimension mismatch");
  std::vector<double> A(m * m, 0.0), b(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = X.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      b[j] += x[j] * y[i];
      for (std::size_t k = 0; k < m; ++k) A[j * m + k] += x[j] * x[k];
    }
  }
  return solve_linear(std::move(A), std::move(b));
}

}  // namespace pricing::numerics
