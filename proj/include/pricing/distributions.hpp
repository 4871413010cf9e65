#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pricing/core.hpp"

namespace pricing {

/// Valuation law described by its survival function S(p) = P(V >= p).
///
/// S is left-continuous, so at a jump the purchase happens at the jump price
/// and S(v) for step_at(v) is 1. Internally the survival is a sequence of
/// pieces on (lo, hi]; log-linear pieces cover every builtin except the
/// linear segment of uniform(a, b).
class ValuationDistribution {
 public:
  enum class Kind { uniform, shifted_exponential, step_at, piecewise_exponential, custom };

  /// Piece of the survival on (lo, hi]. For loglinear S = exp(a + b (p - lo)),
  /// for linear S = a + b (p - lo), for custom S = fn(p) clipped to [0, 1].
  struct Piece {
    enum class Form { loglinear, linear, custom } form = Form::loglinear;
    double lo = 0.0, hi = 0.0;
    double a = 0.0, b = 0.0;
  };

  static ValuationDistribution uniform(double a, double b);
  /// V = location + Exponential(mean = scale). scale == 0 degenerates to step_at(location).
  static ValuationDistribution shifted_exponential(double location, double scale);
  static ValuationDistribution step_at(double v);
  /// Log-linear pieces. breaks = {0 = b0 < b1 < ... < bk}; on (b_i, b_{i+1}]
  /// ln S = log_start[i] + slope[i] (p - b_i). The last piece runs to `end`
  /// (possibly +inf, which needs slope < 0 for a finite mean); S = 0 beyond.
  static ValuationDistribution piecewise_exponential(std::vector<double> breaks, std::vector<double> log_start,
                                                     std::vector<double> slope,
                                                     double end = std::numeric_limits<double>::infinity(),
                                                     std::string label = "piecewise_exponential");
  /// User survival on [0, upper]; S = 0 beyond upper. Values are clipped to [0, 1].
  static ValuationDistribution custom(std::function<double(double)> survival, double upper,
                                      std::string label = "custom");

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  double survival(double p) const;
  /// Right limit S(p+).
  double survival_right(double p) const;
  /// -dS/dp on the smooth part (jumps excluded).
  double density(double p) const;
  /// Jump locations and sizes (point masses).
  std::vector<std::pair<double, double>> atoms() const;

  /// Where the support ends: last finite piece end, or +inf for an exponential tail.
  double support_upper() const { return pieces_.back().hi; }
  /// Point beyond which S < 1e-12 (equals support_upper() when that is finite).
  double effective_upper() const;
  /// Piece boundaries inside (0, effective_upper()].
  std::vector<double> breakpoints() const;

  /// Value of piece k at p, ignoring which piece p belongs to.
  double piece_value(std::size_t k, double p) const;

 private:
  ValuationDistribution() = default;
  Kind kind_ = Kind::custom;
  std::string label_;
  std::vector<Piece> pieces_;
  std::shared_ptr<const std::function<double(double)>> fn_;
};

/// p * S(p).
double expected_revenue(const ValuationDistribution& dist, double p);

/// Integral of S over [0, p].
double cumulative_survival(const ValuationDistribution& dist, double p);
/// E[V] = integral of S over [0, inf). Throws for an infinite-mean tail.
double mean_valuation(const ValuationDistribution& dist);

struct PriceOptimum {
  double price = 0.0;
  double revenue = 0.0;
};
/// Global maximizer of p S(p); ties go to the smaller price.
PriceOptimum optimal_price(const ValuationDistribution& dist);

/// c * E[V], the population minimizer of the hinge pricing loss.
double hinge_price(const ValuationDistribution& dist, double c);
/// p with integral_0^p S = (1 - tau) E[V], the population minimizer of the quantile loss.
double quantile_price(const ValuationDistribution& dist, double tau);

struct LogConcavityReport {
  struct Violation {
    double a, b;
    double excess;  // 0.5 (ln S(a) + ln S(b)) - ln S((a+b)/2)
  };
  std::size_t pairs_checked = 0;
  std::size_t violation_count = 0;
  std::vector<Violation> violations;  // first few only
  bool ok() const { return violation_count == 0; }
};

/// Midpoint log-concavity check over all grid pairs where S > 1e-12.
LogConcavityReport survival_logconcavity_check(const ValuationDistribution& dist, std::size_t grid_size);

}  // namespace pricing
