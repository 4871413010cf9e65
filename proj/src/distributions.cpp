#include "pricing/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "pricing/numerics.hpp"

namespace pricing {

namespace {

constexpr double kTailCut = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace

ValuationDistribution ValuationDistribution::uniform(double a, double b) {
  if (!(a >= 0.0) || !(b > a) || !std::isfinite(b)) throw Error("uniform valuation: need 0 <= a < b < inf");
  ValuationDistribution d;
  d.kind_ = Kind::uniform;
  d.label_ = "uniform";
  if (a > 0.0) d.pieces_.push_back({Piece::Form::loglinear, 0.0, a, 0.0, 0.0});
  d.pieces_.push_back({Piece::Form::linear, a, b, 1.0, -1.0 / (b - a)});
  return d;
}

ValuationDistribution ValuationDistribution::shifted_exponential(double location, double scale) {
  if (!(location >= 0.0) || !(scale >= 0.0) || !std::isfinite(location) || !std::isfinite(scale)) {
    throw Error("shifted_exponential valuation: need location >= 0 and scale >= 0");
  }
  if (scale == 0.0) {
    auto d = step_at(location);
    d.kind_ = Kind::shifted_exponential;
    d.label_ = "shifted_exponential";
    return d;
  }
  ValuationDistribution d;
  d.kind_ = Kind::shifted_exponential;
  d.label_ = "shifted_exponential";
  if (location > 0.0) d.pieces_.push_back({Piece::Form::loglinear, 0.0, location, 0.0, 0.0});
  d.pieces_.push_back({Piece::Form::loglinear, location, kInf, 0.0, -1.0 / scale});
  return d;
}

ValuationDistribution ValuationDistribution::step_at(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error("step_at valuation: need 0 < v < inf");
  ValuationDistribution d;
  d.kind_ = Kind::step_at;
  d.label_ = "step_at";
  d.pieces_.push_back({Piece::Form::loglinear, 0.0, v, 0.0, 0.0});
  return d;
}

ValuationDistribution ValuationDistribution::piecewise_exponential(std::vector<double> breaks,
                                                                   std::vector<double> log_start,
                                                                   std::vector<double> slope, double end,
                                                                   std::string label) {
  const std::size_t k = breaks.size();
  if (k == 0 || log_start.size() != k || slope.size() != k) {
    throw Error("piecewise_exponential: breaks, log_start and slope must have equal nonzero length");
  }
  if (breaks[0] != 0.0) throw Error("piecewise_exponential: first break must be 0");
  if (!(end > breaks.back())) throw Error("piecewise_exponential: end must exceed the last break");
  ValuationDistribution d;
  d.kind_ = Kind::piecewise_exponential;
  d.label_ = std::move(label);
  double prev_end_log = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double hi = i + 1 < k ? breaks[i + 1] : end;
    if (!(hi > breaks[i])) throw Error("piecewise_exponential: breaks must be strictly increasing");
    if (!(slope[i] <= 0.0)) throw Error("piecewise_exponential: slopes must be <= 0");
    if (log_start[i] > prev_end_log + 1e-12) throw Error("piecewise_exponential: survival must not increase");
    d.pieces_.push_back({Piece::Form::loglinear, breaks[i], hi, log_start[i], slope[i]});
    if (std::isfinite(hi)) prev_end_log = log_start[i] + slope[i] * (hi - breaks[i]);
  }
  return d;
}

ValuationDistribution ValuationDistribution::custom(std::function<double(double)> survival, double upper,
                                                    std::string label) {
  if (!(upper > 0.0) || !std::isfinite(upper)) throw Error("custom valuation: upper must be finite and > 0");
  ValuationDistribution d;
  d.kind_ = Kind::custom;
  d.label_ = std::move(label);
  d.fn_ = std::make_shared<const std::function<double(double)>>(std::move(survival));
  d.pieces_.push_back({Piece::Form::custom, 0.0, upper, 0.0, 0.0});
  return d;
}

double ValuationDistribution::piece_value(std::size_t k, double p) const {
  const Piece& pc = pieces_[k];
  switch (pc.form) {
    case Piece::Form::loglinear: return std::exp(pc.a + pc.b * (p - pc.lo));
    case Piece::Form::linear: return clip01(pc.a + pc.b * (p - pc.lo));
    case Piece::Form::custom: return clip01((*fn_)(p));
  }
  return 0.0;
}

double ValuationDistribution::survival(double p) const {
  if (p <= 0.0) return 1.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    if (p <= pieces_[k].hi) return piece_value(k, p);
  }
  return 0.0;
}

double ValuationDistribution::survival_right(double p) const {
  if (p < 0.0) return 1.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    if (p < pieces_[k].hi) return piece_value(k, p);
  }
  return 0.0;
}

double ValuationDistribution::density(double p) const {
  if (p < 0.0) return 0.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const Piece& pc = pieces_[k];
    if (p < pc.hi || (p == pc.hi && k + 1 == pieces_.size() && !std::isfinite(pc.hi))) {
      switch (pc.form) {
        case Piece::Form::loglinear: return -pc.b * std::exp(pc.a + pc.b * (p - pc.lo));
        case Piece::Form::linear: return -pc.b;
        case Piece::Form::custom: {
          const double h = 1e-6 * std::max(1.0, p);
          const double lo = std::max(pc.lo, p - h), hi = std::min(pc.hi, p + h);
          return -(piece_value(k, hi) - piece_value(k, lo)) / (hi - lo);
        }
      }
    }
  }
  return 0.0;
}

std::vector<std::pair<double, double>> ValuationDistribution::atoms() const {
  std::vector<std::pair<double, double>> out;
  const double at0 = 1.0 - piece_value(0, 0.0);
  if (at0 > 0.0) out.emplace_back(0.0, at0);
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const double hi = pieces_[k].hi;
    if (!std::isfinite(hi)) continue;
    const double left = piece_value(k, hi);
    const double right = k + 1 < pieces_.size() ? piece_value(k + 1, hi) : 0.0;
    if (left - right > 0.0) out.emplace_back(hi, left - right);
  }
  return out;
}

double ValuationDistribution::effective_upper() const {
  const Piece& last = pieces_.back();
  if (std::isfinite(last.hi)) return last.hi;
  // Only log-linear pieces can be unbounded.
  if (!(last.b < 0.0)) return kInf;
  const double p = last.lo + (std::log(kTailCut) - last.a) / last.b;
  return std::max(p, last.lo);
}

std::vector<double> ValuationDistribution::breakpoints() const {
  std::vector<double> out;
  const double u = effective_upper();
  for (const auto& pc : pieces_) {
    if (pc.lo > 0.0 && pc.lo <= u) out.push_back(pc.lo);
    if (std::isfinite(pc.hi) && pc.hi <= u) out.push_back(pc.hi);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double expected_revenue(const ValuationDistribution& dist, double p) {
  if (p < 0.0) throw Error("expected_revenue: price must be >= 0");
  if (p == 0.0) return 0.0;
  return p * dist.survival(p);
}

namespace {

// Integral of piece k over [a, b] within the piece.
double piece_integral(const ValuationDistribution& dist, std::size_t k, double a, double b) {
  if (!(b > a)) return 0.0;
  auto f = [&](double p) { return dist.piece_value(k, p); };
  return numerics::adaptive_simpson(f, a, b).value;
}

}  // namespace

double cumulative_survival(const ValuationDistribution& dist, double p) {
  if (p <= 0.0) return 0.0;
  const auto& pieces = dist.pieces();
  double total = 0.0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto& pc = pieces[k];
    if (pc.lo >= p) break;
    const double hi = std::min(pc.hi, p);
    if (std::isfinite(hi)) {
      total += piece_integral(dist, k, pc.lo, hi);
      continue;
    }
    // Unbounded exponential tail: quadrature up to the cut, closed form beyond.
    if (!(pc.b < 0.0)) throw Error("valuation distribution has an infinite mean (non-decaying tail)");
    const double cut = dist.effective_upper();
    total += piece_integral(dist, k, pc.lo, cut);
    total += dist.piece_value(k, cut) / (-pc.b);
  }
  return total;
}

double mean_valuation(const ValuationDistribution& dist) { return cumulative_survival(dist, kInf); }

PriceOptimum optimal_price(const ValuationDistribution& dist) {
  const double upper = dist.effective_upper();
  if (!std::isfinite(upper)) throw Error("optimal_price: survival has no decaying tail");
  std::vector<double> grid = numerics::linspace(0.0, upper, 10001);
  for (double b : dist.breakpoints()) grid.push_back(b);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  auto neg_rev = [&](double p) { return -(p * dist.survival(p)); };
  const auto m = numerics::grid_golden_minimize(neg_rev, grid, 1e-13);
  return {m.x, m.x * dist.survival(m.x)};
}

double hinge_price(const ValuationDistribution& dist, double c) {
  if (!(c > 0.0 && c <= 1.0)) throw Error("hinge_price: c must lie in (0, 1]");
  return c * mean_valuation(dist);
}

double quantile_price(const ValuationDistribution& dist, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error("quantile_price: tau must lie in (0, 1)");
  const double mean = mean_valuation(dist);
  const double target = (1.0 - tau) * mean;
  double lo = 0.0, hi = dist.effective_upper();
  while (cumulative_survival(dist, hi) < target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cumulative_survival(dist, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LogConcavityReport survival_logconcavity_check(const ValuationDistribution& dist, std::size_t grid_size) {
  if (grid_size < 3) throw Error("survival_logconcavity_check: grid_size must be >= 3");
  double upper = dist.effective_upper();
  if (!std::isfinite(upper)) upper = 1e3;
  std::vector<double> pts, logs;
  for (double p : numerics::linspace(0.0, upper, grid_size)) {
    const double s = dist.survival(p);
    if (s > kTailCut) {
      pts.push_back(p);
      logs.push_back(std::log(s));
    }
  }
  LogConcavityReport rep;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      ++rep.pairs_checked;
      const double sm = dist.survival(0.5 * (pts[i] + pts[j]));
      const double lm = sm > 0.0 ? std::log(sm) : -kInf;
      const double excess = 0.5 * (logs[i] + logs[j]) - lm;
      if (excess > 1e-9) {
        ++rep.violation_count;
        if (rep.violations.size() < 20) rep.violations.push_back({pts[i], pts[j], excess});
      }
    }
  }
  return rep;
}

}  // namespace pricing
