#include <doctest.h>

#include <cmath>

#include "pricing/bounds.hpp"
#include "pricing/distributions.hpp"
#include "pricing/numerics.hpp"

using namespace pricing;

namespace {

std::vector<ValuationDistribution> builtins() {
  return {ValuationDistribution::uniform(0, 1),
          ValuationDistribution::uniform(1, 4),
          ValuationDistribution::shifted_exponential(5, 3),
          ValuationDistribution::shifted_exponential(0, 1.5),
          ValuationDistribution::step_at(1.0),
          bounds::worst_case_distribution(bounds::WorstCase::hinge_above, 0.7),
          bounds::worst_case_distribution(bounds::WorstCase::hinge_below, 0.7),
          bounds::worst_case_distribution(bounds::WorstCase::quantile_above, 0.3)};
}

}  // namespace

TEST_CASE("survival basics") {
  for (const auto& d : builtins()) {
    CAPTURE(d.label());
    CHECK(d.survival(0.0) == 1.0);
    double prev = 1.0;
    for (double p = 0.0; p < 20.0; p += 0.01) {
      const double s = d.survival(p);
      CHECK(s >= 0.0);
      CHECK(s <= prev);
      prev = s;
    }
  }
  const auto step = ValuationDistribution::step_at(1.0);
  CHECK(step.survival(1.0) == 1.0);
  CHECK(step.survival(1.0 + 1e-12) == 0.0);
  CHECK(step.survival_right(1.0) == 0.0);
}

TEST_CASE("expected revenue examples") {
  CHECK(expected_revenue(ValuationDistribution::uniform(0, 1), 0.5) == doctest::Approx(0.25));
  for (const auto& d : builtins()) CHECK(expected_revenue(d, 0.0) == 0.0);
  const auto step = ValuationDistribution::step_at(1.0);
  CHECK(expected_revenue(step, 1.0) == 1.0);
  CHECK(expected_revenue(step, 1.0 + 1e-9) == 0.0);
}

TEST_CASE("mean valuation examples") {
  CHECK(std::abs(mean_valuation(ValuationDistribution::uniform(0, 2)) - 1.0) <= 1e-9);
  CHECK(std::abs(mean_valuation(ValuationDistribution::shifted_exponential(5, 3)) - 8.0) <= 1e-9);
  const auto case2 = bounds::worst_case_distribution(bounds::WorstCase::hinge_above, 0.5);
  CHECK(std::abs(mean_valuation(case2) - 2.0) <= 1e-9);
  CHECK(std::abs(mean_valuation(ValuationDistribution::step_at(1.7)) - 1.7) <= 1e-9);
  // non-decaying tail: infinite mean
  const auto flat = ValuationDistribution::piecewise_exponential({0.0}, {0.0}, {0.0});
  CHECK_THROWS_AS(mean_valuation(flat), Error);
}

TEST_CASE("optimal price examples") {
  auto r = optimal_price(ValuationDistribution::uniform(0, 1));
  CHECK(r.price == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.revenue == doctest::Approx(0.25).epsilon(1e-12));
  r = optimal_price(ValuationDistribution::shifted_exponential(5, 3));
  CHECK(r.price == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(r.revenue == doctest::Approx(5.0).epsilon(1e-12));
  r = optimal_price(ValuationDistribution::step_at(1.0));
  CHECK(r.price == 1.0);
  CHECK(r.revenue == 1.0);
}

TEST_CASE("optimal price dominates random prices") {
  Rng rng(4);
  for (const auto& d : builtins()) {
    CAPTURE(d.label());
    const auto r = optimal_price(d);
    std::uniform_real_distribution<double> u(0.0, d.effective_upper());
    for (int i = 0; i < 1000; ++i) CHECK(r.revenue >= expected_revenue(d, u(rng)) - 1e-12);
  }
}

TEST_CASE("hinge price") {
  CHECK(hinge_price(ValuationDistribution::uniform(0, 2), 0.8) == doctest::Approx(0.8).epsilon(1e-9));
  for (const auto& d : builtins()) {
    CHECK(hinge_price(d, 1.0) == mean_valuation(d));
    CHECK(hinge_price(d, 0.3) == doctest::Approx(0.3 * hinge_price(d, 1.0)).epsilon(1e-14));
  }
  for (double c : {0.5, 0.7, 0.9}) {
    const auto d = bounds::worst_case_distribution(bounds::WorstCase::hinge_above, c);
    CHECK(hinge_price(d, c) == doctest::Approx(c * (bounds::hinge_t(c) + 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("quantile price") {
  CHECK(std::abs(quantile_price(ValuationDistribution::uniform(0, 1), 0.5) - (1 - std::sqrt(0.5))) < 1e-8);
  // limits
  const auto u = ValuationDistribution::uniform(0, 1);
  CHECK(quantile_price(u, 1e-6) > 0.99);
  CHECK(quantile_price(u, 1 - 1e-6) < 0.01);
  // worst case for quantile above p*, tau <= 0.5
  const double tau = 0.3;
  const auto b = bounds::quantile_bound(tau);
  const double z = b.z_argmin;
  const auto d = bounds::worst_case_distribution(bounds::WorstCase::quantile_above, tau);
  CHECK(quantile_price(d, tau) == doctest::Approx(std::log(z) / (1 - z / tau) + 1).epsilon(1e-7));
  // strictly decreasing in tau
  for (const auto& dist : builtins()) {
    CAPTURE(dist.label());
    double prev = std::numeric_limits<double>::infinity();
    for (double t = 0.05; t < 0.96; t += 0.05) {
      const double p = quantile_price(dist, t);
      CHECK(p < prev);
      prev = p;
    }
  }
}

TEST_CASE("total mass from -dS is one") {
  for (const auto& d : builtins()) {
    CAPTURE(d.label());
    double mass = 0.0;
    for (const auto& [at, size] : d.atoms()) mass += size;
    std::vector<double> cuts{0.0};
    for (double b : d.breakpoints()) cuts.push_back(b);
    const double upper = d.effective_upper();
    if (cuts.back() < upper) cuts.push_back(upper);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      mass += numerics::adaptive_simpson([&](double p) { return d.density(p); }, cuts[i], cuts[i + 1], 1e-12).value;
    }
    mass += d.survival_right(upper);  // tail beyond the cut
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("log-concavity check") {
  CHECK(survival_logconcavity_check(ValuationDistribution::uniform(0, 1), 200).ok());
  CHECK(survival_logconcavity_check(ValuationDistribution::shifted_exponential(5, 3), 200).ok());
  const auto bumpy = ValuationDistribution::custom(
      [](double p) { return std::clamp(std::exp(-p * p) * (1 + 0.9 * std::sin(5 * p)), 0.0, 1.0); }, 6.0);
  const auto rep = survival_logconcavity_check(bumpy, 200);
  CHECK_FALSE(rep.ok());
  CHECK(rep.violation_count > 0);
  CHECK(rep.pairs_checked > 0);
  CHECK_THROWS_AS(survival_logconcavity_check(ValuationDistribution::uniform(0, 1), 2), Error);
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(ValuationDistribution::uniform(2, 1), Error);
  CHECK_THROWS_AS(ValuationDistribution::shifted_exponential(-1, 1), Error);
  CHECK_THROWS_AS(ValuationDistribution::step_at(0.0), Error);
}
