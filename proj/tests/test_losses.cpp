#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pricing/kernels.hpp"
#include "pricing/losses.hpp"

using namespace pricing;

namespace {

Observation obs(double P, int Y, double phi) { return {P, Y, phi}; }

}  // namespace

TEST_CASE("hinge loss examples") {
  CHECK(hinge_loss(2, obs(3, 1, 0.5), 1.0) == doctest::Approx(2.0));
  CHECK(hinge_loss(3, obs(2, 0, 1.0), 0.8) == doctest::Approx(1.0));
  for (int y : {0, 1}) CHECK(hinge_loss(2.7, obs(2.7, y, 0.3), 0.6) == 0.0);
}

TEST_CASE("quantile loss examples") {
  CHECK(quantile_loss(2, obs(3, 1, 1.0), 0.2) == doctest::Approx(0.8));
  CHECK(quantile_loss(4, obs(3, 0, 0.5), 0.25) == 0.0);
  CHECK(quantile_loss(4, obs(3, 1, 0.5), 0.25) == doctest::Approx(0.5));
}

TEST_CASE("eps-insensitive loss examples") {
  CHECK(eps_insensitive_loss(2, obs(1, 1, 1), 1.5, 0.5) == doctest::Approx(0.5));
  CHECK(eps_insensitive_loss(0.3, obs(1, 0, 1), 1.5, 0.5) == doctest::Approx(0.2));
  for (double pi : {1.0, 1.2, 1.5}) CHECK(eps_insensitive_loss(pi, obs(1, 1, 1), 1.5, 0.5) == 0.0);
  // absent parameters switch the outer arms off
  CHECK(eps_insensitive_loss(100, obs(1, 1, 1), std::nullopt, std::nullopt) == 0.0);
  CHECK(eps_insensitive_loss(-100, obs(1, 0, 1), std::nullopt, std::nullopt) == 0.0);
}

TEST_CASE("model-free and kernel IPW examples") {
  CHECK(model_free_objective(2, obs(3, 1, 1)) == 2.0);
  CHECK(model_free_objective(3, obs(3, 1, 1)) == 0.0);
  CHECK(model_free_objective(2, obs(3, 0, 1)) == 0.0);

  const double at0 = kernel_ipw_reward(2, obs(2, 1, 0.5), 0.2);
  CHECK(at0 == doctest::Approx(2.0 / (0.2 * 0.5 * std::sqrt(2 * std::numbers::pi))).epsilon(1e-14));
  CHECK(at0 == doctest::Approx(7.9788).epsilon(1e-4));
  CHECK(kernel_ipw_reward(2, obs(2, 0, 0.5), 0.2) == 0.0);
  CHECK(kernel_ipw_reward(2 + 5 * 0.2, obs(2, 1, 0.5), 0.2) <= 1e-4 * at0);
}

TEST_CASE("loss spec validation") {
  CHECK_THROWS_AS(LossSpec::hinge(0.0), Error);
  CHECK_THROWS_AS(LossSpec::hinge(1.1), Error);
  CHECK_NOTHROW(LossSpec::hinge(1.0));
  CHECK_THROWS_AS(LossSpec::quantile(1.0), Error);
  CHECK_THROWS_AS(LossSpec::eps_insensitive(1.0, 0.5), Error);
  CHECK_THROWS_AS(LossSpec::eps_insensitive(1.5, 1.0), Error);
  CHECK_THROWS_AS(LossSpec::kernel_ipw(0.0), Error);
  CHECK(LossSpec::hinge(0.5).is_convex());
  CHECK(LossSpec::quantile(0.5).is_convex());
  CHECK(LossSpec::eps_insensitive(std::nullopt, 0.5).is_convex());
  CHECK_FALSE(LossSpec::model_free().is_convex());
  CHECK_FALSE(LossSpec::kernel_ipw(0.2).is_convex());
}

TEST_CASE("subgradient examples") {
  CHECK(subgradient(LossSpec::hinge(1.0), 2, obs(3, 1, 0.5)) == doctest::Approx(-2.0));
  CHECK(subgradient(LossSpec::quantile(0.2), 4, obs(3, 1, 1)) == doctest::Approx(0.2));
  CHECK(subgradient(LossSpec::hinge(1.0), 3, obs(3, 1, 0.5)) == 0.0);
  CHECK_THROWS_AS(subgradient(LossSpec::model_free(), 3, obs(3, 1, 0.5)), Error);
  // kink convention: element closest to zero; [-cY/phi, (1-cY)/phi] contains 0 for c<=1
  CHECK(subgradient(LossSpec::hinge(0.4), 3, obs(3, 0, 0.5)) == 0.0);
  // eps kink at c1 P with Y=1: subdifferential [0, 1]
  CHECK(subgradient(LossSpec::eps_insensitive(1.5, 0.5), 1.5, obs(1, 1, 1)) == 0.0);
}

namespace {

struct RandomInput {
  Rng rng;
  std::uniform_real_distribution<double> price{0.5, 5.0}, pi{0.0, 6.0}, prop{0.1, 2.0}, unit{0.05, 0.95};
  explicit RandomInput(std::uint64_t seed) : rng(seed) {}
  Observation observation() { return {price(rng), static_cast<int>(rng() & 1), prop(rng)}; }
};

std::vector<LossSpec> convex_specs() {
  return {LossSpec::hinge(0.3),          LossSpec::hinge(1.0),
          LossSpec::quantile(0.209),     LossSpec::quantile(0.8),
          LossSpec::eps_insensitive(1.4, 0.6), LossSpec::eps_insensitive(std::nullopt, std::nullopt),
          LossSpec::eps_insensitive(2.0, std::nullopt)};
}

}  // namespace

TEST_CASE("midpoint convexity on 1e5 random triples") {
  for (const auto& spec : convex_specs()) {
    CAPTURE(spec.describe());
    RandomInput in(17);
    int bad = 0;
    for (int i = 0; i < 100000; ++i) {
      const auto o = in.observation();
      const double a = in.pi(in.rng), b = in.pi(in.rng);
      const double mid = pointwise_value(spec, 0.5 * (a + b), o);
      if (mid > 0.5 * (pointwise_value(spec, a, o) + pointwise_value(spec, b, o)) + 1e-12) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("subgradients match central differences away from kinks") {
  for (const auto& spec : convex_specs()) {
    CAPTURE(spec.describe());
    RandomInput in(23);
    int checked = 0;
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const auto o = in.observation();
      const double pi = in.pi(in.rng);
      std::vector<double> kinks{o.price};
      if (spec.c1()) kinks.push_back(*spec.c1() * o.price);
      if (spec.c2()) kinks.push_back(*spec.c2() * o.price);
      bool near = false;
      for (double k : kinks) near = near || std::abs(pi - k) <= 1e-3 * o.price;
      if (near) continue;
      const double h = 1e-6;
      const double fd = (pointwise_value(spec, pi + h, o) - pointwise_value(spec, pi - h, o)) / (2 * h);
      worst = std::max(worst, std::abs(fd - subgradient(spec, pi, o)));
      ++checked;
    }
    CHECK(checked > 15000);
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("eps(inf,-inf) equals phi times hinge(1) under uniform propensity") {
  RandomInput in(31);
  const auto eps = LossSpec::eps_insensitive(std::nullopt, std::nullopt);
  const auto hinge = LossSpec::hinge(1.0);
  for (double k : {0.5, 1.0, 0.25}) {
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      auto o = in.observation();
      o.propensity = k;
      const double pi = in.pi(in.rng);
      worst = std::max(worst, std::abs(pointwise_value(eps, pi, o) - k * pointwise_value(hinge, pi, o)));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("nonnegativity, zero quantile loss for unsold, scale equivariance") {
  RandomInput in(41);
  for (int i = 0; i < 5000; ++i) {
    const auto o = in.observation();
    const double pi = in.pi(in.rng);
    for (const auto& s : convex_specs()) CHECK(pointwise_value(s, pi, o) >= 0.0);
    if (!o.sold) CHECK(quantile_loss(pi, o, 0.3) == 0.0);
    const double a = 2.7;
    Observation scaled = o;
    scaled.price *= a;
    CHECK(hinge_loss(a * pi, scaled, 0.7) == doctest::Approx(a * hinge_loss(pi, o, 0.7)).epsilon(1e-12));
    CHECK(quantile_loss(a * pi, scaled, 0.3) == doctest::Approx(a * quantile_loss(pi, o, 0.3)).epsilon(1e-12));
  }
}

TEST_CASE("empirical risk") {
  Dataset one(1);
  one.add(std::vector<double>{1.0}, 2.0, 1, 0.5);
  const LinearPolicy at_price{{2.0}, false};
  CHECK(empirical_risk(LossSpec::hinge(0.7), at_price, one) == 0.0);
  CHECK(empirical_risk(LossSpec::quantile(0.3), at_price, one) == 0.0);

  Dataset d(2), dd(2);
  RandomInput in(3);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x{in.unit(in.rng) + 1, in.unit(in.rng) + 1};
    const auto o = in.observation();
    d.add(x, o.price, o.sold, o.propensity);
    dd.add(x, o.price, o.sold, o.propensity);
    dd.add(x, o.price, o.sold, o.propensity);
  }
  const LinearPolicy pol{{0.8, 0.6}, false};
  for (const auto& s : convex_specs()) {
    CHECK(empirical_risk(s, pol, dd) == doctest::Approx(empirical_risk(s, pol, d)).epsilon(1e-12));
    RiskOptions inf_cap;
    inf_cap.weight_cap = std::numeric_limits<double>::infinity();
    CHECK(empirical_risk(s, pol, d, inf_cap) == empirical_risk(s, pol, d));
  }
  // capping lowers weighted losses
  RiskOptions cap;
  cap.weight_cap = 1.0;
  CHECK(empirical_risk(LossSpec::hinge(0.8), pol, d, cap) < empirical_risk(LossSpec::hinge(0.8), pol, d));
  CHECK_THROWS_AS(empirical_risk(LossSpec::hinge(0.8), pol, Dataset(2)), Error);
}

TEST_CASE("parallel risk kernels match the serial reference") {
  for (std::size_t m : {2u, 3u}) {
    CAPTURE(m);
    Dataset d(m);
    RandomInput in(8 + m);
    for (int i = 0; i < 20000; ++i) {
      std::vector<double> x(m);
      for (auto& v : x) v = in.unit(in.rng) * 2;
      const auto o = in.observation();
      d.add(x, o.price, o.sold, o.propensity);
    }
    std::vector<LossSpec> specs = convex_specs();
    specs.push_back(LossSpec::model_free());
    specs.push_back(LossSpec::kernel_ipw(0.2));
    for (bool intercept : {false, true}) {
      std::vector<double> theta{0.7, 0.4, 0.9};
      theta.resize(m);
      if (intercept) theta.push_back(0.3);
      for (const auto& s : specs) {
        CAPTURE(s.describe());
        for (double cap : {std::numeric_limits<double>::infinity(), 3.0}) {
          const kernels::RiskProblem prob(s, d, cap, intercept);
          const double ser = kernels::risk_serial(s, theta, d, cap, intercept);
          CHECK(prob.value(theta) == doctest::Approx(ser).epsilon(1e-12));
          if (s.is_convex()) {
            std::vector<double> g(theta.size()), gs(theta.size());
            const double v = prob.value_and_gradient(theta, g);
            const double vs = kernels::risk_gradient_serial(s, theta, d, cap, gs, intercept);
            CHECK(v == doctest::Approx(vs).epsilon(1e-12));
            for (std::size_t j = 0; j < g.size(); ++j) CHECK(g[j] == doctest::Approx(gs[j]).epsilon(1e-12));
          }
        }
      }
    }
  }
}
