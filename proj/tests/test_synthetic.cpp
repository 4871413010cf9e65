#include <cmath>
#include <vector>

#include "doctest.h"
#include "pricing/synthetic.hpp"

using namespace pricing;

TEST_CASE("g functions") {
  const std::vector<double> x{1.0, 2.0}, means{1.5, 1.5};
  CHECK(g_linear(x) == doctest::Approx(1.5));
  CHECK(g_step(std::vector<double>{1.8, 1.9}, means) == 1.0);
  CHECK(g_step(std::vector<double>{1.1, 1.2}, means) == 0.0);
  CHECK(g_step(std::vector<double>{1.8, 1.2}, means) == 0.5);
}

TEST_CASE("generate: uniform logging gives propensity 0.5, Y = 1{P <= V}") {
  auto sc = Scenario::uniform_band(GKind::linear);
  sc.n = 5000;
  sc.seed = 3;
  const auto g = generate(sc);
  REQUIRE(g.data.size() == 5000);
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    CHECK(g.data.propensities()[i] == doctest::Approx(0.5));
    CHECK(g.data.sold()[i] == (g.data.prices()[i] <= g.valuations[i] ? 1 : 0));
    const auto x = g.data.features(i);
    CHECK(x[0] >= 1.0);
    CHECK(x[1] <= 2.0);
  }
}

TEST_CASE("generate is deterministic per seed") {
  auto sc = Scenario::shifted_exponential(GKind::step);
  sc.n = 1000;
  sc.seed = 11;
  const auto a = generate(sc), b = generate(sc);
  CHECK(a.data == b.data);
  CHECK(a.valuations == b.valuations);
  sc.seed = 12;
  CHECK_FALSE(generate(sc).data == a.data);
}

TEST_CASE("empirical sale rate matches the analytic demand") {
  for (auto sc : {Scenario::uniform_band(GKind::linear), Scenario::uniform_band(GKind::step),
                  Scenario::shifted_exponential(GKind::linear), Scenario::shifted_exponential(GKind::step)}) {
    sc.n = 100000;
    sc.seed = 5;
    const auto g = generate(sc);
    double sales = 0.0, expected = 0.0;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      sales += g.data.sold()[i];
      expected += g.instance.conditional_survival(g.data.features(i), g.data.prices()[i]);
    }
    const double n = static_cast<double>(sc.n);
    const double q = expected / n;
    const double sigma = std::sqrt(q * (1.0 - q) / n);
    CHECK(std::abs(sales / n - q) < 3.0 * sigma);
  }
}

TEST_CASE("uniform_band demand matches in price bins") {
  auto sc = Scenario::uniform_band(GKind::linear);
  sc.n = 100000;
  sc.seed = 21;
  const auto g = generate(sc);
  // four price bins, comparing counts with the summed analytic probabilities
  std::vector<double> sold(4, 0.0), expect(4, 0.0), var(4, 0.0);
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    const double p = g.data.prices()[i];
    const auto b = std::min<std::size_t>(3, static_cast<std::size_t>((p - 1.0) / 0.5));
    const double q = std::clamp((g_linear(g.data.features(i)) + 3.0 - p) / 3.0, 0.0, 1.0);
    sold[b] += g.data.sold()[i];
    expect[b] += q;
    var[b] += q * (1.0 - q);
  }
  for (int b = 0; b < 4; ++b) CHECK(std::abs(sold[b] - expect[b]) < 3.0 * std::sqrt(var[b]));
}

TEST_CASE("price far above valuations: no sales") {
  auto sc = Scenario::uniform_band(GKind::linear);
  sc.price_law = PropensityModel::uniform(1e6, 1e6 + 1.0);
  sc.n = 2000;
  const auto g = generate(sc);
  for (int y : g.data.sold()) CHECK(y == 0);
}

TEST_CASE("price stream is isolated from features and valuations") {
  auto sc = Scenario::uniform_band(GKind::linear);
  sc.n = 3000;
  sc.seed = 99;
  const auto a = generate(sc);
  sc.price_law = PropensityModel::exponential_rate(0.4, 1.0);
  const auto b = generate(sc);
  CHECK(a.data.feature_matrix() == b.data.feature_matrix());
  CHECK(a.valuations == b.valuations);
  CHECK(a.data.prices() != b.data.prices());
}

TEST_CASE("pointwise optimal prices") {
  auto sc = Scenario::uniform_band(GKind::linear);
  sc.n = 100;
  const auto g = generate(sc);
  for (double x0 : {1.0, 1.5, 2.0}) {
    const std::vector<double> x{x0, 1.2};
    CHECK(g.instance.pointwise_optimal_price(x) == doctest::Approx((g_linear(x) + 3.0) / 2.0).epsilon(1e-9));
  }
  auto se = Scenario::shifted_exponential(GKind::linear);
  se.n = 100;
  const auto h = generate(se);
  CHECK(h.instance.pointwise_optimal_price(std::vector<double>{1.5, 1.5}) == doctest::Approx(5.0));
}

TEST_CASE("oracle: constant valuation 7 with x = 1") {
  Scenario sc;
  sc.family = ValuationFamily::constant;
  sc.constant_value = 7.0;
  sc.feature_dim = 1;
  sc.feature_lo = sc.feature_hi = 1.0;
  sc.n = 100;
  const auto g = generate(sc);
  SolverConfig cfg;
  cfg.multistarts = 3;
  const auto o = oracle_policy(g.instance, 10000, 1, cfg);
  REQUIRE(o.policy.theta.size() == 1);
  CHECK(o.policy.theta[0] <= 7.0);
  CHECK(o.policy.theta[0] == doctest::Approx(7.0).epsilon(1e-4));
  CHECK(o.valuation_objective >= o.ls_start_objective - 1e-12);
}

TEST_CASE("oracle: uniform_band/linear is near the analytic best linear policy") {
  auto sc = Scenario::uniform_band(GKind::linear);
  sc.n = 100;
  sc.seed = 4;
  const auto g = generate(sc);
  SolverConfig cfg;
  cfg.multistarts = 3;
  const auto a = oracle_policy(g.instance, 100000, 8, cfg);
  CHECK(a.valuation_objective >= a.ls_start_objective);
  // best linear policy on the population is about (0.74, 0.74)
  CHECK(a.policy.theta[0] == doctest::Approx(0.74).epsilon(0.1));
  CHECK(a.policy.theta[1] == doctest::Approx(0.74).epsilon(0.1));
  const auto b = oracle_policy(g.instance, 100000, 8, cfg);
  CHECK(a.policy.theta == b.policy.theta);
  CHECK(a.valuation_objective == b.valuation_objective);
}

TEST_CASE("distance_to_oracle") {
  Rng rng(5);
  auto sc = Scenario::uniform_band(GKind::linear);
  const auto X = sample_features(sc, 1000, rng);
  const LinearPolicy o{{0.7, 0.9}, false};
  CHECK(distance_to_oracle(o, o, X) == 0.0);

  const double eps = 0.05;
  const LinearPolicy scaled{{0.7 * (1 + eps), 0.9 * (1 + eps)}, false};
  double expect = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) expect += std::abs(eps * (0.7 * X[2 * i] + 0.9 * X[2 * i + 1]));
  CHECK(distance_to_oracle(scaled, o, X) == doctest::Approx(expect / 1000.0).epsilon(1e-12));

  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const LinearPolicy A{{u(rng), u(rng)}, false}, B{{u(rng), u(rng)}, false}, C{{u(rng), u(rng)}, false};
    CHECK(distance_to_oracle(A, C, X) <= distance_to_oracle(A, B, X) + distance_to_oracle(B, C, X) + 1e-12);
    CHECK(distance_to_oracle(A, B, X) == doctest::Approx(distance_to_oracle(B, A, X)));
  }
}
