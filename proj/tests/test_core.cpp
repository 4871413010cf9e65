#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pricing/core.hpp"
#include "pricing/numerics.hpp"

using namespace pricing;

namespace {

Dataset small_dataset() {
  Dataset d(2);
  d.add(std::vector<double>{1.0, 2.0}, 1.5, 1, 0.5);
  d.add(std::vector<double>{1.5, 1.2}, 2.5, 0, 0.5);
  d.add(std::vector<double>{1.9, 1.1}, 2.0, 1, 0.5);
  return d;
}

bool has_message(const ValidationReport& r, const std::string& needle) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.message.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("validate_dataset") {
  SUBCASE("clean data") { CHECK(validate_dataset(small_dataset()).ok()); }
  SUBCASE("zero propensity") {
    Dataset d = small_dataset();
    d.add(std::vector<double>{1.0, 1.0}, 2.0, 1, 0.0);
    const auto r = validate_dataset(d);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].index == 3);
    CHECK(has_message(r, "overlap violated"));
  }
  SUBCASE("sold not binary") {
    Dataset d = small_dataset();
    d.add(std::vector<double>{1.0, 1.0}, 2.0, 2, 0.5);
    CHECK(has_message(validate_dataset(d), "sale indicator not binary"));
  }
  SUBCASE("nonpositive price") {
    Dataset d = small_dataset();
    d.add(std::vector<double>{1.0, 1.0}, 0.0, 1, 0.5);
    CHECK_FALSE(validate_dataset(d).ok());
  }
  SUBCASE("feature dim mismatch") {
    std::vector<Sample> s{{{1.0, 2.0}, {2.0, 1, 0.5}}, {{1.0}, {2.0, 1, 0.5}}};
    const auto r = validate_samples(s, 2);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].index == 1);
    Dataset d(2);
    CHECK_THROWS_AS(d.add(std::vector<double>{1.0}, 2.0, 1, 0.5), Error);
  }
}

TEST_CASE("propensity densities") {
  CHECK(PropensityModel::uniform(1, 3).density(2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(PropensityModel::triangular(1, 5, 5).density(5.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(PropensityModel::lognormal(0, 1).density(1.0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)));
  CHECK(PropensityModel::lognormal(0, 1).density(1.0) == doctest::Approx(0.39894).epsilon(1e-5));
  CHECK(PropensityModel::uniform(1, 3).density(0.5) == 0.0);
  CHECK(PropensityModel::exponential_rate(0.4).density(0.0) == doctest::Approx(0.4));
  CHECK(PropensityModel::exponential(2.5).density(1.0) == doctest::Approx(0.4 * std::exp(-0.4)));

  CHECK_THROWS_AS(PropensityModel::uniform(3, 1), Error);
  CHECK_THROWS_AS(PropensityModel::triangular(1, 6, 5), Error);
  CHECK_THROWS_AS(PropensityModel::exponential(0.0), Error);
  CHECK_THROWS_AS(PropensityModel::lognormal(0.0, 0.0), Error);
}

TEST_CASE("propensity parse round trip") {
  for (const char* s : {"uniform:1,3", "triangular:1,5,5", "exponential:2.5", "exponential:2.5,1", "lognormal:0.5,0.3"}) {
    const auto m = PropensityModel::parse(s);
    const auto again = PropensityModel::parse(m.to_string());
    CHECK(again.kind() == m.kind());
    CHECK(again.params() == m.params());
  }
  const auto r = PropensityModel::parse("exponential_rate:0.4");
  CHECK(r.kind() == PropensityModel::Kind::exponential);
  CHECK(r.params()[0] == doctest::Approx(2.5));
  CHECK_THROWS_AS(PropensityModel::parse("gamma:1,2"), Error);
  CHECK_THROWS_AS(PropensityModel::parse("uniform:1"), Error);
}

TEST_CASE("propensity densities integrate to one") {
  const std::vector<PropensityModel> models{
      PropensityModel::uniform(1, 3), PropensityModel::triangular(1, 5, 5), PropensityModel::triangular(0, 1, 4),
      PropensityModel::exponential(2.5), PropensityModel::exponential(0.7, 3.0), PropensityModel::lognormal(0, 1),
      PropensityModel::lognormal(1.2, 0.4)};
  for (const auto& m : models) {
    CAPTURE(m.to_string());
    auto [lo, hi] = m.support();
    double tail = 0.0;
    if (std::isinf(hi)) {
      // truncate where the density is negligible, then add the remaining mass analytically
      hi = std::max(lo, 1.0);
      while (m.density(hi) >= 1e-14 || m.cdf(hi) < 0.5) hi *= 1.5;
      tail = 1.0 - m.cdf(hi);
    }
    // breakpoints of the piecewise-defined densities
    std::vector<double> cuts{lo, hi};
    if (m.kind() == PropensityModel::Kind::triangular) cuts.insert(cuts.begin() + 1, m.params()[1]);
    double total = tail;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] > cuts[i]) {
        total += numerics::adaptive_simpson([&](double p) { return m.density(p); }, cuts[i], cuts[i + 1], 1e-10)
                     .value;
      }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("propensity sampling: KS statistic below 0.01") {
  const std::vector<PropensityModel> models{PropensityModel::uniform(1, 3), PropensityModel::triangular(1, 5, 5),
                                            PropensityModel::exponential(2.5), PropensityModel::exponential(1.0, 5.0),
                                            PropensityModel::lognormal(0.5, 0.3)};
  Rng rng(12345);
  for (const auto& m : models) {
    CAPTURE(m.to_string());
    std::vector<double> x(100000);
    const auto [lo, hi] = m.support();
    for (auto& v : x) {
      v = m.sample(rng);
      REQUIRE(v >= lo);
      REQUIRE(v <= hi);
    }
    std::sort(x.begin(), x.end());
    double ks = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double F = m.cdf(x[i]);
      ks = std::max({ks, std::abs(F - i / n), std::abs((i + 1) / n - F)});
    }
    CHECK(ks < 0.01);
  }
}

TEST_CASE("fit_lognormal_propensity") {
  const double e = std::exp(1.0);
  CHECK_THROWS_WITH_AS(fit_lognormal_propensity(std::vector<double>{e, e, e, e}),
                       doctest::Contains("degenerate price history"), Error);
  CHECK_THROWS_AS(fit_lognormal_propensity(std::vector<double>{1.0, -2.0}), Error);
  const auto m = fit_lognormal_propensity(std::vector<double>{1.0, e * e});
  CHECK(m.params()[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.params()[1] == doctest::Approx(1.0).epsilon(1e-14));

  Rng rng(99);
  const auto truth = PropensityModel::lognormal(0.5, 0.3);
  std::vector<double> p(100000);
  for (auto& v : p) v = truth.sample(rng);
  const auto fit = fit_lognormal_propensity(p);
  CHECK(std::abs(fit.params()[0] - 0.5) < 0.01);
  CHECK(std::abs(fit.params()[1] - 0.3) < 0.01);
}

TEST_CASE("csv parsing") {
  SUBCASE("three rows with propensity") {
    std::istringstream in("x0,x1,price,sold,propensity\n1,2,1.5,1,0.5\n1.5,1.2,2.5,0,0.5\n1.9,1.1,2,1,0.5\n");
    const Dataset d = parse_csv(in);
    CHECK(d.feature_dim() == 2);
    CHECK(d.size() == 3);
    CHECK(d.has_propensities());
    CHECK(d == small_dataset());
  }
  SUBCASE("bad sold value names the line") {
    std::istringstream in("x0,price,sold\n1,2,1\n1,2,yes\n");
    CHECK_THROWS_WITH_AS(parse_csv(in, "f.csv"), doctest::Contains("3"), Error);
  }
  SUBCASE("missing column") {
    std::istringstream in("x0,price\n1,2\n");
    CHECK_THROWS_AS(parse_csv(in), Error);
  }
  SUBCASE("propensity filled from a model afterwards") {
    std::istringstream in("x0,price,sold\n1,2,1\n1,1.2,0\n1,2.9,1\n");
    Dataset d = parse_csv(in);
    CHECK_FALSE(d.has_propensities());
    d.assign_propensities(PropensityModel::uniform(1, 3));
    for (double p : d.propensities()) CHECK(p == 0.5);
  }
}

TEST_CASE("csv round trip is exact") {
  Dataset d(3);
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x{u(rng), u(rng) * 1e-7, u(rng) * 1e9};
    d.add(x, u(rng) + 0.1, i % 2, 1.0 / (1.0 + u(rng)));
  }
  const auto path = std::filesystem::temp_directory_path() / "pricing_roundtrip.csv";
  save_csv(d, path);
  const Dataset back = load_csv(path);
  CHECK(back == d);
  save_csv(back, path);
  CHECK(load_csv(path) == d);
  std::filesystem::remove(path);
}

TEST_CASE("linear policy") {
  LinearPolicy p{{0.5, 2.0}, false};
  CHECK(p.price(std::vector<double>{2.0, 1.0}) == 3.0);
  LinearPolicy q{{0.5, 2.0, 1.0}, true};
  CHECK(q.feature_dim() == 2);
  CHECK(q.price(std::vector<double>{2.0, 1.0}) == 4.0);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.7) == "0.7");
}
