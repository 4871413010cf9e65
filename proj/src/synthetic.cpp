#include "pricing/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "pricing/numerics.hpp"

namespace pricing {

ValuationFamily parse_valuation_family(const std::string& s) {
  if (s == "uniform_band") return ValuationFamily::uniform_band;
  if (s == "shifted_exponential") return ValuationFamily::shifted_exponential;
  if (s == "constant") return ValuationFamily::constant;
  throw Error("unknown valuation family '" + s + "' (expected uniform_band, shifted_exponential or constant)");
}

GKind parse_g_kind(const std::string& s) {
  if (s == "linear") return GKind::linear;
  if (s == "step") return GKind::step;
  throw Error("unknown g kind '" + s + "' (expected linear or step)");
}

std::string to_string(ValuationFamily f) {
  switch (f) {
    case ValuationFamily::uniform_band: return "uniform_band";
    case ValuationFamily::shifted_exponential: return "shifted_exponential";
    case ValuationFamily::constant: return "constant";
  }
  return "?";
}

std::string to_string(GKind g) { return g == GKind::linear ? "linear" : "step"; }

Scenario Scenario::uniform_band(GKind g) {
  Scenario s;
  s.name = std::string("uniform_band_") + to_string(g);
  s.family = ValuationFamily::uniform_band;
  s.g = g;
  return s;
}

Scenario Scenario::shifted_exponential(GKind g) {
  Scenario s;
  s.name = std::string("shifted_exponential_") + to_string(g);
  s.family = ValuationFamily::shifted_exponential;
  s.g = g;
  s.feature_lo = 1.0;
  s.feature_hi = 5.0;
  s.price_law = PropensityModel::uniform(0.0, 15.0);
  return s;
}

double g_linear(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double g_step(std::span<const double> x, std::span<const double> feature_means) {
  if (x.size() != feature_means.size()) throw Error("g_step: feature dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] >= feature_means[j] ? 1.0 : 0.0;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double ScenarioInstance::g(std::span<const double> x) const {
  return scenario.g == GKind::linear ? g_linear(x) : g_step(x, feature_means);
}

ValuationDistribution ScenarioInstance::conditional_valuation(std::span<const double> x) const {
  switch (scenario.family) {
    case ValuationFamily::uniform_band: {
      const double g0 = g(x);
      return ValuationDistribution::uniform(g0, g0 + scenario.band_width);
    }
    case ValuationFamily::shifted_exponential:
      return ValuationDistribution::shifted_exponential(scenario.location, g(x));
    case ValuationFamily::constant: return ValuationDistribution::step_at(scenario.constant_value);
  }
  throw Error("unknown valuation family");
}

double ScenarioInstance::conditional_survival(std::span<const double> x, double p) const {
  switch (scenario.family) {
    case ValuationFamily::uniform_band: {
      const double g0 = g(x);
      if (p <= g0) return 1.0;
      return std::clamp((g0 + scenario.band_width - p) / scenario.band_width, 0.0, 1.0);
    }
    case ValuationFamily::shifted_exponential: {
      const double g0 = g(x);
      if (p <= scenario.location) return 1.0;
      return g0 > 0.0 ? std::exp(-(p - scenario.location) / g0) : 0.0;
    }
    case ValuationFamily::constant: return p <= scenario.constant_value ? 1.0 : 0.0;
  }
  return 0.0;
}

double ScenarioInstance::pointwise_optimal_price(std::span<const double> x) const {
  switch (scenario.family) {
    case ValuationFamily::uniform_band: {
      // p (g + w - p) / w peaks at (g + w)/2 when that lies above g.
      const double g0 = g(x), w = scenario.band_width;
      return g0 <= w ? 0.5 * (g0 + w) : g0;
    }
    case ValuationFamily::shifted_exponential: {
      const double g0 = g(x);
      return g0 <= scenario.location ? scenario.location : g0;
    }
    case ValuationFamily::constant: return scenario.constant_value;
  }
  return 0.0;
}

double ScenarioInstance::sample_valuation(std::span<const double> x, Rng& rng) const {
  switch (scenario.family) {
    case ValuationFamily::uniform_band: {
      std::uniform_real_distribution<double> u(0.0, scenario.band_width);
      return g(x) + u(rng);
    }
    case ValuationFamily::shifted_exponential: {
      const double g0 = g(x);
      if (g0 <= 0.0) return scenario.location;
      std::exponential_distribution<double> e(1.0 / g0);
      return scenario.location + e(rng);
    }
    case ValuationFamily::constant: return scenario.constant_value;
  }
  return 0.0;
}

std::vector<double> sample_features(const Scenario& scenario, std::size_t n, Rng& rng) {
  if (!(scenario.feature_hi >= scenario.feature_lo)) throw Error("scenario: feature_hi must be >= feature_lo");
  std::uniform_real_distribution<double> u(scenario.feature_lo, scenario.feature_hi);
  std::vector<double> X(n * scenario.feature_dim);
  for (auto& v : X) v = scenario.feature_lo == scenario.feature_hi ? scenario.feature_lo : u(rng);
  return X;
}

Generated generate(const Scenario& scenario) {
  if (scenario.feature_dim == 0) throw Error("scenario: feature_dim must be positive");
  const std::size_t n = scenario.n, m = scenario.feature_dim;
  Rng feat_rng = make_stream(scenario.seed, Stream::features);
  Rng val_rng = make_stream(scenario.seed, Stream::valuations);
  Rng price_rng = make_stream(scenario.seed, Stream::prices);

  Generated out{{scenario, std::vector<double>(m, 0.0)}, Dataset(m), {}};
  const std::vector<double> X = sample_features(scenario, n, feat_rng);
  if (n > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) out.instance.feature_means[j] += X[i * m + j];
    }
    for (auto& v : out.instance.feature_means) v /= static_cast<double>(n);
  }

  out.valuations.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.valuations[i] = out.instance.sample_valuation({X.data() + i * m, m}, val_rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double p = scenario.price_law.sample(price_rng);
    while (!(p > 0.0)) p = scenario.price_law.sample(price_rng);
    out.data.add({X.data() + i * m, m}, p, p <= out.valuations[i] ? 1 : 0, scenario.price_law.density(p));
  }
  return out;
}

OraclePolicy oracle_policy(const ScenarioInstance& inst, std::size_t n_oracle, std::uint64_t seed,
                           const SolverConfig& cfg) {
  if (n_oracle < 1) throw Error("oracle_policy: n_oracle must be positive");
  const std::size_t m = inst.scenario.feature_dim;
  Rng rng = make_stream(seed, Stream::oracle);
  const std::vector<double> X = sample_features(inst.scenario, n_oracle, rng);
  std::vector<double> V(n_oracle), pstar(n_oracle);
  for (std::size_t i = 0; i < n_oracle; ++i) {
    std::span<const double> x{X.data() + i * m, m};
    V[i] = inst.sample_valuation(x, rng);
    pstar[i] = inst.pointwise_optimal_price(x);
  }

  auto objective = [&](std::span<const double> th) {
    double s = 0.0;
    for (std::size_t i = 0; i < n_oracle; ++i) {
      const double* x = X.data() + i * m;
      double pi = 0.0;
      for (std::size_t j = 0; j < m; ++j) pi += th[j] * x[j];
      if (pi <= V[i]) s += pi;
    }
    return s / static_cast<double>(n_oracle);
  };

  std::vector<std::vector<double>> starts;
  try {
    starts.push_back(numerics::least_squares(X, pstar, m));
  } catch (const std::exception&) {
    // Collinear features (e.g. a constant box): fall back to a ridge-free mean fit.
    double mp = 0.0;
    for (double p : pstar) mp += p;
    mp /= static_cast<double>(n_oracle);
    double mx = 0.0;
    for (double v : X) mx += v;
    mx /= static_cast<double>(X.size());
    starts.emplace_back(m, mx != 0.0 ? mp / (mx * static_cast<double>(m)) : 0.0);
  }
  starts.emplace_back(m, 0.5);

  SolverConfig sc = cfg;
  sc.seed = derive_seed(seed, {static_cast<std::uint64_t>(Stream::oracle)});
  OraclePolicy out;
  out.ls_start_objective = objective(starts.front());
  const FitResult r = fit_nonconvex(objective, m, sc, starts);
  out.policy = r.policy;
  out.valuation_objective = r.objective;
  return out;
}

double distance_to_oracle(const LinearPolicy& candidate, const LinearPolicy& oracle,
                          std::span<const double> test_features) {
  const std::size_t m = candidate.feature_dim();
  if (oracle.feature_dim() != m) throw Error("distance_to_oracle: policy dimensions differ");
  if (m == 0 || test_features.size() % m != 0 || test_features.empty()) {
    throw Error("distance_to_oracle: test features do not match the policy dimension");
  }
  const std::size_t n = test_features.size() / m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> x{test_features.data() + i * m, m};
    s += std::abs(oracle.price(x) - candidate.price(x));
  }
  return s / static_cast<double>(n);
}

}  // namespace pricing
