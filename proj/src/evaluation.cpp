#include "pricing/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pricing {

RevenueEstimate true_expected_revenue(const LinearPolicy& policy, const ScenarioInstance& inst, std::size_t n_mc,
                                      std::uint64_t seed) {
  if (n_mc < 2) throw Error("true_expected_revenue: need at least 2 Monte-Carlo draws");
  Rng rng = make_stream(seed, Stream::test_features);
  const auto X = sample_features(inst.scenario, n_mc, rng);
  return true_expected_revenue(policy, inst, X);
}

RevenueEstimate true_expected_revenue(const LinearPolicy& policy, const ScenarioInstance& inst,
                                      std::span<const double> features) {
  const std::size_t m = inst.scenario.feature_dim;
  if (policy.feature_dim() != m) throw Error("true_expected_revenue: policy dimension mismatch");
  if (features.size() % m != 0 || features.size() / m < 2) {
    throw Error("true_expected_revenue: need at least 2 feature rows");
  }
  const std::size_t n = features.size() / m;
  // Welford keeps the variance accurate when revenues are nearly constant.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> x{features.data() + i * m, m};
    const double pi = policy.price(x);
    const double r = pi * inst.conditional_survival(x, pi);
    const double d = r - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (r - mean);
  }
  const double var = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

double model_based_revenue(const LinearPolicy& policy, const Dataset& eval_data, const DemandModel& evaluator) {
  if (eval_data.empty()) throw Error("model_based_revenue: empty evaluation set");
  return estimated_revenue(evaluator, policy, eval_data.feature_matrix());
}

Split split_dataset(const Dataset& data, double prescription_fraction, std::uint64_t seed) {
  if (!(prescription_fraction > 0.0 && prescription_fraction < 1.0)) {
    throw Error("split_dataset: fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  const auto k = static_cast<std::size_t>(std::llround(prescription_fraction * static_cast<double>(n)));
  if (k == 0 || k == n) throw Error("split_dataset: both parts must be nonempty");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0x73706c6974ULL}));
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::size_t> a(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> b(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {data.subset(a), data.subset(b)};
}

}  // namespace pricing
