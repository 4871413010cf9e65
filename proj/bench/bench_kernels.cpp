// Serial reference vs OpenMP risk kernels.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <limits>
#include <string>
#include <vector>

#include "pricing/kernels.hpp"
#include "pricing/synthetic.hpp"

using namespace pricing;

namespace {

const Dataset& data_of_size(std::size_t n) {
  static std::vector<std::pair<std::size_t, Dataset>> cache;
  for (const auto& [k, d] : cache) {
    if (k == n) return d;
  }
  auto sc = Scenario::uniform_band(GKind::linear);
  sc.n = n;
  sc.seed = 1;
  cache.emplace_back(n, generate(sc).data);
  return cache.back().second;
}

const std::vector<double> kTheta{0.74, 0.76};
constexpr double kNoCap = std::numeric_limits<double>::infinity();

void BM_RiskSerial(benchmark::State& st) {
  const auto& d = data_of_size(static_cast<std::size_t>(st.range(0)));
  const auto spec = LossSpec::hinge(0.8234);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::risk_serial(spec, kTheta, d, kNoCap));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_RiskParallel(benchmark::State& st) {
  const auto& d = data_of_size(static_cast<std::size_t>(st.range(0)));
  const kernels::RiskProblem p(LossSpec::hinge(0.8234), d, kNoCap);
  for (auto _ : st) benchmark::DoNotOptimize(p.value(kTheta));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_GradientSerial(benchmark::State& st) {
  const auto& d = data_of_size(static_cast<std::size_t>(st.range(0)));
  const auto spec = LossSpec::quantile(0.209);
  std::vector<double> g(2);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::risk_gradient_serial(spec, kTheta, d, kNoCap, g));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_GradientParallel(benchmark::State& st) {
  const auto& d = data_of_size(static_cast<std::size_t>(st.range(0)));
  const kernels::RiskProblem p(LossSpec::quantile(0.209), d, kNoCap);
  std::vector<double> g(2);
  for (auto _ : st) benchmark::DoNotOptimize(p.value_and_gradient(kTheta, g));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_RiskSerial)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_RiskParallel)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_GradientSerial)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_GradientParallel)->RangeMultiplier(10)->Range(1000, 1000000);

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::AddCustomContext("omp_threads", std::to_string(omp_get_max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
