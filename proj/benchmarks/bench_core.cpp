#include <benchmark/benchmark.h>

#include <random>

#include "msacm/classifier.hpp"
#include "msacm/estimation.hpp"
#include "msacm/ms_engine.hpp"

using namespace msacm;

namespace {

MsAcmParams table_params(int k) {
  MsAcmParams p;
  p.base = {0.853, 0.142, 0.732, 0.112};
  p.policy.delta = -0.776;
  if (k == 2) {
    p.policy.phi = {6.273};
    p.trans = Eigen::MatrixXd(2, 2);
    p.trans << 0.964, 0.036, 0.778, 0.222;
    p.theta = {8.852, 3.271};
  } else {
    p.policy.phi = {3.0, 4.0};
    p.trans = Eigen::MatrixXd::Constant(3, 3, 0.03);
    p.trans.diagonal().setConstant(0.94);
    p.theta = {8.0, 5.0, 3.0};
  }
  return p;
}

MarketSeries sample(int k, std::size_t n) {
  SimulationOptions so;
  so.exo = {ExoSpec::Kind::Ar1, 0.99, 0.1};
  return simulate(table_params(k), n, 7, so).series;
}

void BM_FilterLikelihoodOnly(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto s = sample(k, static_cast<std::size_t>(state.range(1)));
  const auto p = table_params(k);
  for (auto _ : state) benchmark::DoNotOptimize(hamilton_kim_filter(p, s, {.store_paths = false}).loglik);
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_FilterLikelihoodOnly)->Args({2, 3000})->Args({3, 3000});

void BM_FilterWithSmoother(benchmark::State& state) {
  const auto s = sample(2, 3000);
  const auto p = table_params(2);
  for (auto _ : state) benchmark::DoNotOptimize(hamilton_kim_filter(p, s).smoothed(0, 0));
}
BENCHMARK(BM_FilterWithSmoother);

void BM_FitSingleStart(benchmark::State& state) {
  const auto s = sample(2, 1000);
  FitSettings fs;
  fs.starts = 1;
  fs.threads = 1;
  fs.compute_se = false;
  for (auto _ : state) benchmark::DoNotOptimize(fit_qml(default_spec(ModelVariant::MsAcm), s, fs).loglik);
}
BENCHMARK(BM_FitSingleStart)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_KMeans1d(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 0.4);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = z(rng);
  for (auto _ : state) benchmark::DoNotOptimize(kmeans_1d(x, 3).objective);
}
BENCHMARK(BM_KMeans1d)->Arg(144)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
