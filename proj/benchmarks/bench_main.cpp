#include <benchmark/benchmark.h>

#include <random>

#include "ivfe/dgp.hpp"
#include "ivfe/fen.hpp"
#include "ivfe/imaging.hpp"
#include "ivfe/regress.hpp"

namespace {

std::vector<double> window(std::size_t n, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed * 1000003 + n);
  std::normal_distribution<double> g;
  std::vector<double> w(n);
  for (auto& v : w) v = g(rng);
  return w;
}

void BM_Imaging(benchmark::State& state) {
  const auto method = static_cast<ivfe::ImagingMethod>(state.range(0));
  const auto w = window(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(ivfe::make_image(method, w));
  state.SetLabel(std::string(ivfe::method_name(method)));
}
BENCHMARK(BM_Imaging)->ArgsProduct({{1, 2, 3, 4}, {45}});

void BM_ExtractFeatures(benchmark::State& state) {
  const auto model = ivfe::init_model(ivfe::architecture_for_depth(static_cast<std::size_t>(state.range(0))), 1);
  const auto img = ivfe::normalize_unit(ivfe::gasf(window(static_cast<std::size_t>(state.range(1)))));
  for (auto _ : state) benchmark::DoNotOptimize(ivfe::extract_features(model, img));
}
BENCHMARK(BM_ExtractFeatures)->ArgsProduct({{1, 2}, {8, 45}})->Unit(benchmark::kMicrosecond);

void BM_TrainStep(benchmark::State& state) {
  const auto model = ivfe::init_model(ivfe::architecture_for_depth(1), 1, ivfe::HeadInit::kRandom);
  std::vector<ivfe::LabeledImage> batch(8);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch[i].image = ivfe::normalize_unit(ivfe::rp(window(45 + i)));
    batch[i].image = ivfe::resize_bilinear(batch[i].image, 45);
    batch[i].label = static_cast<int>(i % 4) + 1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(ivfe::loss_and_grad(model, batch));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_RidgeFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ivfe::Matrix x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = window(64, i);
  const auto y = window(n);
  ivfe::RegressorSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(ivfe::fit(spec, x, y));
}
BENCHMARK(BM_RidgeFit)->Arg(1200)->Unit(benchmark::kMillisecond);

void BM_KnnPredict(benchmark::State& state) {
  ivfe::Matrix x(1200), q(300);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = window(64, i);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = window(64, 5000 + i);
  ivfe::RegressorSpec spec;
  spec.kind = ivfe::RegressorKind::kKnn;
  const auto model = ivfe::fit(spec, x, window(1200));
  for (auto _ : state) benchmark::DoNotOptimize(ivfe::predict(model, q));
}
BENCHMARK(BM_KnnPredict)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
