#include <benchmark/benchmark.h>

#include <vector>

#include "ride/model.hpp"
#include "ride/recover.hpp"
#include "ride/sensing.hpp"
#include "ride/slstm.hpp"

namespace {

using namespace ride;

Grid2D noise_image(int side, std::uint64_t seed) {
  SeededRng rng(seed);
  Grid2D g(side, side);
  for (auto& v : g.values()) v = rng.uniform();
  return g;
}

RideModel bench_model(int hidden) {
  RideConfig cfg;
  cfg.hidden = hidden;
  cfg.components = 8;
  cfg.scales = 3;
  SeededRng rng(1);
  return RideModel::create(cfg, rng);
}

void BM_SlstmForward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  SeededRng rng(2);
  const SlstmParams p = SlstmParams::random(32, 4, rng);
  const Grid2D img = noise_image(side, 3);
  for (auto _ : state) benchmark::DoNotOptimize(slstm_forward(p, img, CausalWindow::standard()));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_SlstmForward)->Arg(16)->Arg(32)->Arg(64);

void BM_SlstmBackward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  SeededRng rng(2);
  const SlstmParams p = SlstmParams::random(32, 4, rng);
  const HiddenGrid g = slstm_forward(p, noise_image(side, 3), CausalWindow::standard());
  const std::vector<double> upstream(g.h.size(), 1e-2);
  for (auto _ : state) benchmark::DoNotOptimize(slstm_backward(p, g, upstream, true));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_SlstmBackward)->Arg(16)->Arg(32);

void BM_McgsmCondGrads(benchmark::State& state) {
  const RideModel m = bench_model(32);
  SeededRng rng(4);
  std::vector<double> h(32);
  for (auto& v : h) v = 0.3 * rng.normal();
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cond_grads(m.mcgsm, h, x));
    x = -x;
  }
}
BENCHMARK(BM_McgsmCondGrads);

void BM_InputGradient(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const RideModel m = bench_model(32);
  const Grid2D img = noise_image(side, 5);
  for (auto _ : state) benchmark::DoNotOptimize(grad_log_likelihood_input(m, img));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_InputGradient)->Arg(32);

void BM_MaskedPriorGradient4Dir(benchmark::State& state) {
  const RideModel m = bench_model(32);
  const Grid2D img = noise_image(32, 6);
  for (auto _ : state) benchmark::DoNotOptimize(masked_prior_gradient(m, img, 3.5));
}
BENCHMARK(BM_MaskedPriorGradient4Dir);

void BM_FwhtApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto op = make_fwht_operator(n, static_cast<int>(0.4 * n), 7);
  SeededRng rng(8);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(x));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FwhtApply)->Arg(1024)->Arg(16384)->Arg(65536);

void BM_GaussianApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto op = make_gaussian_operator(n, static_cast<int>(0.4 * n), 9);
  SeededRng rng(10);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(x));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_GaussianApply)->Arg(1024)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
