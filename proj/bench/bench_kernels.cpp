// OpenMP kernels against their serial references. Sizes are square images of
// side state.range(0); set OMP_NUM_THREADS to vary the thread count.

#include <benchmark/benchmark.h>

#include <random>

#include "mindx/median.hpp"
#include "mindx/noise.hpp"
#include "mindx/operators.hpp"
#include "mindx/reference.hpp"
#include "mindx/solver.hpp"
#include "mindx/vst.hpp"

using namespace mindx;

namespace {

Image test_image(int n, double peak = 20.0) {
  Image img(n, n, peak);
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, peak);
  for (double& v : img.pixels()) v = u(gen);
  return img;
}

Image impulsive(int n) {
  NoiseSpec s;
  s.peak = 20.0;
  s.sigma = 2.0;
  s.impulse_ratio = 0.5;
  s.seed = 7;
  return corrupt(test_image(n), s).noisy;
}

GradField field(int n) {
  const Image a = test_image(n), b = test_image(n);
  GradField f(n, n);
  for (std::size_t i = 0; i < a.size(); ++i) {
    f.gx[i] = a[i] - 10.0;
    f.gy[i] = 10.0 - b[(i * 7) % b.size()];
  }
  return f;
}

template <bool Ref>
void BM_grad(benchmark::State& state) {
  const Image img = test_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Ref ? reference::grad(img) : grad(img));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}

template <bool Ref>
void BM_div(benchmark::State& state) {
  const GradField f = field(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Ref ? reference::div(f) : div(f));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.size()));
}

template <bool Ref>
void BM_shrink(benchmark::State& state) {
  const GradField f = field(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(Ref ? reference::prox_tv_dual_shrink(f, 1.5, 0.35) : prox_tv_dual_shrink(f, 1.5, 0.35));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.size()));
}

template <bool Ref>
void BM_prox_data(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Image t = test_image(n), y = test_image(n);
  PixelMask m(n, n);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, i % 2 == 0);
  for (auto _ : state) benchmark::DoNotOptimize(Ref ? reference::prox_data(t, y, m, 0.35) : prox_data(t, y, m, 0.35));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.size()));
}

template <bool Ref>
void BM_amf(benchmark::State& state) {
  const Image img = impulsive(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Ref ? reference::amf(img, {}) : amf(img));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}

template <bool Ref>
void BM_acwmf(benchmark::State& state) {
  const Image img = impulsive(static_cast<int>(state.range(0)));
  const auto p = AcwmfParams::for_peak(20.0);
  for (auto _ : state) benchmark::DoNotOptimize(Ref ? reference::acwmf(img, p) : acwmf(img, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}

void BM_cp_x_step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Image y = gat_forward(impulsive(n), 2.0);
  PixelMask m(n, n);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, i % 2 == 0);
  const auto reg = RegularizerConfig::make(kDefaultLambda);
  for (auto _ : state) benchmark::DoNotOptimize(cp_x_step(y, m, y, reg, 50));
  state.SetItemsProcessed(state.iterations() * 50 * static_cast<std::int64_t>(y.size()));
}

}  // namespace

BENCHMARK(BM_grad<false>)->Arg(128)->Arg(512);
BENCHMARK(BM_grad<true>)->Arg(128)->Arg(512);
BENCHMARK(BM_div<false>)->Arg(128)->Arg(512);
BENCHMARK(BM_div<true>)->Arg(128)->Arg(512);
BENCHMARK(BM_shrink<false>)->Arg(128)->Arg(512);
BENCHMARK(BM_shrink<true>)->Arg(128)->Arg(512);
BENCHMARK(BM_prox_data<false>)->Arg(128)->Arg(512);
BENCHMARK(BM_prox_data<true>)->Arg(128)->Arg(512);
BENCHMARK(BM_amf<false>)->Arg(128);
BENCHMARK(BM_amf<true>)->Arg(128);
BENCHMARK(BM_acwmf<false>)->Arg(128);
BENCHMARK(BM_acwmf<true>)->Arg(128);
BENCHMARK(BM_cp_x_step)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
