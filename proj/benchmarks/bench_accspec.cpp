#include <benchmark/benchmark.h>

#include "accspec/gabor_multiplier.hpp"
#include "accspec/wh_ensemble.hpp"

using namespace accspec;

namespace {

const Lattice2 kHalf = Lattice2::diagonal(0.5, 0.5);

const Window& tight() {
  static const Window w = canonical_tight_window(Window::gaussian(), kHalf).window;
  return w;
}

void BM_GramAndEigen(benchmark::State& state) {
  const auto kernel = make_kernel(Window::gaussian(), kHalf, 20.0);
  const Mask mask = Mask::ball({0, 0}, static_cast<double>(state.range(0)));
  for (auto _ : state) {
    const GramMatrix g = build_gram(kernel, mask);
    const SpectralDecomposition d = eigendecompose(g);
    benchmark::DoNotOptimize(d.eigenvalues.data());
    state.counters["N"] = static_cast<double>(g.size());
  }
}
BENCHMARK(BM_GramAndEigen)->Arg(3)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_AccumulatedSpectrogram(benchmark::State& state) {
  const Mask mask = Mask::ball({0, 0}, static_cast<double>(state.range(0)));
  const GramMatrix g = build_gram(tight(), kHalf, mask);
  const SpectralDecomposition d = eigendecompose(g);
  for (auto _ : state) {
    const AccumulatedSpectrogram rho = accumulated_spectrogram(d, g, mask, 1.0);
    benchmark::DoNotOptimize(rho.field.values.data());
  }
}
BENCHMARK(BM_AccumulatedSpectrogram)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_NumberVariance(benchmark::State& state) {
  const double radius = static_cast<double>(state.range(0));
  const LatticeKernel kernel(tight(), kHalf, 2.0 * radius);
  for (auto _ : state) benchmark::DoNotOptimize(number_variance(kernel, radius));
}
BENCHMARK(BM_NumberVariance)->Arg(8)->Arg(16)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_TightWindow(benchmark::State& state) {
  for (auto _ : state) {
    const TightWindow tw = canonical_tight_window(Window::gaussian(), kHalf);
    benchmark::DoNotOptimize(tw.rescale);
  }
}
BENCHMARK(BM_TightWindow)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
