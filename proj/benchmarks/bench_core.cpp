#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "nlfujita/convolution.hpp"
#include "nlfujita/green.hpp"
#include "nlfujita/simulate.hpp"

namespace {

using namespace nlf;

GridFunction random_cells(const Grid& grid, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    GridFunction f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = U(rng);
    return f;
}

// Lattice-by-cell convolution, 1D, as used by every kernel application.
void BM_Convolve1D(benchmark::State& state, ConvolutionMode mode) {
    const Grid grid(1, 8.0, static_cast<int>(state.range(0)));
    const Kernel J = Kernel::build(KernelSpec::gaussian(1.0), grid);
    const ConvolutionPlan plan(grid, mode);
    const GridFunction f = random_cells(grid, 1);
    for (auto _ : state) benchmark::DoNotOptimize(plan.convolve(J.samples(), f));
    state.SetComplexityN(state.range(0));
}
BENCHMARK_CAPTURE(BM_Convolve1D, fast, ConvolutionMode::fast)->RangeMultiplier(4)->Range(64, 16384)->Complexity();
BENCHMARK_CAPTURE(BM_Convolve1D, direct, ConvolutionMode::direct)->RangeMultiplier(4)->Range(64, 1024)->Complexity();

void BM_Convolve2D(benchmark::State& state) {
    const Grid grid(2, 8.0, static_cast<int>(state.range(0)));
    const Kernel J = Kernel::build(KernelSpec::gaussian(1.0), grid);
    const ConvolutionPlan plan(grid);
    const SpectralKernel k = plan.transform(J.samples());
    const GridFunction f = random_cells(grid, 2);
    for (auto _ : state) benchmark::DoNotOptimize(plan.apply(k, f));
}
BENCHMARK(BM_Convolve2D)->RangeMultiplier(2)->Range(32, 256);

// Building the Green series is dominated by the kernel iterates.
void BM_GreenSeriesBuild(benchmark::State& state) {
    const Grid grid(1, 40.0, 1024);
    const Kernel J = Kernel::build(KernelSpec::gaussian(1.0), grid);
    const ConvolutionPlan plan(grid);
    const double t_max = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(GreenSeries(J, plan, t_max).n_max());
}
BENCHMARK(BM_GreenSeriesBuild)->Arg(1)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_GreenApply(benchmark::State& state) {
    const Grid grid(1, 40.0, 1024);
    const Kernel J = Kernel::build(KernelSpec::gaussian(1.0), grid);
    const ConvolutionPlan plan(grid);
    const GreenSeries gs(J, plan, 5.0);
    const GreenPropagator g = gs.propagator(5.0);
    const GridFunction f = random_cells(grid, 3);
    for (auto _ : state) benchmark::DoNotOptimize(gs.apply(g, f));
}
BENCHMARK(BM_GreenApply);

void BM_Step(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const Grid grid(dim, 16.0, dim == 1 ? 1024 : 128);
    const Kernel J = Kernel::build(KernelSpec::gaussian(1.0), grid);
    const ConvolutionPlan plan(grid);
    const GreenSeries gs(J, plan, 0.125);
    const GreenPropagator g = gs.propagator(0.125);
    ReactionCoefficient a;
    const GridFunction u = bump(grid, 1.0, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(step(gs, g, u, 0.0, 0.125, a, 2.0).error);
}
BENCHMARK(BM_Step)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
