#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "memheat/controllability.hpp"
#include "memheat/evolution.hpp"
#include "memheat/fractional.hpp"
#include "memheat/parallel.hpp"
#include "memheat/transforms.hpp"
#include "memheat/volterra.hpp"

using namespace memheat;

namespace {

const MemoryKernel kZero = MemoryKernel::zero();
const MemoryKernel kFrac = MemoryKernel::power_law(0.5, PowerRole::K);

void BM_ModeEvolutionKernel(benchmark::State& state) {
  const ContourSpec spec = contour_for(kFrac, kZero);
  const double mu2 = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mode_evolution_kernel(kFrac, kZero, mu2, 1.0, spec));
}
BENCHMARK(BM_ModeEvolutionKernel)->Arg(1)->Arg(64)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_InvertTable(benchmark::State& state) {
  const ContourSpec spec = contour_for(kFrac, kZero);
  const auto modes = static_cast<std::size_t>(state.range(0));
  std::vector<double> mu2(modes);
  for (std::size_t i = 0; i < modes; ++i) mu2[i] = static_cast<double>((i + 1) * (i + 1));
  std::vector<double> times;
  for (int k = 1; k <= 256; ++k) times.push_back(k / 256.0);
  const auto f = evolution_integrand(kFrac, kZero, mu2);
  set_thread_limit(1);
  for (auto _ : state) benchmark::DoNotOptimize(invert_table(f, modes, times, spec));
  set_thread_limit(0);
}
BENCHMARK(BM_InvertTable)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_AbelResolvent(benchmark::State& state) {
  const MemoryKernel n = MemoryKernel::power_law(0.5, PowerRole::N);
  const UniformGrid g = UniformGrid::over(2.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(resolvent_kernel(n, g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AbelResolvent)->RangeMultiplier(2)->Range(128, 1024)->Complexity()->Unit(benchmark::kMillisecond);

void BM_MittagLeffler(benchmark::State& state) {
  const double z = -static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mittag_leffler(0.5, 1.0, z));
}
BENCHMARK(BM_MittagLeffler)->Arg(1)->Arg(20)->Arg(80);

void BM_ForwardMap(benchmark::State& state) {
  const ContourSpec spec = contour_for(kFrac, kZero);
  const ModalSolver solver(kFrac, kZero, EigenBasis(std::numbers::pi, 64), UniformGrid::over(1.0, 512), spec);
  const auto geometry = ControlGeometry::distributed(std::numbers::pi / 4, 3 * std::numbers::pi / 4);
  const ControlBasis basis{ControlKind::Distributed, static_cast<std::size_t>(state.range(0)), 4};
  for (auto _ : state) benchmark::DoNotOptimize(forward_map(solver, basis, geometry));
}
BENCHMARK(BM_ForwardMap)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
