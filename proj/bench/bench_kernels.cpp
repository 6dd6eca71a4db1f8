// Serial reference vs OpenMP kernels: one SW sweep and one block-grid pass.
#include <benchmark/benchmark.h>

#include <memory>

#include "fklab/coarsegrain.hpp"
#include "fklab/sampler.hpp"

using namespace fklab;

namespace {

std::shared_ptr<const FkGraph> box_graph(int N) {
  auto l = std::make_shared<const Lattice>(Box(N, 2), CouplingKernel::nearest_neighbor(2));
  return std::make_shared<const FkGraph>(l, wired_boundary(), make_intensities(*l, 0.8));
}

void sw_sweep(benchmark::State& st, Exec exec) {
  SwSampler s(box_graph(static_cast<int>(st.range(0))), 1, 0, exec);
  for (int i = 0; i < 20; ++i) s.step();
  for (auto _ : st) s.step();
  st.SetItemsProcessed(st.iterations() * s.graph().num_sites());
}

void classify(benchmark::State& st, Exec exec) {
  const BlockLayout layout(2, 16, 72);
  auto l = std::make_shared<const Lattice>(Box(layout.lattice_half_side(), 2), CouplingKernel::nearest_neighbor(2));
  auto g = std::make_shared<const FkGraph>(l, free_boundary(), make_intensities(*l, 0.8));
  SwSampler s(g, 1, 0, exec);
  for (int i = 0; i < 20; ++i) s.step();
  for (auto _ : st) benchmark::DoNotOptimize(classify_grid(*l, s.omega(), layout, exec));
  st.SetItemsProcessed(st.iterations() * layout.num_blocks());
}

}  // namespace

BENCHMARK_CAPTURE(sw_sweep, serial, Exec::kSerial)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sw_sweep, parallel, Exec::kParallel)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(classify, serial, Exec::kSerial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(classify, parallel, Exec::kParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
