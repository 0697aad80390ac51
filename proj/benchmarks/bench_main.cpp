#include <benchmark/benchmark.h>

#include <algorithm>

#include "stretchlab/ergopt.hpp"
#include "stretchlab/lengths.hpp"
#include "stretchlab/stretch.hpp"

using namespace stretchlab;

namespace {

const SurfaceGroup& G() { return shared_bolza_group(); }

metric::ConformalFactor shrink() {
  metric::CollarBumpParams p;
  p.s = 0.2;
  p.epsilon = 0.3;
  return metric::ConformalFactor::collar_bump(G(), p);
}

void BM_EnumerateClasses(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_classes(G(), n));
}
BENCHMARK(BM_EnumerateClasses)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

void BM_ClosedLength(benchmark::State& state) {
  const auto phi = shrink();
  const auto cls = make_class(G(), word_from_string(state.range(0) == 0 ? "a1" : "a1b1A2B2"));
  for (auto _ : state) benchmark::DoNotOptimize(lengths::closed_length(phi, cls));
}
BENCHMARK(BM_ClosedLength)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CollarDatabase(benchmark::State& state) {
  stretch::Cutoffs c;
  c.max_word_len = static_cast<int>(state.range(0));
  const stretch::MetricPair pair{shrink(), metric::ConformalFactor()};
  for (auto _ : state) benchmark::DoNotOptimize(stretch::build_orbit_database(G(), pair, c));
}
BENCHMARK(BM_CollarDatabase)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

ergopt::SFTModel ring(int n) {
  std::vector<ergopt::Edge> edges;
  for (int i = 0; i < n; ++i) {
    edges.push_back({i, (i + 1) % n, static_cast<double>((i * 7) % 5 - 2)});
    edges.push_back({i, (i * 3 + 1) % n, static_cast<double>((i * 11) % 7 - 3)});
  }
  std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return std::pair(a.src, a.dst) < std::pair(b.src, b.dst); });
  edges.erase(std::unique(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return a.src == b.src && a.dst == b.dst; }),
              edges.end());
  return ergopt::SFTModel::make(n, edges);
}

void BM_Pressure(benchmark::State& state) {
  const auto m = ring(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ergopt::pressure(m, 3.0));
}
BENCHMARK(BM_Pressure)->Arg(8)->Arg(32)->Arg(64);

void BM_Barrier(benchmark::State& state) {
  const auto m = ring(static_cast<int>(state.range(0)));
  const double beta = ergopt::max_cycle_mean(m).beta;
  for (auto _ : state) benchmark::DoNotOptimize(ergopt::peierls_barrier(m, beta));
}
BENCHMARK(BM_Barrier)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
