#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

#include "dlab/fourier.hpp"
#include "dlab/melnikov.hpp"
#include "dlab/weakkam.hpp"

using namespace dlab;

namespace {

constexpr double pi = std::numbers::pi;

// one Lax-Oleinik step on the uncoupled (4, 1) system; arg 0 picks the serial kernel
void BM_lax_oleinik_step(benchmark::State& st) {
  auto L = TonelliLagrangian::from_mechanical(uncoupled_pendulums(4, 1));
  LaxOleinikParams p;
  p.n = int(st.range(0));
  p.window = p.n / 4;
  p.margin = 2;
  LaxOleinik T(L, {0.5, 0.2}, p);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0, 1);
  auto u = T.zero();
  for (auto& x : u.values) x = U(rng);
  bool parallel = st.range(1) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(T.step(u, parallel));
  st.SetItemsProcessed(st.iterations() * int64_t(u.size()));
}
BENCHMARK(BM_lax_oleinik_step)->Args({32, 0})->Args({32, 1})->Args({64, 0})->Args({64, 1})->Unit(benchmark::kMillisecond);

void BM_melnikov_field(benchmark::State& st) {
  auto fam = HomoclinicFamily::from(uncoupled_pendulums(4, 1), {1, 1});
  TrigSeries z;
  z.modes = {{1, -1, 0, 0.5, 0}, {1, 1, 0, -0.5, 0}, {1, -2, 0, -0.25, 0}, {1, 2, 0, 0.25, 0}};
  std::vector<double> xs(int(st.range(0)));
  for (size_t i = 0; i < xs.size(); ++i) xs[i] = pi - 0.6 + 1.2 * double(i) / double(xs.size() - 1);
  MelnikovParams p;
  p.parallel = st.range(1) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(melnikov_evaluate(fam, z, xs, xs, p));
  st.SetItemsProcessed(st.iterations() * int64_t(xs.size() * xs.size()));
}
BENCHMARK(BM_melnikov_field)->Args({21, 0})->Args({21, 1})->Unit(benchmark::kMillisecond);

void BM_fourier_synthesize(benchmark::State& st) {
  std::mt19937_64 rng(2);
  auto f = random_admissible(rng, 200, 12, 8, 1.0);
  int n = int(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(synthesize(f, {n, n, 8}));
  st.SetItemsProcessed(st.iterations() * int64_t(n) * n * 8);
}
BENCHMARK(BM_fourier_synthesize)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
