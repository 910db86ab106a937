// Serial reference kernels against their OpenMP versions.
// Arg 0 is the problem size; the OMP benchmarks take the worker count as arg 1.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "shelab/kernels.hpp"
#include "shelab/parallel.hpp"
#include "shelab/solver.hpp"
#include "shelab/white_noise.hpp"

using namespace shelab;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(gen);
  return v;
}

void BM_matvec_serial(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const auto a = normals(std::size_t(n) * n, 1), x = normals(n, 2);
  std::vector<double> y(n);
  for (auto _ : st) {
    kernels::matvec_serial(a.data(), n, n, x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * std::int64_t(n) * n);
}

void BM_matvec_omp(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0)), w = static_cast<int>(st.range(1));
  const auto a = normals(std::size_t(n) * n, 1), x = normals(n, 2);
  std::vector<double> y(n);
  for (auto _ : st) {
    kernels::matvec_omp(a.data(), n, n, x.data(), y.data(), w);
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * std::int64_t(n) * n);
}

void BM_fill_normals_serial(benchmark::State& st) {
  const int cells = static_cast<int>(st.range(0)), rows = 256;
  std::vector<double> out(std::size_t(rows) * cells);
  for (auto _ : st) {
    kernels::fill_normals_serial(7, 0, 0, rows, cells, 1.0, out.data());
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * std::int64_t(rows) * cells);
}

void BM_fill_normals_omp(benchmark::State& st) {
  const int cells = static_cast<int>(st.range(0)), rows = 256, w = static_cast<int>(st.range(1));
  std::vector<double> out(std::size_t(rows) * cells);
  for (auto _ : st) {
    kernels::fill_normals_omp(7, 0, 0, rows, cells, 1.0, out.data(), w);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * std::int64_t(rows) * cells);
}

void BM_spectral_rows_serial(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0)), rows = 64;
  const Grid1D g(DomainSetup::periodic(), n);
  const SpectralBasis basis(g);
  const auto mult = basis.heat_multiplier(0.01);
  auto data = normals(std::size_t(rows) * basis.size(), 3);
  for (auto _ : st) {
    kernels::spectral_rows_serial(basis, mult, data.data(), rows);
    benchmark::DoNotOptimize(data.data());
  }
  st.SetItemsProcessed(st.iterations() * rows);
}

void BM_spectral_rows_omp(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0)), rows = 64, w = static_cast<int>(st.range(1));
  const Grid1D g(DomainSetup::periodic(), n);
  const SpectralBasis basis(g);
  const auto mult = basis.heat_multiplier(0.01);
  auto data = normals(std::size_t(rows) * basis.size(), 3);
  for (auto _ : st) {
    kernels::spectral_rows_omp(basis, mult, data.data(), rows, w);
    benchmark::DoNotOptimize(data.data());
  }
  st.SetItemsProcessed(st.iterations() * rows);
}

// realization-level Monte Carlo, the outer loop every experiment runs
struct PathSum {
  double s = 0.0;
  void merge(const PathSum& o) { s += o.s; }
};

void BM_ensemble(benchmark::State& st) {
  const int w = static_cast<int>(st.range(0));
  const Grid1D g(DomainSetup::periodic(), 64);
  const TimeGrid tg(1.0, 256);
  const DriftFn b = [](double u) { return std::sin(u); };
  for (auto _ : st) {
    const auto r = ordered_reduce<PathSum>(
        32, w, [] { return PathSum{}; },
        [&](PathSum& acc, int i) {
          const auto p = simulate_path({SchemeKind::SplittingExact, b}, sample_noise(g, tg, 1, i), constant_field(g, 0.0));
          acc.s += p.u.at(tg.n_time(), 0);
        });
    benchmark::DoNotOptimize(r.s);
  }
  st.SetItemsProcessed(st.iterations() * 32);
}

}  // namespace

BENCHMARK(BM_matvec_serial)->Arg(256)->Arg(1024);
BENCHMARK(BM_matvec_omp)->ArgsProduct({{256, 1024}, {1, 2, 4, 8}})->UseRealTime();
BENCHMARK(BM_fill_normals_serial)->Arg(256)->Arg(1024);
BENCHMARK(BM_fill_normals_omp)->ArgsProduct({{256, 1024}, {1, 2, 4, 8}})->UseRealTime();
BENCHMARK(BM_spectral_rows_serial)->Arg(256)->Arg(1024);
BENCHMARK(BM_spectral_rows_omp)->ArgsProduct({{256, 1024}, {1, 2, 4, 8}})->UseRealTime();
BENCHMARK(BM_ensemble)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
