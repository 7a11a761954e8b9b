// Serial reference path vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include "catsync/lyapunov.hpp"
#include "catsync/series.hpp"
#include "catsync/tangent.hpp"

using namespace catsync;

namespace {

SeriesSettings settings(Exec e) {
  SeriesSettings s;
  s.n_phi = 32;
  s.n_t = 128;
  s.exec = e;
  return s;
}

PhaseConstants constants(const CouplingSpec& spec) {
  PhaseConstants pc = solve_w0(spec.g);
  pc.mu = spec.epsilon;
  return pc;
}

void BM_series(benchmark::State& st) {
  const Exec e = st.range(0) ? Exec::parallel : Exec::serial;
  const CouplingSpec spec = bidirectional_example(0.02);
  const PhaseConstants pc = constants(spec);
  for (auto _ : st) benchmark::DoNotOptimize(build_series(spec, pc, settings(e), 3));
  st.SetLabel(st.range(0) ? "parallel" : "serial");
}

void BM_m_series(benchmark::State& st) {
  const Exec e = st.range(0) ? Exec::parallel : Exec::serial;
  const CouplingSpec spec = bidirectional_example(0.02);
  const SeriesBundle b = build_series(spec, constants(spec), settings(e), 2);
  for (auto _ : st) benchmark::DoNotOptimize(m_series(b, 3));
  st.SetLabel(st.range(0) ? "parallel" : "serial");
}

void BM_sweep(benchmark::State& st) {
  SweepOptions opt;
  opt.method = SpectrumMethod::qr_direct;
  opt.qr.n_iter = 400;
  opt.qr.n_transient = 20;
  opt.exec = st.range(0) ? Exec::parallel : Exec::serial;
  const std::vector<double> grid{0.02, 0.05, 0.1, 0.15};
  for (auto _ : st) benchmark::DoNotOptimize(sweep(locking_example(0.0), grid, opt));
  st.SetLabel(st.range(0) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_series)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_m_series)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
