// Serial references against the OpenMP kernels.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <memory>
#include <vector>

#include "tcbm/estimation.hpp"
#include "tcbm/optimizer.hpp"
#include "tcbm/pricing.hpp"
#include "tcbm/simulate.hpp"

using namespace tcbm;

namespace {

const TimeChangeSpec kVg = TimeChangeSpec::variance_gamma(0.2, 1.0);
const TcbmParams kQ{3.0, 0.3, -1.5};

std::vector<double> horizons() {
  std::vector<double> t;
  for (int k = 1; k <= 40; ++k) t.push_back(0.25 * k);
  return t;
}

void BM_SurvivalBatchSerial(benchmark::State& state) {
  const LatticeEngine engine(kVg, kQ, SurvivalSet::default_grid(kVg, kQ, 0.25));
  const auto t = horizons();
  for (auto _ : state) benchmark::DoNotOptimize(engine.survival_batch_serial(t));
}

void BM_SurvivalBatchParallel(benchmark::State& state) {
  const LatticeEngine engine(kVg, kQ, SurvivalSet::default_grid(kVg, kQ, 0.25));
  const auto t = horizons();
  for (auto _ : state) benchmark::DoNotOptimize(engine.survival_batch(t));
}

CdsPricer ten_year_pricer() {
  const CdsContractSpec c{10.0, 0.25, 0.6};
  auto set = std::make_shared<const SurvivalSet>(kVg, kQ, c.premium_dt, c.periods(),
                                                 SurvivalSet::default_grid(kVg, kQ, c.premium_dt));
  return CdsPricer(set, ZeroCurve::flat(0.03), c);
}

void BM_CdsLatticeSerial(benchmark::State& state) {
  const CdsPricer p = ten_year_pricer();
  for (auto _ : state) benchmark::DoNotOptimize(p.lattice_serial());
}

void BM_CdsLatticeParallel(benchmark::State& state) {
  const CdsPricer p = ten_year_pricer();
  for (auto _ : state) benchmark::DoNotOptimize(p.lattice());
}

// Central-difference stencil of the likelihood: 8 independent evaluations.
struct Stencil {
  SimulatedPanel sim;
  std::vector<ZeroCurve> curves{ZeroCurve::flat(0.03)};
  Objective f;
  std::vector<std::vector<double>> points;

  Stencil() {
    SimulationSpec spec;
    spec.weeks = 26;
    sim = simulate_panel(ModelConfig{}, Theta{}, curves, spec);
    f = [this](std::span<const double> v) {
      return log_likelihood(sim.panel, curves, ModelConfig{}, from_array({v[0], v[1], v[2], v[3]}));
    };
    const auto x = to_array(Theta{});
    for (std::size_t i = 0; i < 4; ++i)
      for (double s : {-1.0, 1.0}) {
        std::vector<double> p(x.begin(), x.end());
        p[i] += s * 1e-5 * std::max(std::abs(p[i]), 1.0);
        points.push_back(p);
      }
  }
};

void BM_GradientStencilSerial(benchmark::State& state) {
  const Stencil s;
  for (auto _ : state)
    for (const auto& p : s.points) benchmark::DoNotOptimize(s.f(p));
}

void BM_GradientStencilParallel(benchmark::State& state) {
  const Stencil s;
  int evals = 0;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_batch(s.f, s.points, evals));
}

}  // namespace

BENCHMARK(BM_SurvivalBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SurvivalBatchParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CdsLatticeSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CdsLatticeParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradientStencilSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientStencilParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
