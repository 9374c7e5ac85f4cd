#include <benchmark/benchmark.h>

#include "macrosync/cumulant.hpp"
#include "macrosync/dynamics.hpp"
#include "macrosync/microscopic.hpp"
#include "macrosync/signal.hpp"
#include "macrosync/stability.hpp"

using namespace macrosync;

namespace {

ModelParams two_group_params() {
  ModelParams p;
  p.gamma_plus = 0.5;
  p.v = 1.0;
  p.v_ab = 0.5;
  p.delta = 1.3;
  return p;
}

void BM_MeanFieldRhs(benchmark::State& state) {
  const ModelParams p = two_group_params();
  const Matrix3 ra = default_initial(InitialKind::Perturbed).matrix();
  const Matrix3 rb = default_initial(InitialKind::Uniform).matrix();
  Matrix3 da, db;
  for (auto _ : state) {
    meanfield_rhs(p, ra, rb, da, db);
    benchmark::DoNotOptimize(da);
  }
}
BENCHMARK(BM_MeanFieldRhs);

void BM_Integrate(benchmark::State& state) {
  const ModelParams p = two_group_params();
  IntegratorConfig cfg;
  cfg.t_final = double(state.range(0));
  cfg.n_samples = 10 * state.range(0);
  MeanFieldState init{default_initial(InitialKind::Perturbed).matrix(),
                      default_initial(InitialKind::Uniform).matrix()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(p, init, cfg));
  }
}
BENCHMARK(BM_Integrate)->Arg(10)->Arg(100);

void BM_Spectrum(benchmark::State& state) {
  std::vector<Complex> samples(state.range(0));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = std::exp(Complex(0, 0.3 * double(i)));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectrum_of(samples, 0.05));
  }
}
BENCHMARK(BM_Spectrum)->Arg(4096)->Arg(5000);

void BM_SpectralAbscissa(benchmark::State& state) {
  const ModelParams p = two_group_params();
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_abscissa(p));
  }
}
BENCHMARK(BM_SpectralAbscissa);

void BM_CumulantRhs(benchmark::State& state) {
  ModelParams p;
  p.gamma_plus = 0.4;
  p.v = 1.0;
  const CumulantSystem sys = CumulantSystem::derive(p, 500);
  const MomentState s =
      MomentState::from_density(default_initial(InitialKind::Perturbed).matrix());
  MomentState ds;
  for (auto _ : state) {
    sys.rhs(s, ds);
    benchmark::DoNotOptimize(ds);
  }
}
BENCHMARK(BM_CumulantRhs);

void BM_RelativePhaseDistribution(benchmark::State& state) {
  ModelParams p;
  p.gamma_plus = 0.5;
  p.delta = 10.0;
  p.k = 9.0;
  p.v_ab = 0.02;
  const auto rho = perturbative_two_oscillator_steady_state(p);
  const PhaseGrid grid{1024, 256};
  for (auto _ : state) {
    benchmark::DoNotOptimize(relative_phase_distribution(rho.matrix(), grid));
  }
}
BENCHMARK(BM_RelativePhaseDistribution);

void BM_PerturbativeSteadyState(benchmark::State& state) {
  ModelParams p;
  p.gamma_plus = 0.5;
  p.delta = 10.0;
  p.k = 9.0;
  p.v_ab = 0.02;
  for (auto _ : state) {
    benchmark::DoNotOptimize(perturbative_two_oscillator_steady_state(p));
  }
}
BENCHMARK(BM_PerturbativeSteadyState);

}  // namespace

BENCHMARK_MAIN();
