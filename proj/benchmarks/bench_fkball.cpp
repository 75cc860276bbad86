#include <benchmark/benchmark.h>

#include "fkball/bounds.hpp"
#include "fkball/concentration.hpp"
#include "fkball/sampling.hpp"
#include "fkball/specfun.hpp"
#include "fkball/wavelet.hpp"
#include "fkball/weights.hpp"

using namespace fkball;

static void BM_Hyp3F2(benchmark::State& state) {
  const specfun::HypParams32 p{1.0, 1.0, 1.5, 2.0, 2.5};
  const double t = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(specfun::hyp3f2(p, t));
}
BENCHMARK(BM_Hyp3F2)->Arg(10)->Arg(50)->Arg(90)->Arg(100);

static void BM_Phi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  double r = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(weights::phi(n, r));
    r = r < 0.98 ? r + 0.01 : 0.0;
  }
}
BENCHMARK(BM_Phi)->DenseRange(2, 6);

static void BM_ThetaProfileBuild(benchmark::State& state) {
  const weights::WeightParams params(static_cast<int>(state.range(0)), 2.0);
  for (auto _ : state) {
    const bounds::ThetaProfile profile(params);
    benchmark::DoNotOptimize(profile.theta(1.0));
  }
}
BENCHMARK(BM_ThetaProfileBuild)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_ThetaEval(benchmark::State& state) {
  const bounds::ThetaProfile profile(weights::WeightParams(3, 2.0));
  double s = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(profile.theta(s));
    s = s < 50.0 ? s * 1.1 : 0.1;
  }
}
BENCHMARK(BM_ThetaEval);

static void BM_SamplingDraw(benchmark::State& state) {
  const weights::WeightParams params(3, 2.0);
  const auto count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sampling::draw(params, count, 7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplingDraw)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

static void BM_QuotientShared(benchmark::State& state) {
  const weights::WeightParams params(3, 2.0);
  const auto samples = sampling::draw(params, 1 << 15, 11);
  const auto omega = concentration::DomainSpec::centered_ball(3, 2.0);
  const auto f = concentration::TestFunction::exp_harmonic(-1.0, geometry::Point::Unit(3, 0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(concentration::concentration_quotient(f, omega, samples));
  }
}
BENCHMARK(BM_QuotientShared)->Unit(benchmark::kMillisecond);

static void BM_QuotientQuadrature(benchmark::State& state) {
  const weights::WeightParams params(3, 2.0);
  const auto omega = concentration::DomainSpec::centered_ball(3, 2.0);
  const auto f = concentration::TestFunction::one();
  for (auto _ : state) {
    benchmark::DoNotOptimize(concentration::concentration_quotient(f, omega, params));
  }
}
BENCHMARK(BM_QuotientQuadrature)->Unit(benchmark::kMillisecond);

static void BM_WitnessSearch(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(wavelet::find_negativity_witness(n));
}
BENCHMARK(BM_WitnessSearch)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
