#include <benchmark/benchmark.h>

#include "droci/dro.hpp"
#include "droci/experiments.hpp"
#include "droci/moments.hpp"

namespace {

droci::Sample make_sample(std::size_t n) {
  return droci::sample_law(droci::DataLaw::Gamma21, n, 42);
}

void BM_EstimateMoments(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const droci::Sample sample = make_sample(n);
  const droci::InfluenceModel model =
      droci::build_model("vstat:gamma-kernel", sample);
  for (auto _ : state) {
    benchmark::DoNotOptimize(droci::estimate_moments(model, sample));
  }
}
BENCHMARK(BM_EstimateMoments)->Arg(30)->Arg(100)->Arg(400);

void BM_SolveExact(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const droci::Sample sample = make_sample(n);
  const droci::InfluenceModel model =
      droci::build_model("vstat:gamma-kernel", sample);
  const droci::DivergenceSpec spec = droci::make_divergence("reverse-kl");
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        droci::solve_dro_exact(model, sample, spec, 2.7, droci::Direction::Max)
            .objective);
  }
}
BENCHMARK(BM_SolveExact)->Arg(15)->Arg(30)->Arg(100);

void BM_ConfidenceIntervalEB(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const droci::Sample sample = make_sample(n);
  const droci::InfluenceModel model =
      droci::build_model("vstat:gamma-kernel", sample);
  const droci::DivergenceSpec spec = droci::make_divergence("reverse-kl");
  droci::BallSizeRule rule;
  rule.kind = droci::RuleKind::BartlettEstimated;
  rule.nominal = 0.9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        droci::confidence_interval(model, sample, spec, rule));
  }
}
BENCHMARK(BM_ConfidenceIntervalEB)->Arg(15)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
