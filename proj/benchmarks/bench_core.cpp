#include <adp/density.hpp>
#include <adp/denoiser.hpp>
#include <adp/linear.hpp>
#include <adp/prior.hpp>
#include <adp/sampling.hpp>
#include <adp/synthetic.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace adp;

Coords noise(int rows, std::uint64_t seed) {
  Rng gen = make_stream(seed, 0);
  return standard_normal(rows, gen);
}

void BM_PriorApply(benchmark::State& state) {
  const auto prior = CorrelatedPrior::calibrated(static_cast<int>(state.range(0)));
  const Coords z = noise(prior.dim(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(prior.apply(z));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PriorApply)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oN);

void BM_PriorApplyInverse(benchmark::State& state) {
  const auto prior = CorrelatedPrior::calibrated(static_cast<int>(state.range(0)));
  const Coords x = noise(prior.dim(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(prior.apply_inverse(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PriorApplyInverse)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oN);

void BM_LibraryDenoise(benchmark::State& state) {
  const int n = 64;
  const auto prior = CorrelatedPrior::calibrated(n);
  const NoiseSchedule sched;
  const BackboneChain target = synthetic_backbone(n, 3);
  std::vector<Coords> components{target.coords};
  for (const auto& d : decoy_library(target, static_cast<int>(state.range(0)) - 1, 3)) components.push_back(d.coords);
  const GaussianLibraryDenoiser den(prior, sched, components, 0.2);
  const Coords x = forward_noise(prior, sched, target.coords, 0.5, 4);
  for (auto _ : state) benchmark::DoNotOptimize(den.denoise(x, 0.5));
}
BENCHMARK(BM_LibraryDenoise)->Arg(1)->Arg(17)->Arg(65);

void BM_LinearGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto route = state.range(1) == 0 ? LinearRoute::structured : LinearRoute::svd;
  const auto prior = CorrelatedPrior::calibrated(n);
  const BackboneChain target = synthetic_backbone(n, 5);
  const MaskedLinearLikelihood lik(prior, observe(target, sample_mask(n, 2)), route);
  const Coords z = noise(prior.dim(), 6);
  for (auto _ : state) benchmark::DoNotOptimize(lik.evaluate(z));
  state.SetLabel(route == LinearRoute::structured ? "structured" : "svd");
}
BENCHMARK(BM_LinearGradient)->ArgsProduct({{64, 256}, {0, 1}});

void BM_DensityGradient(benchmark::State& state) {
  const int n = 32;
  const auto prior = CorrelatedPrior::calibrated(n);
  const BackboneChain target = synthetic_backbone(n, 7);
  const int size = static_cast<int>(state.range(0));
  const Eigen::Vector3d origin = Eigen::Vector3d::Constant(-0.5 * (size - 1));
  const AtomSpec spec = AtomSpec::backbone(target.present, 2.0);
  const DensityMap obs = render_density(target.coords, spec, DensityMap::zeros(size, 1.0, origin), false);
  const DensityLikelihood lik(prior, obs, spec);
  EvalContext ctx;
  ctx.resolution = 3.0;
  const Coords z = prior.apply_inverse(target.coords + 0.3 * noise(prior.dim(), 8));
  for (auto _ : state) benchmark::DoNotOptimize(lik.evaluate(z, ctx));
}
BENCHMARK(BM_DensityGradient)->Arg(32)->Arg(48);

}  // namespace

BENCHMARK_MAIN();
