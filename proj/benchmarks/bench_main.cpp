#include <random>

#include <benchmark/benchmark.h>

#include "fvfseg/brainmap.hpp"
#include "fvfseg/candidate.hpp"
#include "fvfseg/levelset.hpp"
#include "fvfseg/morphology.hpp"
#include "fvfseg/ngmm.hpp"
#include "fvfseg/phantom.hpp"

using namespace fvfseg;

namespace {

BinaryMask noisy_mask(int n, double density) {
  const Grid g({n, n, n}, {1, 1, 1});
  std::mt19937_64 rng(1);
  std::bernoulli_distribution on(density);
  BinaryMask m(g);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, on(rng));
  return m;
}

struct Prepared {
  PhantomAtlas atlas;
  PatientVolume patient;
  TissueMixtureModel model;
  ScalarVolume normalized;
};

const Prepared& prepared() {
  static const Prepared p = [] {
    Prepared out;
    out.atlas = synth_atlas({64, 64, 64}, 7);
    out.patient = synth_patient(out.atlas, default_tumor(out.atlas));
    const ProbabilisticAtlas& a = out.atlas.atlas;
    const NormalizedVolume nt = normalize_intensity(a.template_image, a.brain_mask);
    out.model = fit_em(masked_samples(nt.volume, a.brain_mask)).model;
    out.normalized = normalize_intensity(out.patient.image, a.brain_mask).volume;
    return out;
  }();
  return p;
}

void BM_Erode(benchmark::State& state) {
  const BinaryMask m = noisy_mask(static_cast<int>(state.range(0)), 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(erode(m, 1, 2));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m.size()));
}
BENCHMARK(BM_Erode)->Arg(32)->Arg(64);

void BM_LargestComponent(benchmark::State& state) {
  const BinaryMask m = noisy_mask(static_cast<int>(state.range(0)), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(largest_component(m));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m.size()));
}
BENCHMARK(BM_LargestComponent)->Arg(32)->Arg(64);

void BM_FitEm(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::discrete_distribution<int> pick({0.2, 0.5, 0.3});
  std::normal_distribution<double> unit(0.0, 1.0);
  const double mu[3] = {0.6, 1.0, 1.3}, sd[3] = {0.08, 0.10, 0.12};
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (double& v : x) {
    const int k = pick(rng);
    v = mu[k] + sd[k] * unit(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_em(x));
}
BENCHMARK(BM_FitEm)->Arg(20000)->Arg(200000)->Unit(benchmark::kMillisecond);

void BM_Gbbm(benchmark::State& state) {
  const Prepared& p = prepared();
  for (auto _ : state) benchmark::DoNotOptimize(build_gbbm(p.normalized, p.atlas.atlas, p.model));
}
BENCHMARK(BM_Gbbm)->Unit(benchmark::kMillisecond);

void BM_Evolve(benchmark::State& state) {
  const Prepared& p = prepared();
  const GbbmResult g = build_gbbm(p.normalized, p.atlas.atlas, p.model);
  const CandidateRegion region = extract_candidate(g.map, p.atlas.atlas.brain_mask, CandidateParams{});
  const ForceContext ctx = make_force_context(p.normalized, region, 1.0, 20.0);
  const LevelSetField ls = signed_distance_init(region.mask);
  EvolutionParams params;
  params.max_iters = static_cast<int>(state.range(0));
  params.stop_tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(evolve(ls, ctx, params));
}
BENCHMARK(BM_Evolve)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Reinitialize(benchmark::State& state) {
  const Prepared& p = prepared();
  const LevelSetField ls = signed_distance_init(p.patient.truth);
  for (auto _ : state) benchmark::DoNotOptimize(reinitialize(ls));
}
BENCHMARK(BM_Reinitialize)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
