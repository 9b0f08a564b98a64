// Serial reference against the OpenMP version of each per-draw kernel.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "unl/kernels.hpp"
#include "unl/simulation.hpp"

namespace {

using namespace unl;
using kernels::Exec;

std::vector<MixtureDraw> synthetic_draws(double shift, std::size_t S, std::uint64_t stream) {
  RngStream rng(7, stream);
  std::vector<MixtureDraw> out;
  out.reserve(S);
  for (std::size_t s = 0; s < S; ++s) {
    MixtureDraw d;
    double total = 0.0;
    for (int l = 0; l < 10; ++l) {
      d.weights.push_back(rng.gamma(1.0, 1.0));
      total += d.weights.back();
      d.means.push_back(shift + rng.normal());
      d.variances.push_back(0.3 + rng.uniform());
    }
    for (double& w : d.weights) w /= total;
    out.push_back(std::move(d));
  }
  return out;
}

struct DrawFixture {
  std::vector<MixtureDraw> d1, d2, d3;
  EvaluationGrid grid;
  explicit DrawFixture(std::size_t S)
      : d1(synthetic_draws(0.0, S, 1)), d2(synthetic_draws(1.5, S, 2)), d3(synthetic_draws(3.0, S, 3)),
        grid(make_grid(-8.0, 11.0, kDefaultGridPoints)) {}
};

template <Exec E>
void BM_UnlPerDraw(benchmark::State& state) {
  const DrawFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::unl_per_draw(f.d1, f.d2, f.d3, f.grid, 0.01, E));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Exec E>
void BM_Yi3PerDraw(benchmark::State& state) {
  const DrawFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::yi3_per_draw(f.d1, f.d2, f.d3, f.grid, E));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct CurveFixture {
  std::array<FitResult, 3> fits;
  std::vector<CovariateRecord> x;
  EvaluationGrid grid;
  CurveFixture() : grid(make_grid(-8.0, 10.0, 501)) {
    ScenarioSpec spec;
    spec.id = ScenarioId::C1;
    spec.n = {150, 150, 150};
    const auto data = generate(spec, 0);
    for (std::size_t g = 0; g < 3; ++g) {
      RngStream rng(7, 10 + g);
      fits[g] = fit_lsbp(data[g], parse_effect_spec("x:w=linear,m=linear"), LsbpHyper{}, {50, 200}, rng);
    }
    for (int j = 0; j <= 8; ++j) x.push_back(CovariateRecord{{"x", -0.8 + 0.2 * j}});
  }
};

template <Exec E>
void BM_CovariateUnl(benchmark::State& state) {
  static const CurveFixture f;
  const auto r1 = kernels::rows_for(f.fits[0], f.x), r2 = kernels::rows_for(f.fits[1], f.x),
             r3 = kernels::rows_for(f.fits[2], f.x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::covariate_unl(r1, r2, r3, f.grid, 0.01, E));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.fits[0].draws.size() * f.x.size()));
}

BENCHMARK(BM_UnlPerDraw<Exec::serial>)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_UnlPerDraw<Exec::parallel>)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Yi3PerDraw<Exec::serial>)->Arg(500)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Yi3PerDraw<Exec::parallel>)->Arg(500)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CovariateUnl<Exec::serial>)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CovariateUnl<Exec::parallel>)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
