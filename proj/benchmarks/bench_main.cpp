#include <benchmark/benchmark.h>

#include <endolab/branch.hpp>
#include <endolab/cones.hpp>
#include <endolab/io.hpp>
#include <endolab/multiplicity.hpp>
#include <endolab/presets.hpp>
#include <endolab/splitting.hpp>

using namespace endolab;

namespace {

const Endomorphism& theorem_d() {
  static const Endomorphism f = build_map(preset_map("theorem-d-t3"));
  return f;
}

void BM_ComputeSplitting(benchmark::State& state) {
  SplittingOptions o;
  o.forward_depth = o.backward_depth = static_cast<int>(state.range(0));
  const TorusPoint x{0.31, 0.47, 0.12};
  const auto code = zero_code(o);
  for (auto _ : state) benchmark::DoNotOptimize(compute_splitting(theorem_d(), x, code, o));
}
BENCHMARK(BM_ComputeSplitting)->Arg(20)->Arg(40)->Arg(80);

void BM_Preimages(benchmark::State& state) {
  const TorusPoint y{0.31, 0.47, 0.12};
  for (auto _ : state) benchmark::DoNotOptimize(preimages(theorem_d(), y));
}
BENCHMARK(BM_Preimages);

void BM_VerifyCones(benchmark::State& state) {
  ConeOptions o;
  o.grid = static_cast<int>(state.range(0));
  o.samples_per_cone = 16;
  for (auto _ : state) benchmark::DoNotOptimize(verify_cone_conditions(theorem_d(), o));
}
BENCHMARK(BM_VerifyCones)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_CountDirections(benchmark::State& state) {
  MultiplicityOptions o;
  o.depth = 20;
  o.code_budget = static_cast<std::size_t>(state.range(0));
  const auto x = preset_map("theorem-d-t3").design->x;
  for (auto _ : state) benchmark::DoNotOptimize(count_directions(theorem_d(), x, Sigma::cu, o));
}
BENCHMARK(BM_CountDirections)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
