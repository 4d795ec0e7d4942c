// Copyright 2026 The annulab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "annulab/billiards.hpp"
#include "annulab/boxdyn.hpp"
#include "annulab/fixedpoint.hpp"
#include "annulab/horseshoe.hpp"
#include "annulab/registry.hpp"
#include "annulab/zoo.hpp"

namespace {

using namespace annulab;

void BM_IterateClosedForm(benchmark::State& state) {
  const LiftMap m = build_map(zoo::rnf(0.05, 6.0, 0.9));
  for (auto _ : state) benchmark::DoNotOptimize(iterate(m, {0.3, 0.4}, state.range(0)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IterateClosedForm)->Arg(1000)->Arg(10000);

void BM_IterateIntegrated(benchmark::State& state) {
  const LiftMap m = build_map(zoo::iz(1.0));
  for (auto _ : state) benchmark::DoNotOptimize(iterate(m, {0.3, 0.4}, state.range(0)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IterateIntegrated)->Arg(100);

void BM_EllipseBilliardStep(benchmark::State& state) {
  const TableSpec t = TableSpec::ellipse(2.0, 1.0);
  BilliardState st{0.1, 0.7};
  for (auto _ : state) {
    st = billiard_step(t, st);
    benchmark::DoNotOptimize(st);
  }
}
BENCHMARK(BM_EllipseBilliardStep);

void BM_BuildBoxGraph(benchmark::State& state) {
  const LiftMap m = build_map(zoo::diss_rot(0.318, 0.9));
  const BoxGrid grid(static_cast<int>(state.range(0)), {0.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(build_box_graph(m, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_BuildBoxGraph)->Arg(6)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_ChainRecurrent(benchmark::State& state) {
  const LiftMap m = build_map(zoo::pt(0.0, 0.1, 0.0, 0.5));
  const BoxGraph g = build_box_graph(m, YBand{0.0, 1.0}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(chain_recurrent_boxes(g));
}
BENCHMARK(BM_ChainRecurrent)->Unit(benchmark::kMillisecond);

void BM_FindFixedPoints(benchmark::State& state) {
  const LiftMap m = build_map(zoo::pt(0.0, 0.1, 0.0, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(find_fixed_points(m));
}
BENCHMARK(BM_FindFixedPoints)->Unit(benchmark::kMillisecond);

void BM_OrbitWitness(benchmark::State& state) {
  const HorseshoeClaims c = verify_example_claims();
  const LiftMap m = make_horseshoe();
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_orbit_witness(m, c.U, 5, c.U.translated(1.0)));
  }
}
BENCHMARK(BM_OrbitWitness)->Unit(benchmark::kMillisecond);

void BM_ReturningSearch(benchmark::State& state) {
  const LiftMap m = make_horseshoe();
  const BoxGraph g = build_box_graph(m, BoxGrid(6, {0.0, 1.0}));
  ReturningSearchOptions opts;
  opts.base = verify_example_claims().U;
  for (auto _ : state) benchmark::DoNotOptimize(find_returning_disk(m, g, Sign::positive, opts));
}
BENCHMARK(BM_ReturningSearch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
