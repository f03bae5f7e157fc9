// Copyright 2026 The tsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "tsense/receiver.hpp"
#include "tsense/two_stage.hpp"

using namespace tsense;

namespace {

const ChannelParams kChannel{0.9, 0.7, 0.3, 0.4};

void BM_SqueezerElements(benchmark::State& state) {
    const FockCutoff cut{static_cast<int>(state.range(0)), 1e-2};
    for (auto _ : state) benchmark::DoNotOptimize(tms_matrix_elements(SqueezeParams(0.3), cut));
}
BENCHMARK(BM_SqueezerElements)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_PmfSandwich(benchmark::State& state) {
    const ReceiverConfig rc{SqueezeParams(-0.5664), 0.7, FockCutoff{static_cast<int>(state.range(0)), 1e-8}};
    for (auto _ : state) benchmark::DoNotOptimize(pmf_tms_pnr(0.9, rc, kChannel));
}
BENCHMARK(BM_PmfSandwich)->Arg(20)->Arg(25)->Arg(30)->Unit(benchmark::kMillisecond);

// Cached receiver columns: the cost seen by each likelihood evaluation.
void BM_LikelihoodModelEval(benchmark::State& state) {
    const ReceiverConfig rc{SqueezeParams(-0.5664), 0.7, FockCutoff{20, 1e-8}};
    LikelihoodModel model(rc, kChannel);
    double theta = 0.6;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.probs(theta));
        theta += 1e-6;
    }
}
BENCHMARK(BM_LikelihoodModelEval)->Unit(benchmark::kMillisecond);

void BM_SelectOmega(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(select_omega(0.9, 0.7, kChannel, FockCutoff{20, 1e-8}));
}
BENCHMARK(BM_SelectOmega)->Unit(benchmark::kMillisecond);

void BM_Trial(benchmark::State& state) {
    RunConfig cfg;
    cfg.channel = kChannel;
    cfg.n_total = state.range(0);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        cfg.seed = seed++;
        benchmark::DoNotOptimize(run_trial_guarded(cfg));
    }
}
BENCHMARK(BM_Trial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond)->Iterations(5);

}  // namespace

BENCHMARK_MAIN();
