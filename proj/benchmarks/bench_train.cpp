// Copyright 2026 The vcwave Authors
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

#include "vcwave/trainer.h"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

namespace {

void BM_TrainStep(benchmark::State& state) {
    vcwave::ModelConfig c;
    c.blocks = 2;
    c.layers_per_block = 6;
    c.residual_channels = static_cast<std::size_t>(state.range(0));
    c.skip_channels = c.residual_channels;
    c.ppg_dim = 4;
    const std::size_t n = 16000;
    vcwave::Utterance u;
    u.name = "tone";
    u.conditioning = vcwave::Tensor({c.conditioning_channels(), n});
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = 0.5 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 80.0);
    u.classes = vcwave::mulaw_encode(x);
    const std::vector<vcwave::Utterance> corpus{u};
    vcwave::TrainerConfig tc;
    tc.model = c;
    tc.batch_samples = 2000;
    tc.segment_samples = 1000;
    auto params = vcwave::init_params(c, 1);
    vcwave::AdamState adam;
    std::uint64_t step = 0;
    for (auto _ : state) {
        const auto batch = vcwave::make_batch(corpus, tc, step++);
        benchmark::DoNotOptimize(vcwave::train_step(params, corpus, batch, adam, 1).loss);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tc.batch_samples));
}
BENCHMARK(BM_TrainStep)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
