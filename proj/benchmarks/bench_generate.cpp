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

#include "vcwave/generator.h"
#include "vcwave/network.h"

#include <benchmark/benchmark.h>

namespace {

// Full 3 x 10 dilation schedule (receptive field 3070) at narrow widths.
vcwave::ModelConfig narrow_config(std::size_t channels) {
    vcwave::ModelConfig c;
    c.residual_channels = channels;
    c.skip_channels = channels;
    c.classes = 256;
    c.ppg_dim = 8;
    return c;
}

vcwave::Tensor random_conditioning(const vcwave::ModelConfig& c, std::size_t samples) {
    vcwave::Tensor h({c.conditioning_channels(), samples});
    vcwave::Rng rng(9);
    for (double& v : h.values()) v = rng.uniform();
    return h;
}

void BM_FastStep(benchmark::State& state) {
    const auto c = narrow_config(static_cast<std::size_t>(state.range(0)));
    const auto params = vcwave::init_params(c, 1);
    const auto h = random_conditioning(c, 1);
    vcwave::FastGenerator gen(params);
    for (auto _ : state) benchmark::DoNotOptimize(gen.step(128, h.data(), 1).data());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FastStep)->Arg(16)->Arg(64)->Arg(512);

// One naive sample in steady state: the whole trailing receptive field.
void BM_NaiveStep(benchmark::State& state) {
    const auto c = narrow_config(static_cast<std::size_t>(state.range(0)));
    const auto params = vcwave::init_params(c, 1);
    const std::size_t rf = vcwave::receptive_field(c);
    const auto h = random_conditioning(c, rf);
    const vcwave::ClassSequence inputs(rf, 128);
    for (auto _ : state) {
        const auto skip = vcwave::residual_stack(params, inputs, vcwave::ConditioningView::of(h));
        benchmark::DoNotOptimize(skip.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NaiveStep)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
