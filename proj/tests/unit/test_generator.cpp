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

#include "../support/synth.h"
#include "vcwave/errors.h"
#include "vcwave/generator.h"
#include "vcwave/network.h"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace vcwave;
using vcwave::testing::random_matrix;
using vcwave::testing::random_params;
using vcwave::testing::toy_config;

namespace {

ModelParams peaked_zero_model(const ModelConfig& c, int peak, double height) {
    ModelParams p = zero_params(c);
    p.head_out_bias[static_cast<std::size_t>(peak)] = height;
    return p;
}

}  // namespace

TEST_CASE("zero samples and bad lengths") {
    const ModelConfig c = toy_config(1, 2, 4, 4, 8);
    const ModelParams p = random_params(c, 1);
    const Tensor h = random_matrix(c.conditioning_channels(), 10, 2);
    CHECK(generate_naive(p, h, 0, 1).empty());
    CHECK(generate_fast(p, h, 0, 1).empty());
    CHECK_THROWS_AS(generate_naive(p, h, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_fast(p, h, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_naive(p, h, 11, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_fast(p, h, 11, 1), std::invalid_argument);
    CHECK(generate_fast(p, h, 10, 1).size() == 10);
}

TEST_CASE("a peaked zero network emits its peak class") {
    const ModelConfig c = toy_config(2, 3, 6, 6, 64);
    const Tensor h = random_matrix(c.conditioning_channels(), 200, 3);
    const ModelParams p = peaked_zero_model(c, 37, 5.0);
    for (std::uint64_t seed : {1, 2}) {
        CHECK(generate_naive(p, h, 200, seed, SamplingMode::argmax()) == ClassSequence(200, 37));
        CHECK(generate_fast(p, h, 200, seed, SamplingMode::argmax()) == ClassSequence(200, 37));
    }
    const ModelParams sharp = peaked_zero_model(c, 37, 100.0);
    CHECK(generate_fast(sharp, h, 200, 9) == ClassSequence(200, 37));
}

TEST_CASE("argmax output ignores the seed") {
    const ModelConfig c = toy_config(2, 3, 8, 8, 32);
    const ModelParams p = random_params(c, 4);
    const Tensor h = random_matrix(c.conditioning_channels(), 300, 5);
    const ClassSequence a = generate_fast(p, h, 300, 1, SamplingMode::argmax());
    CHECK(a == generate_fast(p, h, 300, 2, SamplingMode::argmax()));
    CHECK(a == generate_naive(p, h, 300, 3, SamplingMode::argmax()));
}

TEST_CASE("fast and naive generation agree exactly") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k = trial % 4 == 3 ? 3 : 2;
        const ModelConfig c = toy_config(1 + rng.index(2), 1 + rng.index(4), 4 + rng.index(8), 4 + rng.index(8),
                                         8 + rng.index(56), 1 + rng.index(5), k);
        const ModelParams p = random_params(c, rng.index(1u << 30), 0.4 + rng.uniform());
        const std::size_t n = 300;
        const Tensor h = random_matrix(c.conditioning_channels(), n, rng.index(1u << 30));
        const std::uint64_t seed = rng.index(1u << 30);
        const SamplingMode mode = trial % 5 == 4 ? SamplingMode::with_temperature(0.7) : SamplingMode::categorical();
        INFO("trial ", trial);
        CHECK(generate_fast(p, h, static_cast<std::int64_t>(n), seed, mode) ==
              generate_naive(p, h, static_cast<std::int64_t>(n), seed, mode));
    }
}

TEST_CASE("ring buffers hold the trailing layer inputs") {
    for (std::size_t k : {2, 3}) {
        const ModelConfig c = toy_config(2, 3, 6, 5, 16, 3, k);
        const ModelParams p = random_params(c, 7);
        const std::size_t n = 60;
        const Tensor h = random_matrix(c.conditioning_channels(), n, 8);
        const ClassSequence cls = generate_fast(p, h, static_cast<std::int64_t>(n), 9);
        const ClassSequence inputs = shift_inputs(cls, c.mulaw().center_class());

        FastGenerator gen(p);
        for (std::size_t t = 0; t < n; ++t) {
            gen.step(inputs[t], h.data() + t, h.dim(1));
            if (t % 7 != 0 && t + 1 != n) continue;
            const std::size_t steps = t + 1;
            std::vector<Tensor> seen;
            residual_stack(p, std::span(inputs.data(), steps), ConditioningView::of(h),
                           [&](std::size_t, const Tensor& x) { seen.push_back(x); });
            for (std::size_t l = 0; l < p.layers.size(); ++l) {
                const Tensor hist = gen.layer_history(l);
                const std::size_t w = (k - 1) * c.dilation(l);
                REQUIRE(hist.shape() == Shape{c.residual_channels, w});
                for (std::size_t r = 0; r < c.residual_channels; ++r)
                    for (std::size_t j = 0; j < w; ++j) {
                        const auto pos = static_cast<std::ptrdiff_t>(steps) - static_cast<std::ptrdiff_t>(w) +
                                         static_cast<std::ptrdiff_t>(j);
                        const double expected = pos < 0 ? 0.0 : seen[l].at(r, static_cast<std::size_t>(pos));
                        REQUIRE(hist.at(r, j) == expected);
                    }
            }
        }
        CHECK(gen.position() == n);
        gen.reset();
        CHECK(gen.position() == 0);
    }
}

TEST_CASE("fast step logits equal the teacher-forced logits") {
    const ModelConfig c = toy_config(2, 3, 8, 8, 16);
    const ModelParams p = random_params(c, 10);
    const ClassSequence cls = vcwave::testing::random_classes(50, 16, 11);
    const ClassSequence inputs = shift_inputs(cls, c.mulaw().center_class());
    const Tensor h = random_matrix(c.conditioning_channels(), 50, 12);
    const Tensor ref = forward_logits(p, cls, h);
    FastGenerator gen(p);
    for (std::size_t t = 0; t < 50; ++t) {
        const auto z = gen.step(inputs[t], h.data() + t, h.dim(1));
        for (std::size_t q = 0; q < 16; ++q) REQUIRE(z[q] == ref.at(t, q));
    }
}

TEST_CASE("a tiny temperature reproduces argmax") {
    const ModelConfig c = toy_config(2, 3, 8, 8, 32);
    const ModelParams p = random_params(c, 13);
    const Tensor h = random_matrix(c.conditioning_channels(), 400, 14);
    CHECK(generate_fast(p, h, 400, 15, SamplingMode::with_temperature(1e-6)) ==
          generate_fast(p, h, 400, 15, SamplingMode::argmax()));
}

TEST_CASE("seeds fix and distinguish categorical output") {
    const ModelConfig c = toy_config(2, 3, 8, 8, 32);
    const ModelParams p = random_params(c, 16, 0.2);
    const Tensor h = random_matrix(c.conditioning_channels(), 300, 17);
    const ClassSequence a = generate_fast(p, h, 300, 18);
    CHECK(a == generate_fast(p, h, 300, 18));
    CHECK(a != generate_fast(p, h, 300, 19));
}

TEST_CASE("sample_class draws one uniform per call") {
    const std::vector<double> logits{0.0, std::log(3.0), -50.0};
    for (const SamplingMode& mode :
         {SamplingMode::categorical(), SamplingMode::argmax(), SamplingMode::with_temperature(0.3)}) {
        Rng a(20), b(20);
        sample_class(logits, mode, a);
        b.uniform();
        CHECK(a.uniform() == b.uniform());
    }
    Rng rng(21);
    int ones = 0;
    const int draws = 40000;
    for (int i = 0; i < draws; ++i) ones += sample_class(logits, SamplingMode::categorical(), rng) == 1;
    CHECK(std::abs(ones / static_cast<double>(draws) - 0.75) < 0.01);
    CHECK(sample_class(logits, SamplingMode::argmax(), rng) == 1);
    CHECK_THROWS_AS(sample_class(logits, SamplingMode::with_temperature(0.0), rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_class({}, SamplingMode::categorical(), rng), std::invalid_argument);
}

TEST_CASE("temperature sharpens the distribution") {
    // softmax([0, ln 3] / 0.5) puts 9/10 on class 1.
    const std::vector<double> logits{0.0, std::log(3.0)};
    Rng rng(22);
    int ones = 0;
    for (int i = 0; i < 40000; ++i) ones += sample_class(logits, SamplingMode::with_temperature(0.5), rng);
    CHECK(std::abs(ones / 40000.0 - 0.9) < 0.01);
}

TEST_CASE("conversion conditioning and length") {
    const ModelConfig c = toy_config(1, 3, 6, 6, 64, 3);
    const ModelParams p = random_params(c, 23);
    const std::vector<int> periods{80, 100, 64};
    const WaveformSignal src = vcwave::testing::tone_sequence(periods, 1600);
    const ConditioningTrack track = vcwave::testing::tone_track(periods, 1600, 3);
    const F0Stats target{std::log(220.0), 0.1, 0};

    const ConversionResult r = convert(src, track.ppg, p, target);
    const std::size_t frames = track.frames();
    CHECK(r.audio.samples.size() == frames * 80);
    CHECK(r.audio.sample_rate == kSampleRate);
    CHECK(r.classes.size() == frames * 80);
    CHECK(r.conditioning.samples() == frames * 80);

    const PitchTrack est = fit_frames(estimate_f0_vuv(src), frames);
    CHECK(r.track.vuv == est.vuv);
    CHECK(r.source_f0 == est.f0);
    const std::vector<double> f0s[] = {est.f0};
    const F0Stats src_stats = f0_statistics(std::span<const std::vector<double>>(f0s));
    const std::vector<double> expected_f0 = transform_f0(est.f0, src_stats, target);
    CHECK(r.track.f0 == expected_f0);
    const auto expected_log_f0 = interpolated_log_f0(expected_f0);
    const Tensor& h = r.conditioning.matrix;
    for (std::size_t n = 0; n < frames; ++n) {
        CHECK(h.at(r.conditioning.log_f0_row(), n * 80) == expected_log_f0[n]);
        CHECK(h.at(r.conditioning.vuv_row(), n * 80) == static_cast<double>(est.vuv[n]));
    }
    CHECK(r.audio.samples == mulaw_decode(r.classes, c.mulaw()));
}

TEST_CASE("conversion with matching stats keeps the f0 contour") {
    const ModelConfig c = toy_config(1, 2, 4, 4, 16, 2);
    const ModelParams p = random_params(c, 24);
    const std::vector<int> periods{80, 100};
    const WaveformSignal src = vcwave::testing::tone_sequence(periods, 1600);
    const ConditioningTrack track = vcwave::testing::tone_track(periods, 1600, 2);
    const PitchTrack est = fit_frames(estimate_f0_vuv(src), track.frames());
    const std::vector<double> f0s[] = {est.f0};
    const F0Stats own = f0_statistics(std::span<const std::vector<double>>(f0s));
    ConvertOptions opt;
    opt.source_stats = own;
    const ConversionResult r = convert(src, track.ppg, p, own, opt);
    CHECK(r.audio.samples.size() == track.frames() * 80);
    for (std::size_t n = 0; n < est.f0.size(); ++n) CHECK(r.track.f0[n] == doctest::Approx(est.f0[n]).epsilon(1e-12));
}

TEST_CASE("conversion rejects a PPG of the wrong width") {
    const ModelConfig c = toy_config(1, 2, 4, 4, 16, 5);
    const ModelParams p = random_params(c, 25);
    const WaveformSignal src = vcwave::testing::tone_sequence({80}, 1600);
    try {
        convert(src, Tensor({7, 20}), p, F0Stats{5.0, 0.1, 0});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find('7') != std::string::npos);
        CHECK(what.find('5') != std::string::npos);
    }
    CHECK_THROWS_AS(convert(src, Tensor({5, 40}), p, F0Stats{5.0, 0.1, 0}), DataError);
}

TEST_CASE("seed 42 over 1000 samples") {
    const ModelConfig c = toy_config(2, 4, 8, 8, 64, 4);
    const ModelParams p = random_params(c, 42);
    const Tensor h = random_matrix(c.conditioning_channels(), 1000, 43);
    const ClassSequence fast = generate_fast(p, h, 1000, 42);
    CHECK(fast == generate_naive(p, h, 1000, 42));
    CHECK(std::set<int>(fast.begin(), fast.end()).size() > 1);
}
