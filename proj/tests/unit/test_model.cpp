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
#include "vcwave/checkpoint.h"
#include "vcwave/errors.h"
#include "vcwave/model.h"
#include "vcwave/network.h"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <filesystem>
#include <iterator>
#include <limits>

using namespace vcwave;
using vcwave::testing::random_classes;
using vcwave::testing::random_matrix;
using vcwave::testing::random_params;
using vcwave::testing::TempDir;
using vcwave::testing::toy_config;

namespace {

std::vector<char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<char>& bytes) {
    std::ofstream(path, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bool rows_equal(const Tensor& a, const Tensor& b, std::size_t row) {
    for (std::size_t q = 0; q < a.dim(1); ++q)
        if (a.at(row, q) != b.at(row, q)) return false;
    return true;
}

}  // namespace

TEST_CASE("receptive field examples") {
    CHECK(receptive_field(toy_config(1, 1, 4, 4, 8)) == 2);
    CHECK(receptive_field(toy_config(2, 3, 4, 4, 8)) == 15);
    CHECK(receptive_field(ModelConfig{}) == 3070);
    CHECK(receptive_field(toy_config(1, 2, 4, 4, 8, 4, 3)) == 1 + 2 * (1 + 2));
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(toy_config(0, 1, 4, 4, 8).validate(), std::invalid_argument);
    CHECK_THROWS_AS(toy_config(1, 1, 0, 4, 8).validate(), std::invalid_argument);
    CHECK_THROWS_AS(toy_config(1, 1, 4, 4, 1).validate(), std::invalid_argument);
    const ModelConfig c{};
    for (std::size_t i = 0; i < c.layer_count(); ++i) CHECK(c.dilation(i) == std::size_t{1} << (i % 10));
}

TEST_CASE("default parameter count") {
    // Per layer: 2 gated convs (512*512*2 + 512), 2 conditioning projections
    // (512*44), residual (512*512 + 512), skip (256*512 + 256).
    const std::size_t per_layer = 2 * (512 * 512 * 2 + 512) + 2 * 512 * 44 + (512 * 512 + 512) + (256 * 512 + 256);
    const std::size_t total = 256 * 512 + 30 * per_layer + (256 * 256 + 256) + (256 * 256 + 256);
    CHECK(total == 44921856);
    CHECK(expected_parameter_count(ModelConfig{}) == total);
    CHECK(zero_params(ModelConfig{}).parameter_count() == total);
}

TEST_CASE("init is deterministic and scaled by fan-in") {
    const ModelConfig c = toy_config(1, 3, 32, 24, 64, 10);
    const ModelParams a = init_params(c, 5), b = init_params(c, 5), other = init_params(c, 6);
    CHECK(a == b);
    CHECK(!(a == other));
    CHECK(a.parameter_count() == expected_parameter_count(c));
    a.for_each([&](const std::string& name, const Tensor& t) {
        if (t.rank() == 1) {
            for (double v : t.values()) REQUIRE(v == 0.0);
            return;
        }
        const double fan_in = static_cast<double>(name == "embedding" ? c.classes : t.size() / t.dim(0));
        const double bound = std::sqrt(1.0 / fan_in);
        double mean = 0, sq = 0;
        for (double v : t.values()) {
            REQUIRE(std::abs(v) <= bound);
            mean += v;
        }
        mean /= static_cast<double>(t.size());
        for (double v : t.values()) sq += (v - mean) * (v - mean);
        const double sd = std::sqrt(sq / static_cast<double>(t.size() - 1));
        INFO(name);
        CHECK(std::abs(sd - bound / std::sqrt(3.0)) <= 0.1 * bound / std::sqrt(3.0));
    });
}

TEST_CASE("zero network returns the head bias") {
    const ModelConfig c = toy_config(2, 3, 6, 5, 12);
    ModelParams p = zero_params(c);
    for (std::size_t q = 0; q < 12; ++q) p.head_out_bias[q] = 0.1 * static_cast<double>(q) - 0.3;
    const Tensor h = random_matrix(c.conditioning_channels(), 30, 1);
    const Tensor logits = forward_logits(p, random_classes(30, 12, 2), h);
    REQUIRE(logits.shape() == Shape{30, 12});
    for (std::size_t t = 0; t < 30; ++t)
        for (std::size_t q = 0; q < 12; ++q) REQUIRE(logits.at(t, q) == p.head_out_bias[q]);
}

TEST_CASE("softmax rows of the logits sum to one") {
    const ModelConfig c = toy_config(2, 3, 8, 8, 32);
    const ModelParams p = random_params(c, 3);
    const Tensor logits = forward_logits(p, random_classes(50, 32, 4), random_matrix(c.conditioning_channels(), 50, 5));
    for (std::size_t t = 0; t < 50; ++t) {
        double mx = logits.at(t, 0);
        for (std::size_t q = 1; q < 32; ++q) mx = std::max(mx, logits.at(t, q));
        double z = 0;
        for (std::size_t q = 0; q < 32; ++q) z += std::exp(logits.at(t, q) - mx);
        double sum = 0;
        for (std::size_t q = 0; q < 32; ++q) sum += std::exp(logits.at(t, q) - mx) / z;
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("causality probes") {
    const ModelConfig c = toy_config(2, 3, 8, 8, 16);
    const ModelParams p = random_params(c, 7);
    const std::size_t n = 40;
    const ClassSequence base = random_classes(n, 16, 8);
    const Tensor h = random_matrix(c.conditioning_channels(), n, 9);
    const Tensor ref = forward_logits(p, base, h);
    Rng rng(10);
    for (int probe = 0; probe < 12; ++probe) {
        const std::size_t t0 = rng.index(n);
        ClassSequence cls = base;
        cls[t0] = (cls[t0] + 1 + static_cast<int>(rng.index(15))) % 16;
        const Tensor a = forward_logits(p, cls, h);
        for (std::size_t t = 0; t <= t0; ++t) REQUIRE(rows_equal(a, ref, t));
        if (t0 + 1 < n) CHECK(!rows_equal(a, ref, t0 + 1));

        Tensor h2 = h;
        h2.at(rng.index(h.dim(0)), t0) += 0.5;
        const Tensor b = forward_logits(p, base, h2);
        for (std::size_t t = 0; t < t0; ++t) REQUIRE(rows_equal(b, ref, t));
        CHECK(!rows_equal(b, ref, t0));
    }
}

TEST_CASE("receptive field is tight") {
    // logits[t] reads the inputs at positions (t - rf, t]; the input at
    // position p is classes[p - 1].
    const ModelConfig c = toy_config(2, 3, 8, 8, 16);
    const std::size_t rf = receptive_field(c);
    const ModelParams p = random_params(c, 11);
    const std::size_t n = rf + 10, t = n - 1;
    const ClassSequence base = random_classes(n, 16, 12);
    const Tensor h = random_matrix(c.conditioning_channels(), n, 13);
    const Tensor ref = forward_logits(p, base, h);

    ClassSequence inside = base;
    inside[t - rf] = (inside[t - rf] + 5) % 16;
    CHECK(!rows_equal(forward_logits(p, inside, h), ref, t));

    ClassSequence outside = base;
    outside[t - rf - 1] = (outside[t - rf - 1] + 5) % 16;
    CHECK(rows_equal(forward_logits(p, outside, h), ref, t));
}

TEST_CASE("zeroed conditioning projections ignore h") {
    const ModelConfig c = toy_config(2, 2, 8, 8, 16);
    ModelParams p = random_params(c, 14);
    for (auto& l : p.layers) {
        l.cond_filter_weight.fill(0.0);
        l.cond_gate_weight.fill(0.0);
    }
    const ClassSequence cls = random_classes(30, 16, 15);
    const Tensor a = forward_logits(p, cls, random_matrix(c.conditioning_channels(), 30, 16));
    const Tensor b = forward_logits(p, cls, random_matrix(c.conditioning_channels(), 30, 17, -5, 5));
    CHECK(a == b);
}

TEST_CASE("forward errors") {
    const ModelConfig c = toy_config(1, 2, 4, 4, 8);
    const ModelParams p = random_params(c, 1);
    const ClassSequence cls = random_classes(10, 8, 2);
    CHECK_THROWS_AS(forward_logits(p, cls, random_matrix(c.conditioning_channels() + 1, 10, 3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(forward_logits(p, cls, random_matrix(c.conditioning_channels(), 9, 3)), std::invalid_argument);
    ClassSequence bad = cls;
    bad[4] = 8;
    CHECK_THROWS_AS(forward_logits(p, bad, random_matrix(c.conditioning_channels(), 10, 3)), std::out_of_range);
    ModelParams huge = p;
    huge.head_out_bias[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(forward_logits(huge, cls, random_matrix(c.conditioning_channels(), 10, 3)), NumericError);
}

TEST_CASE("sequence loss matches the logits") {
    const ModelConfig c = toy_config(1, 3, 6, 6, 10);
    const ModelParams p = random_params(c, 18);
    const ClassSequence cls = random_classes(25, 10, 19);
    const Tensor h = random_matrix(c.conditioning_channels(), 25, 20);
    const Tensor logits = forward_logits(p, cls, h);
    long double total = 0;
    for (std::size_t t = 0; t < 25; ++t) {
        long double z = 0;
        for (std::size_t q = 0; q < 10; ++q) z += std::exp(static_cast<long double>(logits.at(t, q)));
        total += std::log(z) - logits.at(t, static_cast<std::size_t>(cls[t]));
    }
    CHECK(sequence_loss(p, cls, h) == doctest::Approx(static_cast<double>(total / 25)).epsilon(1e-12));
}

TEST_CASE("gradient check through the whole network") {
    const ModelConfig c = toy_config(2, 3, 8, 8, 16);
    ModelParams p = random_params(c, 21);
    const ClassSequence cls = random_classes(40, 16, 22);
    const ClassSequence inputs = shift_inputs(cls, c.mulaw().center_class());
    const Tensor h = random_matrix(c.conditioning_channels(), 40, 23);
    const std::size_t context = 5;
    const std::span<const int> targets(cls.data() + context, cls.size() - context);
    ModelParams grads = zero_params(c);
    segment_forward_backward(p, inputs, targets, h, context, 1.0 / 35.0, &grads);
    const auto loss = [&] {
        return segment_forward_backward(p, inputs, targets, h, context, 1.0 / 35.0, nullptr).loss_sum / 35.0;
    };
    const ModelParams before = p;
    const auto slots = param_slots(p, grads);
    const GradCheckReport r = grad_check(loss, slots, 300, 1e-5, 24);
    INFO(r.worst_parameter, " ", r.worst_analytic, " vs ", r.worst_numeric);
    CHECK(r.max_relative_error < 1e-4);
    CHECK(p == before);
}

// ---- checkpoints -------------------------------------------------------------

TEST_CASE("checkpoint save, load, save is byte-identical") {
    TempDir dir("model");
    const ModelConfig c = toy_config(2, 3, 6, 5, 16, 7);
    const ModelParams p = random_params(c, 25);
    save_checkpoint(dir / "a.vckp", p);
    const ModelParams q = load_checkpoint(dir / "a.vckp");
    CHECK(q == p);
    save_checkpoint(dir / "b.vckp", q);
    CHECK(slurp(dir / "a.vckp") == slurp(dir / "b.vckp"));
    CHECK(read_checkpoint_config(dir / "a.vckp") == c);
    const auto bytes = slurp(dir / "a.vckp");
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "VCKP");
}

TEST_CASE("checkpoint tensors are little-endian doubles") {
    CheckpointData d;
    d.header["k"] = "v";
    d.tensors.emplace_back("t", Tensor({1}, {1.0}));
    const auto bytes = encode_checkpoint(d);
    // 0x3FF0000000000000 stored least significant byte first.
    const std::vector<char> tail(bytes.end() - 8, bytes.end());
    CHECK(tail == std::vector<char>{0, 0, 0, 0, 0, 0, static_cast<char>(0xF0), 0x3F});
    const CheckpointData back = decode_checkpoint(bytes, "mem");
    CHECK(back.header == d.header);
    CHECK(back.tensors == d.tensors);
}

TEST_CASE("checkpoint error paths") {
    TempDir dir("model");
    const ModelConfig c = toy_config(1, 2, 4, 4, 8);
    const ModelParams p = random_params(c, 26);
    save_checkpoint(dir / "ok.vckp", p);
    auto bytes = slurp(dir / "ok.vckp");

    CHECK_THROWS_AS(load_checkpoint(dir / "missing.vckp"), DataError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    spit(dir / "magic.vckp", bad_magic);
    CHECK_THROWS_AS(load_checkpoint(dir / "magic.vckp"), DataError);

    auto bad_version = bytes;
    bad_version[4] = 9;
    spit(dir / "version.vckp", bad_version);
    CHECK_THROWS_AS(load_checkpoint(dir / "version.vckp"), DataError);

    spit(dir / "short.vckp", std::vector<char>(bytes.begin(), bytes.end() - 5));
    CHECK_THROWS_AS(load_checkpoint(dir / "short.vckp"), DataError);

    CheckpointData d = decode_checkpoint(bytes, "ok");
    d.tensors[1].second = Tensor({4, 4, 3});
    spit(dir / "shape.vckp", encode_checkpoint(d));
    CHECK_THROWS_AS(load_checkpoint(dir / "shape.vckp"), DataError);

    CheckpointData e = decode_checkpoint(bytes, "ok");
    e.header.erase(e.header.begin());
    spit(dir / "header.vckp", encode_checkpoint(e));
    CHECK_THROWS_AS(load_checkpoint(dir / "header.vckp"), DataError);

    ModelParams nan = p;
    nan.embedding[3] = std::nan("");
    CHECK_THROWS_AS(save_checkpoint(dir / "nan.vckp", nan), NumericError);
    CHECK(!std::filesystem::exists(dir / "nan.vckp"));
}

TEST_CASE("optimizer state round trip") {
    TempDir dir("model");
    const ModelConfig c = toy_config(1, 2, 4, 4, 8);
    ModelParams p = random_params(c, 27);
    const ModelParams g = random_params(c, 28);
    AdamState s;
    s.lr = 3e-4;
    adam_step(param_slots(p, g), s);
    adam_step(param_slots(p, g), s);
    CHECK(adam_state_path("/x/ckpt_00000010.vckp") == "/x/ckpt_00000010.adam.vckp");
    save_adam_state(dir / "s.adam.vckp", s, p);
    const AdamState r = load_adam_state(dir / "s.adam.vckp", p);
    CHECK(r.step == 2);
    CHECK(r.lr == s.lr);
    CHECK(r.beta1 == s.beta1);
    CHECK(r.beta2 == s.beta2);
    CHECK(r.eps == s.eps);
    CHECK(r.first_moment == s.first_moment);
    CHECK(r.second_moment == s.second_moment);
    CHECK_THROWS_AS(load_adam_state(dir / "s.adam.vckp", random_params(toy_config(1, 2, 4, 4, 16), 1)), DataError);
}
