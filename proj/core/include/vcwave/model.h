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

#pragma once

#include "vcwave/codec.h"
#include "vcwave/optim.h"
#include "vcwave/tensor.h"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace vcwave {

// Shape of the conditional WaveNet. Defaults are the full-size configuration:
// 3 blocks of 10 dilated layers (dilations 1, 2, ..., 512), 512 residual and
// gate channels, 256 skip channels, 256 classes, 42-dim PPG + f0 + vuv.
struct ModelConfig {
    std::size_t blocks = 3;
    std::size_t layers_per_block = 10;
    std::size_t kernel_size = 2;
    std::size_t residual_channels = 512;
    std::size_t skip_channels = 256;
    std::size_t classes = 256;
    std::size_t ppg_dim = 42;

    std::size_t conditioning_channels() const { return ppg_dim + 2; }
    std::size_t layer_count() const { return blocks * layers_per_block; }
    std::size_t dilation(std::size_t layer) const { return std::size_t{1} << (layer % layers_per_block); }
    MuLawConfig mulaw() const { return MuLawConfig{static_cast<int>(classes)}; }

    // Throws std::invalid_argument on a zero channel count or depth.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

// Number of past samples (including the current input) that can influence a
// prediction: 1 + blocks * sum_l (K - 1) * 2^l.
std::size_t receptive_field(const ModelConfig& config);

// One gated residual layer. filter/gate weights are [R x R x K] dilated
// causal convolutions; cond_* project the conditioning [R x C_h].
struct LayerParams {
    Tensor filter_weight, filter_bias;
    Tensor gate_weight, gate_bias;
    Tensor cond_filter_weight, cond_gate_weight;
    Tensor residual_weight, residual_bias;
    Tensor skip_weight, skip_bias;

    bool operator==(const LayerParams&) const = default;
};

struct ModelParams {
    ModelConfig config;
    Tensor embedding;        // [Q x R]
    std::vector<LayerParams> layers;
    Tensor head_hidden_weight, head_hidden_bias;  // [S x S], [S]
    Tensor head_out_weight, head_out_bias;        // [Q x S], [Q]

    // Visits every tensor in a fixed order with its checkpoint name.
    template <class F>
    void for_each(F&& fn) {
        visit(*this, fn);
    }
    template <class F>
    void for_each(F&& fn) const {
        visit(*this, fn);
    }

    std::size_t parameter_count() const;
    bool all_finite() const;
    bool operator==(const ModelParams&) const = default;

private:
    template <class Self, class F>
    static void visit(Self& self, F& fn) {
        fn(std::string("embedding"), self.embedding);
        for (std::size_t i = 0; i < self.layers.size(); ++i) {
            auto& l = self.layers[i];
            const std::string p = "block" + std::to_string(i / self.config.layers_per_block) + ".layer" +
                                  std::to_string(i % self.config.layers_per_block) + ".";
            fn(p + "filter_weight", l.filter_weight);
            fn(p + "filter_bias", l.filter_bias);
            fn(p + "gate_weight", l.gate_weight);
            fn(p + "gate_bias", l.gate_bias);
            fn(p + "cond_filter_weight", l.cond_filter_weight);
            fn(p + "cond_gate_weight", l.cond_gate_weight);
            fn(p + "residual_weight", l.residual_weight);
            fn(p + "residual_bias", l.residual_bias);
            fn(p + "skip_weight", l.skip_weight);
            fn(p + "skip_bias", l.skip_bias);
        }
        fn(std::string("head.hidden_weight"), self.head_hidden_weight);
        fn(std::string("head.hidden_bias"), self.head_hidden_bias);
        fn(std::string("head.out_weight"), self.head_out_weight);
        fn(std::string("head.out_bias"), self.head_out_bias);
    }
};

// All-zero parameters with shapes derived from config.
ModelParams zero_params(const ModelConfig& config);

// Weights ~ U(-a, a) with a = sqrt(1 / fan_in); biases zero.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Closed-form parameter count for a configuration.
std::size_t expected_parameter_count(const ModelConfig& config);

// Pairs each parameter with the matching tensor of `grads` for Adam and the
// gradient checker.
std::vector<ParamSlot> param_slots(ModelParams& params, const ModelParams& grads);

// Element-wise a += b over every tensor.
void accumulate(ModelParams& a, const ModelParams& b);

}  // namespace vcwave
