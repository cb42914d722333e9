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

#include "vcwave/model.h"

#include "vcwave/rng.h"

#include <cmath>
#include <stdexcept>

namespace vcwave {

void ModelConfig::validate() const {
    if (blocks < 1 || layers_per_block < 1) throw std::invalid_argument("model config: need at least one layer");
    if (layers_per_block > 30) throw std::invalid_argument("model config: layers_per_block must be <= 30");
    if (kernel_size < 1) throw std::invalid_argument("model config: kernel size must be >= 1");
    if (residual_channels < 1 || skip_channels < 1 || ppg_dim < 1)
        throw std::invalid_argument("model config: channel counts must be >= 1");
    if (classes < 2) throw std::invalid_argument("model config: need at least 2 classes");
}

std::size_t receptive_field(const ModelConfig& config) {
    config.validate();
    std::size_t per_block = 0;
    for (std::size_t l = 0; l < config.layers_per_block; ++l) per_block += (config.kernel_size - 1) << l;
    return 1 + config.blocks * per_block;
}

ModelParams zero_params(const ModelConfig& config) {
    config.validate();
    const std::size_t r = config.residual_channels, s = config.skip_channels, q = config.classes,
                      k = config.kernel_size, c = config.conditioning_channels();
    ModelParams p;
    p.config = config;
    p.embedding = Tensor({q, r});
    p.layers.resize(config.layer_count());
    for (LayerParams& l : p.layers) {
        l.filter_weight = Tensor({r, r, k});
        l.filter_bias = Tensor({r});
        l.gate_weight = Tensor({r, r, k});
        l.gate_bias = Tensor({r});
        l.cond_filter_weight = Tensor({r, c});
        l.cond_gate_weight = Tensor({r, c});
        l.residual_weight = Tensor({r, r});
        l.residual_bias = Tensor({r});
        l.skip_weight = Tensor({s, r});
        l.skip_bias = Tensor({s});
    }
    p.head_hidden_weight = Tensor({s, s});
    p.head_hidden_bias = Tensor({s});
    p.head_out_weight = Tensor({q, s});
    p.head_out_bias = Tensor({q});
    return p;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
    ModelParams p = zero_params(config);
    Rng rng(seed);
    p.for_each([&](const std::string& name, Tensor& t) {
        if (t.rank() == 1) return;  // biases stay zero
        // Fan-in is every input dimension. The embedding [Q x R] acts as a
        // 1x1 convolution over a one-hot Q-vector, so its fan-in is Q.
        const std::size_t fan_in = name == "embedding" ? t.dim(0) : t.size() / t.dim(0);
        const double a = std::sqrt(1.0 / static_cast<double>(fan_in));
        for (double& v : t.values()) v = rng.uniform(-a, a);
    });
    return p;
}

std::size_t expected_parameter_count(const ModelConfig& c) {
    const std::size_t r = c.residual_channels, s = c.skip_channels, q = c.classes, k = c.kernel_size,
                      h = c.conditioning_channels();
    const std::size_t per_layer = 2 * (r * r * k + r) + 2 * r * h + (r * r + r) + (s * r + s);
    return q * r + c.layer_count() * per_layer + (s * s + s) + (q * s + q);
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for_each([&](const std::string&, const Tensor& t) { n += t.size(); });
    return n;
}

bool ModelParams::all_finite() const {
    bool ok = true;
    for_each([&](const std::string&, const Tensor& t) { ok = ok && t.all_finite(); });
    return ok;
}

std::vector<ParamSlot> param_slots(ModelParams& params, const ModelParams& grads) {
    std::vector<const Tensor*> g;
    grads.for_each([&](const std::string&, const Tensor& t) { g.push_back(&t); });
    std::vector<ParamSlot> slots;
    std::size_t i = 0;
    params.for_each([&](const std::string& name, Tensor& t) {
        if (i >= g.size() || g[i]->shape() != t.shape())
            throw std::invalid_argument("param_slots: gradient layout does not match parameters at " + name);
        slots.push_back(ParamSlot{name, &t, g[i++]});
    });
    return slots;
}

void accumulate(ModelParams& a, const ModelParams& b) {
    std::vector<const Tensor*> src;
    b.for_each([&](const std::string&, const Tensor& t) { src.push_back(&t); });
    std::size_t i = 0;
    a.for_each([&](const std::string& name, Tensor& t) {
        if (i >= src.size() || src[i]->shape() != t.shape())
            throw std::invalid_argument("accumulate: layout mismatch at " + name);
        const Tensor& s = *src[i++];
        for (std::size_t j = 0; j < t.size(); ++j) t[j] += s[j];
    });
}

}  // namespace vcwave
