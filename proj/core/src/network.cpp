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

#include "vcwave/network.h"

#include "vcwave/errors.h"
#include "vcwave/kernels.h"
#include "vcwave/tape.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vcwave {

namespace {

Tensor bias_columns(const Tensor& bias, std::size_t steps) {
    Tensor out({bias.size(), steps});
    for (std::size_t o = 0; o < bias.size(); ++o) std::fill(out.row(o), out.row(o) + steps, bias[o]);
    return out;
}

// out = bias + W x for W [C_out x C_in].
Tensor pointwise(const Tensor& weight, const Tensor& bias, const Tensor& x) {
    const std::size_t steps = x.dim(1);
    Tensor out = bias_columns(bias, steps);
    kernels::gemm_acc(weight.dim(0), steps, weight.dim(1), {weight.data(), weight.dim(1), 1}, x.data(), steps,
                      out.data(), steps);
    return out;
}

Tensor gated_preactivation(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t dilation,
                           const Tensor& cond_weight, ConditioningView h) {
    const std::size_t steps = x.dim(1);
    Tensor out = bias_columns(bias, steps);
    conv1d_causal_acc(x, weight, dilation, out);
    kernels::gemm_acc(cond_weight.dim(0), steps, cond_weight.dim(1), {cond_weight.data(), cond_weight.dim(1), 1},
                      h.data, h.ld, out.data(), steps);
    return out;
}

void relu_inplace(Tensor& t) {
    for (double& v : t.values()) v = v > 0.0 ? v : 0.0;
}

}  // namespace

ClassSequence shift_inputs(std::span<const int> classes, int center_class) {
    ClassSequence inputs(classes.size());
    if (!classes.empty()) {
        inputs[0] = center_class;
        std::copy(classes.begin(), classes.end() - 1, inputs.begin() + 1);
    }
    return inputs;
}

void validate_inputs(const ModelConfig& config, std::span<const int> classes, std::size_t h_channels,
                     std::size_t h_columns, std::size_t steps) {
    if (h_channels != config.conditioning_channels())
        throw std::invalid_argument("conditioning has " + std::to_string(h_channels) + " channels, model expects " +
                                    std::to_string(config.conditioning_channels()));
    if (h_columns < steps)
        throw std::invalid_argument("conditioning has " + std::to_string(h_columns) + " columns, need at least " +
                                    std::to_string(steps));
    for (int c : classes)
        if (c < 0 || static_cast<std::size_t>(c) >= config.classes)
            throw std::out_of_range("class " + std::to_string(c) + " outside [0, " + std::to_string(config.classes) +
                                    ")");
}

Tensor residual_stack(const ModelParams& params, std::span<const int> inputs, ConditioningView h,
                      const LayerObserver& observer) {
    const ModelConfig& cfg = params.config;
    const std::size_t steps = inputs.size(), r = cfg.residual_channels;
    if (h.channels != cfg.conditioning_channels())
        throw std::invalid_argument("residual_stack: conditioning channel mismatch");

    Tensor x({r, steps});
    for (std::size_t t = 0; t < steps; ++t) {
        const double* e = params.embedding.row(static_cast<std::size_t>(inputs[t]));
        for (std::size_t c = 0; c < r; ++c) x.at(c, t) = e[c];
    }
    Tensor skip;
    const std::size_t layers = params.layers.size();
    for (std::size_t i = 0; i < layers; ++i) {
        const LayerParams& l = params.layers[i];
        if (observer) observer(i, x);
        const std::size_t d = cfg.dilation(i);
        const Tensor f = gated_preactivation(x, l.filter_weight, l.filter_bias, d, l.cond_filter_weight, h);
        const Tensor g = gated_preactivation(x, l.gate_weight, l.gate_bias, d, l.cond_gate_weight, h);
        Tensor z(f.shape());
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double th = std::tanh(f[j]);
            const double sg = kernels::sigmoid(g[j]);
            z[j] = th * sg;
        }
        Tensor s = pointwise(l.skip_weight, l.skip_bias, z);
        if (i == 0) {
            skip = std::move(s);
        } else {
            for (std::size_t j = 0; j < skip.size(); ++j) skip[j] = skip[j] + s[j];
        }
        if (i + 1 < layers) {
            const Tensor res = pointwise(l.residual_weight, l.residual_bias, z);
            for (std::size_t j = 0; j < x.size(); ++j) x[j] = x[j] + res[j];
        }
    }
    return skip;
}

Tensor output_head(const ModelParams& params, const Tensor& skip_sum) {
    Tensor a = skip_sum;
    relu_inplace(a);
    Tensor hidden = pointwise(params.head_hidden_weight, params.head_hidden_bias, a);
    relu_inplace(hidden);
    return pointwise(params.head_out_weight, params.head_out_bias, hidden);
}

Tensor forward_logits(const ModelParams& params, std::span<const int> classes, const Tensor& h) {
    if (h.rank() != 2) throw std::invalid_argument("forward_logits: conditioning must be [C_h x T]");
    validate_inputs(params.config, classes, h.dim(0), h.dim(1), classes.size());
    require_finite(h, "forward_logits conditioning");
    const ClassSequence inputs = shift_inputs(classes, params.config.mulaw().center_class());
    const Tensor logits = output_head(params, residual_stack(params, inputs, ConditioningView::of(h)));
    if (!logits.all_finite()) throw NumericError("forward_logits: non-finite activations");
    return logits.transposed();
}

SegmentStats segment_forward_backward(const ModelParams& params, std::span<const int> inputs,
                                      std::span<const int> targets, const Tensor& h, std::size_t context,
                                      double loss_scale, ModelParams* grads) {
    const ModelConfig& cfg = params.config;
    const std::size_t steps = inputs.size();
    if (context > steps || targets.size() != steps - context)
        throw std::invalid_argument("segment: " + std::to_string(targets.size()) + " targets for " +
                                    std::to_string(steps) + " inputs with context " + std::to_string(context));
    if (h.rank() != 2) throw std::invalid_argument("segment: conditioning must be [C_h x T]");
    validate_inputs(cfg, inputs, h.dim(0), h.dim(1), steps);
    validate_inputs(cfg, targets, h.dim(0), h.dim(1), steps);
    if (grads && !(grads->config == cfg)) throw std::invalid_argument("segment: gradient config mismatch");

    // Gradient slots in the same visiting order as the parameters.
    std::vector<Tensor*> gslots;
    if (grads) grads->for_each([&](const std::string&, Tensor& t) { gslots.push_back(&t); });
    std::size_t next = 0;
    Tape tape;
    auto param = [&](const Tensor& t) { return tape.parameter(t, grads ? gslots[next++] : nullptr); };

    const Var embedding = param(params.embedding);
    const Var hv = tape.constant(h);
    Var x = tape.embedding(embedding, inputs);
    Var skip{0};
    const std::size_t layers = params.layers.size();
    for (std::size_t i = 0; i < layers; ++i) {
        const LayerParams& l = params.layers[i];
        const Var wf = param(l.filter_weight), bf = param(l.filter_bias);
        const Var wg = param(l.gate_weight), bg = param(l.gate_bias);
        const Var vf = param(l.cond_filter_weight), vg = param(l.cond_gate_weight);
        const Var wr = param(l.residual_weight), br = param(l.residual_bias);
        const Var ws = param(l.skip_weight), bs = param(l.skip_bias);
        const std::size_t d = cfg.dilation(i);
        const Var f = tape.causal_conv(x, wf, bf, d, vf, hv);
        const Var g = tape.causal_conv(x, wg, bg, d, vg, hv);
        const Var z = tape.gated_tanh(f, g);
        const Var s = tape.conv1x1(ws, bs, z);
        skip = i == 0 ? s : tape.add(skip, s);
        if (i + 1 < layers) x = tape.add(x, tape.conv1x1(wr, br, z));
    }
    const Var w1 = param(params.head_hidden_weight), b1 = param(params.head_hidden_bias);
    const Var w2 = param(params.head_out_weight), b2 = param(params.head_out_bias);
    const Var hidden = tape.relu(tape.conv1x1(w1, b1, tape.relu(skip)));
    const Var logits = tape.conv1x1(w2, b2, hidden);
    const Var loss = tape.cross_entropy(logits, targets, context, loss_scale);

    SegmentStats stats;
    const Tensor& z = tape.value(logits);
    stats.scored = targets.size();
    const double scaled = tape.value(loss)[0];
    stats.loss_sum = loss_scale != 0.0 ? scaled / loss_scale : 0.0;
    if (!std::isfinite(scaled)) throw NumericError("segment: non-finite loss");
    for (std::size_t s = 0; s < targets.size(); ++s) {
        const std::size_t t = context + s;
        std::size_t best = 0;
        for (std::size_t q = 1; q < cfg.classes; ++q)
            if (z.at(q, t) > z.at(best, t)) best = q;
        if (static_cast<int>(best) == targets[s]) ++stats.correct;
    }
    if (grads) tape.backward(loss);
    return stats;
}

double sequence_loss(const ModelParams& params, std::span<const int> classes, const Tensor& h) {
    if (classes.empty()) throw std::invalid_argument("sequence_loss: empty sequence");
    const ClassSequence inputs = shift_inputs(classes, params.config.mulaw().center_class());
    const SegmentStats s = segment_forward_backward(params, inputs, classes, h, 0, 1.0, nullptr);
    return s.loss_sum / static_cast<double>(s.scored);
}

}  // namespace vcwave
