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
#include "vcwave/model.h"
#include "vcwave/tensor.h"

#include <cstddef>
#include <functional>
#include <span>

// Forward passes of the conditional WaveNet.
//
// Per layer i with input x and conditioning h:
//   z_i = tanh(W_f,i * x + V_f,i h + b_f) . sigmoid(W_g,i * x + V_g,i h + b_g)
//   x  <- x + W_res z_i + b_res          (skipped for the final layer)
//   skip += W_skip z_i + b_skip
// logits = W_out relu(W_hidden relu(skip) + b_hidden) + b_out
//
// Position t consumes the embedding of the previous class and h[:, t].
namespace vcwave {

// Columns [0, T) of a conditioning matrix: `channels` rows, row stride `ld`.
struct ConditioningView {
    const double* data;
    std::size_t channels;
    std::size_t ld;

    static ConditioningView of(const Tensor& h, std::size_t first_column = 0) {
        return {h.data() + first_column, h.dim(0), h.dim(1)};
    }
};

// The input class seen at each position under teacher forcing: classes[t-1],
// and the mu-law centre class at t = 0.
ClassSequence shift_inputs(std::span<const int> classes, int center_class);

using LayerObserver = std::function<void(std::size_t layer, const Tensor& layer_input)>;

// Embedding plus the gated residual stack over `inputs`; returns the skip sum
// [S x T]. The observer, if set, sees every layer's input before the layer.
Tensor residual_stack(const ModelParams& params, std::span<const int> inputs, ConditioningView h,
                      const LayerObserver& observer = {});

// Output head on a skip sum [S x T] -> logits [Q x T].
Tensor output_head(const ModelParams& params, const Tensor& skip_sum);

// Teacher-forced logits [T x Q]: row t is the distribution of classes[t]
// given classes[0, t) and h[:, t]. h needs at least T columns.
Tensor forward_logits(const ModelParams& params, std::span<const int> classes, const Tensor& h);

struct SegmentStats {
    double loss_sum = 0.0;     // nats, summed over scored positions (unscaled)
    std::size_t correct = 0;   // argmax hits
    std::size_t scored = 0;
};

// Teacher-forced pass over already-shifted `inputs` with h [C_h x T]. Only
// positions [context, T) are scored, against `targets` (T - context entries).
// When `grads` is non-null, d(loss_scale * loss_sum)/d(params) is added into it.
SegmentStats segment_forward_backward(const ModelParams& params, std::span<const int> inputs,
                                      std::span<const int> targets, const Tensor& h, std::size_t context,
                                      double loss_scale, ModelParams* grads);

// Mean teacher-forced cross-entropy (nats) of a whole sequence.
double sequence_loss(const ModelParams& params, std::span<const int> classes, const Tensor& h);

// Throws std::invalid_argument / std::out_of_range unless h has the model's
// conditioning channel count and at least `steps` columns and every class is
// in range.
void validate_inputs(const ModelConfig& config, std::span<const int> classes, std::size_t h_channels,
                     std::size_t h_columns, std::size_t steps);

}  // namespace vcwave
