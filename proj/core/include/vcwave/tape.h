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

#include "vcwave/tensor.h"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace vcwave {

// Handle to a value recorded on a Tape.
struct Var {
    std::size_t id;
};

// Reverse-mode gradient tape for the fixed set of primitives the network
// needs. Ops are recorded in call order; backward() replays them in exact
// reverse order. Parameters are bound by reference and their gradients are
// accumulated into caller-owned tensors.
//
// Single owner, single thread. Referenced tensors must outlive the tape.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaf whose gradient is added into *grad (same shape as value).
    Var parameter(const Tensor& value, Tensor* grad);
    // Leaf without gradient. The tape keeps a reference, not a copy.
    Var constant(const Tensor& value);
    Var constant(Tensor&& value);

    // table [Q x C], ids in [0, Q) -> [C x T] with column t = table[ids[t]].
    Var embedding(Var table, std::span<const int> ids);

    // bias + dilated causal conv of x (weights [C_out x C_in x K]) and, when
    // given, + cond_weights [C_out x C_h] applied to cond [C_h x T].
    Var causal_conv(Var x, Var weights, Var bias, std::size_t dilation, std::optional<Var> cond_weights = {},
                    std::optional<Var> cond = {});

    // bias + weights [C_out x C_in] * x.
    Var conv1x1(Var weights, Var bias, Var x);

    Var add(Var a, Var b);
    Var relu(Var a);
    // tanh(filter) * sigmoid(gate), elementwise.
    Var gated_tanh(Var filter, Var gate);

    // Sum over positions t in [first, T) of -log softmax(logits[:, t])[target],
    // times `scale`. logits are [Q x T]; targets has T - first entries.
    // Returns a [1] tensor.
    Var cross_entropy(Var logits, std::span<const int> targets, std::size_t first, double scale);

    const Tensor& value(Var v) const;
    std::size_t size() const { return nodes_.size(); }

    // Seeds d(output)/d(output) = 1 and replays every recorded op backwards.
    // `output` must be a [1] tensor.
    void backward(Var output);

    // Order in which backward() visited op nodes during the last replay.
    const std::vector<std::size_t>& last_replay_order() const { return replay_order_; }

private:
    struct Node {
        Tensor owned;
        const Tensor* ref = nullptr;
        Tensor grad;
        Tensor* external_grad = nullptr;
        bool needs_grad = false;
        std::function<void()> backward;
    };

    Var push(Tensor value, bool needs_grad, std::function<void()> backward = {});
    Node& node(Var v) { return nodes_[v.id]; }
    const Node& node(Var v) const { return nodes_[v.id]; }
    // Gradient buffer for v, allocated on first use.
    Tensor& grad(Var v);

    std::vector<Node> nodes_;
    std::vector<std::size_t> replay_order_;
};

}  // namespace vcwave
