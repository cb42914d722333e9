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
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vcwave {

// A trainable tensor together with its gradient.
struct ParamSlot {
    std::string name;
    Tensor* value;
    const Tensor* grad;
};

struct CrossEntropyResult {
    double loss;    // mean over positions, nats
    Tensor grad;    // [T x Q], (softmax - onehot) / T
};

// Mean categorical cross-entropy over rows of logits [T x Q].
CrossEntropyResult softmax_cross_entropy(const Tensor& logits, std::span<const int> targets);

struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
};

// One bias-corrected Adam update over every slot. Moments are created on the
// first call. If any gradient is non-finite nothing is updated and a
// NumericError naming the parameter is thrown.
void adam_step(std::span<const ParamSlot> params, AdamState& state);

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t probes = 0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

// Compares slot gradients against central differences of `loss` at randomly
// chosen coordinates (uniform over all parameters). Relative error is
// |analytic - numeric| / max(|numeric|, 1e-6). Parameters are restored
// exactly after each probe.
GradCheckReport grad_check(const std::function<double()>& loss, std::span<const ParamSlot> params,
                           std::size_t probes, double delta = 1e-5, std::uint64_t seed = 0);

}  // namespace vcwave
