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

#include "vcwave/optim.h"

#include "vcwave/errors.h"
#include "vcwave/rng.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vcwave {

CrossEntropyResult softmax_cross_entropy(const Tensor& logits, std::span<const int> targets) {
    if (logits.rank() != 2) throw std::invalid_argument("softmax_cross_entropy: logits must be [T x Q]");
    const std::size_t steps = logits.dim(0), classes = logits.dim(1);
    if (targets.size() != steps)
        throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                                    std::to_string(steps) + " rows");
    if (steps == 0) throw std::invalid_argument("softmax_cross_entropy: empty batch");
    CrossEntropyResult r{0.0, Tensor(logits.shape())};
    const double inv = 1.0 / static_cast<double>(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const int target = targets[t];
        if (target < 0 || static_cast<std::size_t>(target) >= classes)
            throw std::out_of_range("softmax_cross_entropy: target " + std::to_string(target) + " outside [0, " +
                                    std::to_string(classes) + ")");
        const double* z = logits.row(t);
        const double mx = *std::max_element(z, z + classes);
        double denom = 0.0;
        for (std::size_t q = 0; q < classes; ++q) denom += std::exp(z[q] - mx);
        const double log_denom = std::log(denom);
        r.loss += -(z[target] - mx - log_denom);
        double* g = r.grad.row(t);
        for (std::size_t q = 0; q < classes; ++q) g[q] = std::exp(z[q] - mx - log_denom) * inv;
        g[target] -= inv;
    }
    r.loss *= inv;
    return r;
}

void adam_step(std::span<const ParamSlot> params, AdamState& state) {
    for (const ParamSlot& p : params) {
        if (p.grad->shape() != p.value->shape())
            throw std::invalid_argument("adam_step: gradient shape mismatch for " + p.name);
        if (!p.grad->all_finite())
            throw NumericError("adam_step: non-finite gradient for parameter '" + p.name + "' at step " +
                               std::to_string(state.step + 1));
    }
    if (state.first_moment.empty()) {
        for (const ParamSlot& p : params) {
            state.first_moment.emplace_back(p.value->shape());
            state.second_moment.emplace_back(p.value->shape());
        }
    }
    if (state.first_moment.size() != params.size())
        throw std::invalid_argument("adam_step: optimizer state tracks " + std::to_string(state.first_moment.size()) +
                                    " tensors, got " + std::to_string(params.size()));

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& value = *params[i].value;
        const Tensor& grad = *params[i].grad;
        Tensor& m = state.first_moment[i];
        Tensor& v = state.second_moment[i];
        if (m.shape() != value.shape())
            throw std::invalid_argument("adam_step: moment shape mismatch for " + params[i].name);
        for (std::size_t j = 0; j < value.size(); ++j) {
            const double g = grad[j];
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[j] / correction1;
            const double v_hat = v[j] / correction2;
            value[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

GradCheckReport grad_check(const std::function<double()>& loss, std::span<const ParamSlot> params,
                           std::size_t probes, double delta, std::uint64_t seed) {
    std::size_t total = 0;
    for (const ParamSlot& p : params) total += p.value->size();
    GradCheckReport report;
    if (total == 0) return report;
    Rng rng(seed);
    for (std::size_t n = 0; n < probes; ++n) {
        std::size_t flat = rng.index(total);
        std::size_t slot = 0;
        while (flat >= params[slot].value->size()) {
            flat -= params[slot].value->size();
            ++slot;
        }
        Tensor& value = *params[slot].value;
        const double saved = value[flat];
        value[flat] = saved + delta;
        const double up = loss();
        value[flat] = saved - delta;
        const double down = loss();
        value[flat] = saved;
        const double numeric = (up - down) / (2.0 * delta);
        const double analytic = (*params[slot].grad)[flat];
        const double rel = std::abs(analytic - numeric) / std::max(std::abs(numeric), 1e-6);
        ++report.probes;
        if (rel >= report.max_relative_error) {
            report.max_relative_error = rel;
            report.worst_parameter = params[slot].name;
            report.worst_index = flat;
            report.worst_analytic = analytic;
            report.worst_numeric = numeric;
        }
    }
    return report;
}

}  // namespace vcwave
