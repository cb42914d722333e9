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

#include "vcwave/tape.h"

#include "vcwave/kernels.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vcwave {

namespace {

void require_rank2(const Tensor& t, const char* what) {
    if (t.rank() != 2) throw std::invalid_argument(std::string(what) + ": expected a rank-2 tensor");
}

// out[o][t] = bias[o] for every t.
Tensor broadcast_bias(const Tensor& bias, std::size_t steps) {
    Tensor out({bias.size(), steps});
    for (std::size_t o = 0; o < bias.size(); ++o) std::fill(out.row(o), out.row(o) + steps, bias[o]);
    return out;
}

void add_row_sums(const Tensor& g, Tensor& bias_grad) {
    const std::size_t steps = g.dim(1);
    for (std::size_t o = 0; o < g.dim(0); ++o) {
        const double* row = g.row(o);
        double s = 0.0;
        for (std::size_t t = 0; t < steps; ++t) s += row[t];
        bias_grad[o] += s;
    }
}

}  // namespace

Var Tape::push(Tensor value, bool needs_grad, std::function<void()> backward) {
    Node n;
    n.owned = std::move(value);
    n.needs_grad = needs_grad;
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
    const Node& n = node(v);
    return n.ref ? *n.ref : n.owned;
}

Tensor& Tape::grad(Var v) {
    Node& n = node(v);
    if (n.external_grad) return *n.external_grad;
    if (n.grad.shape() != value(v).shape()) n.grad = Tensor(value(v).shape());
    return n.grad;
}

Var Tape::parameter(const Tensor& value, Tensor* grad) {
    if (grad && grad->shape() != value.shape())
        throw std::invalid_argument("tape parameter: gradient shape " + shape_to_string(grad->shape()) +
                                    " does not match value " + shape_to_string(value.shape()));
    Node n;
    n.ref = &value;
    n.external_grad = grad;
    n.needs_grad = grad != nullptr;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::constant(const Tensor& value) {
    Node n;
    n.ref = &value;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor&& value) { return push(std::move(value), false); }

Var Tape::embedding(Var table, std::span<const int> ids) {
    const Tensor& tab = value(table);
    require_rank2(tab, "embedding table");
    const std::size_t classes = tab.dim(0), width = tab.dim(1), steps = ids.size();
    Tensor out({width, steps});
    for (std::size_t t = 0; t < steps; ++t) {
        if (ids[t] < 0 || static_cast<std::size_t>(ids[t]) >= classes)
            throw std::out_of_range("embedding: class " + std::to_string(ids[t]) + " outside [0, " +
                                    std::to_string(classes) + ")");
        const double* src = tab.row(static_cast<std::size_t>(ids[t]));
        for (std::size_t c = 0; c < width; ++c) out.at(c, t) = src[c];
    }
    const bool needs = node(table).needs_grad;
    std::vector<int> saved(ids.begin(), ids.end());
    Var result = push(std::move(out), needs);
    if (needs) {
        node(result).backward = [this, table, result, saved = std::move(saved)] {
            const Tensor& g = grad(result);
            Tensor& gt = grad(table);
            const std::size_t w = g.dim(0);
            for (std::size_t t = 0; t < saved.size(); ++t) {
                double* dst = gt.row(static_cast<std::size_t>(saved[t]));
                for (std::size_t c = 0; c < w; ++c) dst[c] += g.at(c, t);
            }
        };
    }
    return result;
}

Var Tape::causal_conv(Var x, Var weights, Var bias, std::size_t dilation, std::optional<Var> cond_weights,
                      std::optional<Var> cond) {
    const Tensor& in = value(x);
    const Tensor& w = value(weights);
    require_rank2(in, "causal_conv input");
    if (w.rank() != 3 || w.dim(1) != in.dim(0))
        throw std::invalid_argument("causal_conv: weights " + shape_to_string(w.shape()) +
                                    " do not match input " + shape_to_string(in.shape()));
    if (value(bias).size() != w.dim(0)) throw std::invalid_argument("causal_conv: bias length mismatch");
    if (dilation < 1) throw std::invalid_argument("causal_conv: dilation must be >= 1");
    if (cond_weights.has_value() != cond.has_value())
        throw std::invalid_argument("causal_conv: conditioning weights and input must be given together");
    const std::size_t steps = in.dim(1);

    Tensor out = broadcast_bias(value(bias), steps);
    conv1d_causal_acc(in, w, dilation, out);
    if (cond) {
        const Tensor& v = value(*cond_weights);
        const Tensor& h = value(*cond);
        if (v.rank() != 2 || v.dim(0) != w.dim(0) || h.rank() != 2 || h.dim(0) != v.dim(1) || h.dim(1) < steps)
            throw std::invalid_argument("causal_conv: conditioning " + shape_to_string(h.shape()) +
                                        " does not match projection " + shape_to_string(v.shape()));
        kernels::gemm_acc(v.dim(0), steps, v.dim(1), {v.data(), v.dim(1), 1}, h.data(), h.dim(1), out.data(), steps);
    }

    const bool needs = node(x).needs_grad || node(weights).needs_grad || node(bias).needs_grad ||
                       (cond_weights && node(*cond_weights).needs_grad) || (cond && node(*cond).needs_grad);
    Var result = push(std::move(out), needs);
    if (!needs) return result;

    node(result).backward = [this, x, weights, bias, dilation, cond_weights, cond, result] {
        const Tensor& g = grad(result);
        const Tensor& in = value(x);
        const Tensor& w = value(weights);
        const std::size_t cout = w.dim(0), cin = w.dim(1), taps = w.dim(2), steps = in.dim(1);
        if (node(bias).needs_grad) add_row_sums(g, grad(bias));
        for (std::size_t tap = 0; tap < taps; ++tap) {
            const std::size_t shift = (taps - 1 - tap) * dilation;
            if (shift >= steps) continue;
            const std::size_t len = steps - shift;
            if (node(weights).needs_grad) {
                kernels::gemm_nt_acc(cout, cin, len, g.data() + shift, steps, in.data(), steps,
                                     grad(weights).data() + tap, cin * taps, taps);
            }
            if (node(x).needs_grad) {
                const kernels::StridedMatrix wt{w.data() + tap, taps, cin * taps};
                kernels::gemm_acc(cin, len, cout, wt, g.data() + shift, steps, grad(x).data(), steps);
            }
        }
        if (cond) {
            const Tensor& v = value(*cond_weights);
            const Tensor& h = value(*cond);
            if (node(*cond_weights).needs_grad)
                kernels::gemm_nt_acc(cout, v.dim(1), steps, g.data(), steps, h.data(), h.dim(1),
                                     grad(*cond_weights).data(), v.dim(1), 1);
            if (node(*cond).needs_grad) {
                Tensor& gh = grad(*cond);
                kernels::gemm_acc(v.dim(1), steps, cout, {v.data(), 1, v.dim(1)}, g.data(), steps, gh.data(),
                                  gh.dim(1));
            }
        }
    };
    return result;
}

Var Tape::conv1x1(Var weights, Var bias, Var x) {
    const Tensor& in = value(x);
    const Tensor& w = value(weights);
    require_rank2(in, "conv1x1 input");
    if (w.rank() != 2 || w.dim(1) != in.dim(0))
        throw std::invalid_argument("conv1x1: weights " + shape_to_string(w.shape()) + " do not match input " +
                                    shape_to_string(in.shape()));
    if (value(bias).size() != w.dim(0)) throw std::invalid_argument("conv1x1: bias length mismatch");
    const std::size_t steps = in.dim(1);
    Tensor out = broadcast_bias(value(bias), steps);
    kernels::gemm_acc(w.dim(0), steps, w.dim(1), {w.data(), w.dim(1), 1}, in.data(), steps, out.data(), steps);

    const bool needs = node(x).needs_grad || node(weights).needs_grad || node(bias).needs_grad;
    Var result = push(std::move(out), needs);
    if (!needs) return result;
    node(result).backward = [this, weights, bias, x, result] {
        const Tensor& g = grad(result);
        const Tensor& in = value(x);
        const Tensor& w = value(weights);
        const std::size_t cout = w.dim(0), cin = w.dim(1), steps = in.dim(1);
        if (node(bias).needs_grad) add_row_sums(g, grad(bias));
        if (node(weights).needs_grad)
            kernels::gemm_nt_acc(cout, cin, steps, g.data(), steps, in.data(), steps, grad(weights).data(), cin, 1);
        if (node(x).needs_grad)
            kernels::gemm_acc(cin, steps, cout, {w.data(), 1, cin}, g.data(), steps, grad(x).data(), steps);
    };
    return result;
}

Var Tape::add(Var a, Var b) {
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (va.shape() != vb.shape())
        throw std::invalid_argument("add: shapes " + shape_to_string(va.shape()) + " and " +
                                    shape_to_string(vb.shape()) + " differ");
    Tensor out(va.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
    const bool needs = node(a).needs_grad || node(b).needs_grad;
    Var result = push(std::move(out), needs);
    if (!needs) return result;
    node(result).backward = [this, a, b, result] {
        const Tensor& g = grad(result);
        for (Var v : {a, b}) {
            if (!node(v).needs_grad) continue;
            Tensor& gv = grad(v);
            for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
        }
    };
    return result;
}

Var Tape::relu(Var a) {
    const Tensor& va = value(a);
    Tensor out(va.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] > 0.0 ? va[i] : 0.0;
    const bool needs = node(a).needs_grad;
    Var result = push(std::move(out), needs);
    if (!needs) return result;
    node(result).backward = [this, a, result] {
        const Tensor& g = grad(result);
        const Tensor& in = value(a);
        Tensor& ga = grad(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (in[i] > 0.0) ga[i] += g[i];
    };
    return result;
}

Var Tape::gated_tanh(Var filter, Var gate) {
    const Tensor& f = value(filter);
    const Tensor& s = value(gate);
    if (f.shape() != s.shape()) throw std::invalid_argument("gated_tanh: filter and gate shapes differ");
    Tensor th(f.shape()), sg(f.shape()), out(f.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        th[i] = std::tanh(f[i]);
        sg[i] = kernels::sigmoid(s[i]);
        out[i] = th[i] * sg[i];
    }
    const bool needs = node(filter).needs_grad || node(gate).needs_grad;
    Var result = push(std::move(out), needs);
    if (!needs) return result;
    node(result).backward = [this, filter, gate, result, th = std::move(th), sg = std::move(sg)] {
        const Tensor& g = grad(result);
        if (node(filter).needs_grad) {
            Tensor& gf = grad(filter);
            for (std::size_t i = 0; i < g.size(); ++i) gf[i] += g[i] * sg[i] * (1.0 - th[i] * th[i]);
        }
        if (node(gate).needs_grad) {
            Tensor& gg = grad(gate);
            for (std::size_t i = 0; i < g.size(); ++i) gg[i] += g[i] * th[i] * sg[i] * (1.0 - sg[i]);
        }
    };
    return result;
}

Var Tape::cross_entropy(Var logits, std::span<const int> targets, std::size_t first, double scale) {
    const Tensor& z = value(logits);
    require_rank2(z, "cross_entropy logits");
    const std::size_t classes = z.dim(0), steps = z.dim(1);
    if (first > steps || targets.size() != steps - first)
        throw std::invalid_argument("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                                    std::to_string(steps - std::min(first, steps)) + " scored positions");
    const std::size_t scored = steps - first;
    Tensor probs({classes, scored});
    double total = 0.0;
    std::vector<double> col(classes);
    for (std::size_t s = 0; s < scored; ++s) {
        const std::size_t t = first + s;
        const int target = targets[s];
        if (target < 0 || static_cast<std::size_t>(target) >= classes)
            throw std::out_of_range("cross_entropy: target " + std::to_string(target) + " outside [0, " +
                                    std::to_string(classes) + ")");
        double mx = z.at(0, t);
        for (std::size_t q = 1; q < classes; ++q) mx = std::max(mx, z.at(q, t));
        double denom = 0.0;
        for (std::size_t q = 0; q < classes; ++q) {
            col[q] = std::exp(z.at(q, t) - mx);
            denom += col[q];
        }
        for (std::size_t q = 0; q < classes; ++q) probs.at(q, s) = col[q] / denom;
        total += -(z.at(static_cast<std::size_t>(target), t) - mx - std::log(denom));
    }
    const bool needs = node(logits).needs_grad;
    Var result = push(Tensor({1}, std::vector<double>{total * scale}), needs);
    if (!needs) return result;
    std::vector<int> saved(targets.begin(), targets.end());
    node(result).backward = [this, logits, result, first, scale, probs = std::move(probs),
                             saved = std::move(saved)] {
        const double g = grad(result)[0] * scale;
        Tensor& gz = grad(logits);
        const std::size_t classes = probs.dim(0);
        for (std::size_t s = 0; s < saved.size(); ++s) {
            const std::size_t t = first + s;
            for (std::size_t q = 0; q < classes; ++q) gz.at(q, t) += g * probs.at(q, s);
            gz.at(static_cast<std::size_t>(saved[s]), t) -= g;
        }
    };
    return result;
}

void Tape::backward(Var output) {
    if (value(output).size() != 1) throw std::invalid_argument("backward: output must be a scalar");
    replay_order_.clear();
    if (!node(output).needs_grad) return;
    grad(output)[0] += 1.0;
    for (std::size_t i = output.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.backward) continue;
        replay_order_.push_back(i);
        n.backward();
    }
}

}  // namespace vcwave
