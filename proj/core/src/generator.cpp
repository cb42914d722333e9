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

#include "vcwave/generator.h"

#include "vcwave/corpus.h"
#include "vcwave/errors.h"
#include "vcwave/kernels.h"
#include "vcwave/network.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace vcwave {

namespace {

std::size_t checked_length(const ModelParams& params, const Tensor& h, std::int64_t n_samples) {
    if (n_samples < 0) throw std::invalid_argument("sample count must be non-negative");
    const auto n = static_cast<std::size_t>(n_samples);
    if (h.rank() != 2) throw std::invalid_argument("conditioning must be [C_h x T]");
    validate_inputs(params.config, {}, h.dim(0), h.dim(1), n);
    require_finite(h, "conditioning");
    return n;
}

void check_logits(std::span<const double> logits, std::size_t t) {
    for (double v : logits)
        if (!std::isfinite(v)) throw NumericError("non-finite logits at sample " + std::to_string(t));
}

}  // namespace

int sample_class(std::span<const double> logits, const SamplingMode& mode, Rng& rng) {
    if (logits.empty()) throw std::invalid_argument("sample_class: no logits");
    const double u = rng.uniform();
    std::size_t best = 0;
    for (std::size_t q = 1; q < logits.size(); ++q)
        if (logits[q] > logits[best]) best = q;
    if (mode.kind == SamplingKind::argmax) return static_cast<int>(best);

    const double tau = mode.kind == SamplingKind::temperature ? mode.temperature : 1.0;
    if (!(tau > 0.0)) throw std::invalid_argument("sampling temperature must be positive");
    std::vector<double> w(logits.size());
    double total = 0.0;
    for (std::size_t q = 0; q < logits.size(); ++q) total += w[q] = std::exp((logits[q] - logits[best]) / tau);
    const double threshold = u * total;
    double cumulative = 0.0;
    for (std::size_t q = 0; q < logits.size(); ++q) {
        cumulative += w[q];
        if (threshold < cumulative) return static_cast<int>(q);
    }
    // Rounding can leave threshold at the total; fall back to the last class
    // with non-zero weight.
    for (std::size_t q = logits.size(); q-- > 0;)
        if (w[q] > 0.0) return static_cast<int>(q);
    return static_cast<int>(best);
}

ClassSequence generate_naive(const ModelParams& params, const Tensor& h, std::int64_t n_samples,
                             std::uint64_t seed, const SamplingMode& mode) {
    const std::size_t n = checked_length(params, h, n_samples);
    const std::size_t rf = receptive_field(params.config);
    const int center = params.config.mulaw().center_class();
    const std::size_t s = params.config.skip_channels;
    Rng rng(seed);
    ClassSequence out;
    out.reserve(n);
    ClassSequence inputs;
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t width = std::min(t + 1, rf), first = t + 1 - width;
        inputs.resize(width);
        for (std::size_t i = 0; i < width; ++i) {
            const std::size_t p = first + i;
            inputs[i] = p == 0 ? center : out[p - 1];
        }
        const Tensor skip = residual_stack(params, inputs, ConditioningView::of(h, first));
        Tensor last({s, 1});
        for (std::size_t c = 0; c < s; ++c) last[c] = skip.at(c, width - 1);
        const Tensor logits = output_head(params, last);
        check_logits(logits.values(), t);
        out.push_back(sample_class(logits.values(), mode, rng));
    }
    return out;
}

FastGenerator::FastGenerator(const ModelParams& params) : params_(params) {
    const ModelConfig& cfg = params.config;
    const std::size_t r = cfg.residual_channels, s = cfg.skip_channels, k = cfg.kernel_size,
                      c = cfg.conditioning_channels();
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const LayerParams& lp = params.layers[i];
        Layer l;
        l.dilation = cfg.dilation(i);
        for (std::size_t tap = 0; tap < k; ++tap) {
            Tensor t({r, 2 * r});
            for (std::size_t o = 0; o < r; ++o)
                for (std::size_t in = 0; in < r; ++in) {
                    t.at(in, o) = lp.filter_weight[(o * r + in) * k + tap];
                    t.at(in, r + o) = lp.gate_weight[(o * r + in) * k + tap];
                }
            l.taps_t.push_back(std::move(t));
        }
        l.cond_t = Tensor({c, 2 * r});
        for (std::size_t o = 0; o < r; ++o)
            for (std::size_t ch = 0; ch < c; ++ch) {
                l.cond_t.at(ch, o) = lp.cond_filter_weight.at(o, ch);
                l.cond_t.at(ch, r + o) = lp.cond_gate_weight.at(o, ch);
            }
        l.fg_bias.assign(lp.filter_bias.values().begin(), lp.filter_bias.values().end());
        l.fg_bias.insert(l.fg_bias.end(), lp.gate_bias.values().begin(), lp.gate_bias.values().end());
        l.out_t = Tensor({r, r + s});
        for (std::size_t in = 0; in < r; ++in) {
            for (std::size_t o = 0; o < r; ++o) l.out_t.at(in, o) = lp.residual_weight.at(o, in);
            for (std::size_t o = 0; o < s; ++o) l.out_t.at(in, r + o) = lp.skip_weight.at(o, in);
        }
        l.out_bias.assign(lp.residual_bias.values().begin(), lp.residual_bias.values().end());
        l.out_bias.insert(l.out_bias.end(), lp.skip_bias.values().begin(), lp.skip_bias.values().end());
        if (k > 1) l.history = Tensor({(k - 1) * l.dilation, r});
        layers_.push_back(std::move(l));
    }
    hidden_t_ = params.head_hidden_weight.transposed();
    out_t_ = params.head_out_weight.transposed();
    x_.resize(r);
    fg_.resize(2 * r);
    z_.resize(r);
    ro_.resize(r + s);
    skip_.resize(s);
    hidden_.resize(s);
    logits_.resize(cfg.classes);
    h_.resize(c);
}

void FastGenerator::reset() {
    position_ = 0;
    for (Layer& l : layers_) l.history.fill(0.0);
}

std::span<const double> FastGenerator::step(int input_class, const double* h_column, std::size_t stride) {
    const ModelConfig& cfg = params_.config;
    const std::size_t r = cfg.residual_channels, s = cfg.skip_channels, k = cfg.kernel_size;
    const std::size_t t = position_;
    if (input_class < 0 || static_cast<std::size_t>(input_class) >= cfg.classes)
        throw std::out_of_range("class " + std::to_string(input_class) + " out of range");
    for (std::size_t ch = 0; ch < h_.size(); ++ch) h_[ch] = h_column[ch * stride];
    std::copy_n(params_.embedding.row(static_cast<std::size_t>(input_class)), r, x_.begin());

    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Layer& l = layers_[i];
        const std::size_t span = (k - 1) * l.dilation;
        std::copy(l.fg_bias.begin(), l.fg_bias.end(), fg_.begin());
        for (std::size_t tap = 0; tap + 1 < k; ++tap) {
            const std::size_t shift = (k - 1 - tap) * l.dilation;
            if (t < shift) continue;
            const double* past = l.history.row((t - shift) % span);
            kernels::matvec_t_acc(2 * r, r, l.taps_t[tap].data(), past, fg_.data());
        }
        kernels::matvec_t_acc(2 * r, r, l.taps_t[k - 1].data(), x_.data(), fg_.data());
        kernels::matvec_t_acc(2 * r, h_.size(), l.cond_t.data(), h_.data(), fg_.data());
        if (span > 0) std::copy(x_.begin(), x_.end(), l.history.row(t % span));

        for (std::size_t c = 0; c < r; ++c) {
            const double th = std::tanh(fg_[c]);
            const double sg = kernels::sigmoid(fg_[r + c]);
            z_[c] = th * sg;
        }
        const bool last = i + 1 == layers_.size();
        if (last) {
            // Only the skip columns matter after the final layer.
            std::copy_n(l.out_bias.begin() + static_cast<std::ptrdiff_t>(r), s, ro_.begin() + static_cast<std::ptrdiff_t>(r));
            for (std::size_t in = 0; in < r; ++in) {
                const double* row = l.out_t.row(in) + r;
                const double zv = z_[in];
                for (std::size_t o = 0; o < s; ++o) ro_[r + o] = std::fma(row[o], zv, ro_[r + o]);
            }
        } else {
            std::copy(l.out_bias.begin(), l.out_bias.end(), ro_.begin());
            kernels::matvec_t_acc(r + s, r, l.out_t.data(), z_.data(), ro_.data());
            for (std::size_t c = 0; c < r; ++c) x_[c] = x_[c] + ro_[c];
        }
        if (i == 0) {
            std::copy_n(ro_.begin() + static_cast<std::ptrdiff_t>(r), s, skip_.begin());
        } else {
            for (std::size_t c = 0; c < s; ++c) skip_[c] = skip_[c] + ro_[r + c];
        }
    }

    for (double& v : skip_) v = v > 0.0 ? v : 0.0;
    std::copy_n(params_.head_hidden_bias.data(), s, hidden_.begin());
    kernels::matvec_t_acc(s, s, hidden_t_.data(), skip_.data(), hidden_.data());
    for (double& v : hidden_) v = v > 0.0 ? v : 0.0;
    std::copy_n(params_.head_out_bias.data(), cfg.classes, logits_.begin());
    kernels::matvec_t_acc(cfg.classes, s, out_t_.data(), hidden_.data(), logits_.data());
    ++position_;
    return logits_;
}

Tensor FastGenerator::layer_history(std::size_t layer) const {
    const Layer& l = layers_.at(layer);
    const std::size_t r = params_.config.residual_channels;
    const std::size_t span = (params_.config.kernel_size - 1) * l.dilation;
    Tensor out({r, span});
    for (std::size_t j = 0; j < span; ++j) {
        if (position_ + j < span) continue;  // before the first sample
        const std::size_t p = position_ + j - span;
        const double* row = l.history.row(p % span);
        for (std::size_t c = 0; c < r; ++c) out.at(c, j) = row[c];
    }
    return out;
}

ClassSequence generate_fast(const ModelParams& params, const Tensor& h, std::int64_t n_samples, std::uint64_t seed,
                            const SamplingMode& mode) {
    const std::size_t n = checked_length(params, h, n_samples);
    const int center = params.config.mulaw().center_class();
    FastGenerator gen(params);
    Rng rng(seed);
    ClassSequence out;
    out.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto logits = gen.step(t == 0 ? center : out.back(), h.data() + t, h.dim(1));
        check_logits(logits, t);
        out.push_back(sample_class(logits, mode, rng));
    }
    return out;
}

ConversionResult convert(const WaveformSignal& source, Tensor ppg, const ModelParams& params,
                         const F0Stats& target_stats, const ConvertOptions& options) {
    const ModelConfig& cfg = params.config;
    if (ppg.rank() != 2) throw DataError("PPG must be a matrix");
    if (ppg.dim(0) != cfg.ppg_dim)
        throw DataError("PPG dimension " + std::to_string(ppg.dim(0)) + " does not match the model's PPG dimension " +
                        std::to_string(cfg.ppg_dim));
    ConversionResult result;
    result.track = build_track("source", std::move(ppg), source, std::nullopt, std::nullopt, options.estimator);
    result.source_f0 = result.track.f0;
    const bool any_voiced = std::any_of(result.track.vuv.begin(), result.track.vuv.end(), [](auto v) { return v; });
    if (options.source_stats) {
        result.source_stats = options.source_stats;
    } else if (any_voiced) {
        const std::vector<double> f0s[] = {result.track.f0};
        result.source_stats = f0_statistics(std::span<const std::vector<double>>(f0s));
    }
    if (result.source_stats) {
        result.track.f0 = transform_f0(result.track.f0, *result.source_stats, target_stats);
    } else {
        std::cerr << "warning: source has no voiced frames; f0 left unchanged\n";
    }
    result.conditioning = upsample_conditioning(result.track, source.sample_rate, options.upsample);
    const Tensor& h = result.conditioning.matrix;
    result.classes = generate_fast(params, h, static_cast<std::int64_t>(h.dim(1)), options.seed, options.mode);
    result.audio.sample_rate = source.sample_rate;
    result.audio.samples = mulaw_decode(result.classes, cfg.mulaw());
    return result;
}

}  // namespace vcwave
