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

#include "vcwave/audio.h"
#include "vcwave/codec.h"
#include "vcwave/features.h"
#include "vcwave/model.h"
#include "vcwave/rng.h"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace vcwave {

enum class SamplingKind { categorical, argmax, temperature };

struct SamplingMode {
    SamplingKind kind = SamplingKind::categorical;
    double temperature = 1.0;

    static SamplingMode categorical() { return {}; }
    static SamplingMode argmax() { return {SamplingKind::argmax, 1.0}; }
    static SamplingMode with_temperature(double tau) { return {SamplingKind::temperature, tau}; }
};

// Draws one class from softmax(logits / tau). Exactly one uniform is consumed
// per call in every mode, argmax included, so streams stay aligned.
int sample_class(std::span<const double> logits, const SamplingMode& mode, Rng& rng);

// Reference generator: for every sample, re-runs the network over the
// trailing receptive field. History before t = 0 is the mu-law centre class.
ClassSequence generate_naive(const ModelParams& params, const Tensor& h, std::int64_t n_samples,
                             std::uint64_t seed, const SamplingMode& mode = {});

// Incremental generator state: per-layer ring buffers of the last (K-1)*d
// layer inputs, so each sample costs one column per layer.
class FastGenerator {
public:
    explicit FastGenerator(const ModelParams& params);

    // Processes position position() with the previous class and conditioning
    // column h[:, t] (`channels` values `stride` apart) and returns the logits.
    std::span<const double> step(int input_class, const double* h_column, std::size_t stride);

    std::size_t position() const { return position_; }

    // Inputs of `layer` at positions [t - (K-1)*d, t), oldest first, as
    // [R x (K-1)*d]; positions before 0 read as zero.
    Tensor layer_history(std::size_t layer) const;

    void reset();

private:
    struct Layer {
        std::size_t dilation = 1;
        std::vector<Tensor> taps_t;     // per tap, [R x 2R]: filter rows then gate rows
        Tensor cond_t;                  // [C_h x 2R]
        std::vector<double> fg_bias;    // 2R
        Tensor out_t;                   // [R x (R + S)]: residual then skip columns
        std::vector<double> out_bias;   // R + S
        Tensor history;                 // [(K-1)*d x R], ring of inputs
    };

    const ModelParams& params_;
    std::vector<Layer> layers_;
    Tensor hidden_t_, out_t_;  // transposed head weights
    std::size_t position_ = 0;
    std::vector<double> x_, fg_, z_, ro_, skip_, hidden_, logits_, h_;
};

// Same samples as generate_naive for identical arguments.
ClassSequence generate_fast(const ModelParams& params, const Tensor& h, std::int64_t n_samples, std::uint64_t seed,
                            const SamplingMode& mode = {});

struct ConvertOptions {
    SamplingMode mode;
    std::uint64_t seed = 0;
    UpsampleMode upsample = UpsampleMode::hold;
    F0EstimatorConfig estimator;
    // Source speaker statistics; when absent they come from the utterance.
    std::optional<F0Stats> source_stats;
};

struct ConversionResult {
    WaveformSignal audio;
    ConditioningTrack track;      // after the f0 transform
    std::vector<double> source_f0;
    UpsampledConditioning conditioning;
    ClassSequence classes;
    std::optional<F0Stats> source_stats;
};

// source audio + PPG [D x N] -> pitch estimate -> f0 transform towards the
// target statistics -> upsampled conditioning -> generate_fast -> decode.
// The output has exactly N * ratio samples.
ConversionResult convert(const WaveformSignal& source, Tensor ppg, const ModelParams& params,
                         const F0Stats& target_stats, const ConvertOptions& options = {});

}  // namespace vcwave
