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

// Synthetic models, conditioning and corpora shared by the unit and
// acceptance tests.

#pragma once

#include "vcwave/audio.h"
#include "vcwave/features.h"
#include "vcwave/model.h"
#include "vcwave/rng.h"
#include "vcwave/trainer.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <unistd.h>

namespace vcwave::testing {

inline ModelConfig toy_config(std::size_t blocks, std::size_t layers, std::size_t residual, std::size_t skip,
                              std::size_t classes, std::size_t ppg_dim = 4, std::size_t kernel = 2) {
    ModelConfig c;
    c.blocks = blocks;
    c.layers_per_block = layers;
    c.kernel_size = kernel;
    c.residual_channels = residual;
    c.skip_channels = skip;
    c.classes = classes;
    c.ppg_dim = ppg_dim;
    return c;
}

// Every tensor, biases included, uniform in [-scale, scale).
inline ModelParams random_params(const ModelConfig& config, std::uint64_t seed, double scale = 0.5) {
    ModelParams p = zero_params(config);
    Rng rng(seed);
    p.for_each([&](const std::string&, Tensor& t) {
        for (double& v : t.values()) v = rng.uniform(-scale, scale);
    });
    return p;
}

inline Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0,
                            double hi = 1.0) {
    Tensor t({rows, cols});
    Rng rng(seed);
    for (double& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    Rng rng(seed);
    for (double& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

inline ClassSequence random_classes(std::size_t n, std::size_t classes, std::uint64_t seed) {
    Rng rng(seed);
    ClassSequence c(n);
    for (int& v : c) v = static_cast<int>(rng.index(classes));
    return c;
}

// Consecutive equal-length sections of sines with integer periods (in
// samples), so every section repeats exactly.
inline WaveformSignal tone_sequence(const std::vector<int>& periods, std::size_t samples_per_tone,
                                    double amplitude = 0.5) {
    WaveformSignal w;
    for (std::size_t k = 0; k < periods.size(); ++k)
        for (std::size_t t = 0; t < samples_per_tone; ++t)
            w.samples.push_back(amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                                                     static_cast<double>(periods[k])));
    return w;
}

// Matching conditioning: a one-hot PPG per section, f0 = fs / period, voiced.
inline ConditioningTrack tone_track(const std::vector<int>& periods, std::size_t samples_per_tone,
                                    std::size_t ppg_dim) {
    const std::size_t per = samples_per_tone / 80;
    ConditioningTrack tr;
    tr.ppg = Tensor({ppg_dim, per * periods.size()});
    for (std::size_t k = 0; k < periods.size(); ++k)
        for (std::size_t n = 0; n < per; ++n) {
            tr.ppg.at(k % ppg_dim, k * per + n) = 1.0;
            tr.f0.push_back(static_cast<double>(kSampleRate) / periods[k]);
            tr.vuv.push_back(1);
        }
    return tr;
}

inline Utterance tone_utterance(const std::string& name, const std::vector<int>& periods,
                                std::size_t samples_per_tone, const ModelConfig& config) {
    return prepare_utterance(name, tone_sequence(periods, samples_per_tone),
                             tone_track(periods, samples_per_tone, config.ppg_dim), config.mulaw());
}

// Writes <name>.wav and <name>.ppg.vcf1 ([N x D] on disk).
inline void write_pair(const std::filesystem::path& dir, const std::string& name, const WaveformSignal& wav,
                       const ConditioningTrack& track) {
    std::filesystem::create_directories(dir);
    write_wav((dir / (name + ".wav")).string(), wav);
    write_vcf1((dir / (name + ".ppg.vcf1")).string(), track.ppg.transposed());
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("vcwave_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace vcwave::testing
