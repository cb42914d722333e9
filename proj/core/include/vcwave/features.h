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
#include "vcwave/tensor.h"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vcwave {

inline constexpr double kFrameHopSeconds = 0.005;

// Frame-rate conditioning: phonetic posteriorgram plus f0 and voicing.
struct ConditioningTrack {
    Tensor ppg;                       // [D x N]
    std::vector<double> f0;           // Hz, 0 where unvoiced
    std::vector<std::uint8_t> vuv;    // 1 voiced, 0 unvoiced
    double frame_hop_s = kFrameHopSeconds;

    std::size_t ppg_dim() const { return ppg.rank() == 2 ? ppg.dim(0) : 0; }
    std::size_t frames() const { return ppg.rank() == 2 ? ppg.dim(1) : 0; }

    // Checks D >= 1, N >= 1, matching lengths, f0 > 0 <=> vuv == 1 and
    // finite PPG entries. Throws DataError.
    void validate() const;
};

enum class UpsampleMode { hold, linear };

// Sample-rate conditioning matrix [(D + 2) x T]; rows are the PPG channels,
// then ln f0, then vuv.
struct UpsampledConditioning {
    Tensor matrix;
    std::size_t ratio = 0;
    std::size_t ppg_dim = 0;

    std::size_t channels() const { return matrix.dim(0); }
    std::size_t samples() const { return matrix.rank() == 2 ? matrix.dim(1) : 0; }
    std::size_t log_f0_row() const { return ppg_dim; }
    std::size_t vuv_row() const { return ppg_dim + 1; }
};

// Samples per frame; throws DataError unless sample_rate * hop is an integer.
std::size_t upsample_ratio(int sample_rate, double frame_hop_s);

// Per-frame ln f0 with interior unvoiced runs linearly interpolated between
// the neighbouring voiced frames and leading/trailing runs set to 0.
std::vector<double> interpolated_log_f0(std::span<const double> f0);

// Extends every frame to ratio samples. hold repeats the frame vector;
// linear interpolates PPG and ln f0 towards the next frame. vuv is always held.
UpsampledConditioning upsample_conditioning(const ConditioningTrack& track, int sample_rate,
                                            UpsampleMode mode = UpsampleMode::hold);

// Log-domain f0 statistics over voiced frames (population deviation).
struct F0Stats {
    double mu = 0.0;
    double sigma = 0.0;
    std::size_t frame_count = 0;
};

F0Stats f0_statistics(std::span<const ConditioningTrack> tracks);
F0Stats f0_statistics(std::span<const std::vector<double>> f0_tracks);

// Voiced frames map to exp((ln f0 - mu_x) * sigma_y / sigma_x + mu_y);
// unvoiced frames stay 0. sigma_x == 0 with sigma_y != 0 throws DataError.
// An all-unvoiced input is returned unchanged with a warning on stderr.
std::vector<double> transform_f0(std::span<const double> f0, const F0Stats& source, const F0Stats& target);

struct F0EstimatorConfig {
    double hop_s = kFrameHopSeconds;
    double f0_min = 50.0;
    double f0_max = 500.0;
    double window_s = 0.04;
    double voicing_threshold = 0.5;
    double energy_threshold = 1e-4;  // frame RMS
};

struct PitchTrack {
    std::vector<double> f0;
    std::vector<std::uint8_t> vuv;
};

// Normalized-autocorrelation pitch tracker. Frame n is centred on
// (n + 0.5) * hop and there are ceil(len / hop) frames.
PitchTrack estimate_f0_vuv(const WaveformSignal& x, const F0EstimatorConfig& cfg = {});

// Truncates, or pads with unvoiced frames, to exactly the given frame count.
PitchTrack fit_frames(PitchTrack track, std::size_t frames);

inline constexpr std::size_t kStftWindow = 400;
inline constexpr std::size_t kStftHop = 80;
inline constexpr std::size_t kFftSize = 512;
inline constexpr double kMagnitudeFloor = 1e-10;

// Linear STFT magnitudes [F x M], F = 257; 25 ms Hann window every 5 ms at
// 16 kHz, no padding: M = floor((len - 400) / 80) + 1.
struct SpectralFrames {
    Tensor magnitudes;

    std::size_t bins() const { return magnitudes.dim(0); }
    std::size_t frames() const { return magnitudes.dim(1); }
};

SpectralFrames stft_magnitudes(const WaveformSignal& x);

// VCF1: "VCF1", u32 rows N, u32 cols D, N*D little-endian float32 row-major.
Tensor read_vcf1(const std::string& path);
void write_vcf1(const std::string& path, const Tensor& rows_by_cols);

// Two-line text "mu=<v>" / "sigma=<v>" with round-trip precision.
void write_f0_stats(const std::string& path, const F0Stats& stats);
F0Stats read_f0_stats(const std::string& path);

}  // namespace vcwave
