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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vcwave {

// sqrt(mean_f (20 log10(|Y_f| / |Y'_f|))^2) in dB, both inputs floored at
// kMagnitudeFloor. Throws std::invalid_argument on a length mismatch.
double rmse_frame(std::span<const double> target_mag, std::span<const double> converted_mag);

struct UtteranceRmse {
    std::string name;
    std::size_t frames = 0;            // frames compared
    std::size_t target_frames = 0;
    std::size_t converted_frames = 0;
    double mean_db = 0.0;              // mean of the per-frame values
};

// STFT of both signals, truncated to the shorter frame count. Throws
// DataError if either is shorter than one analysis window.
UtteranceRmse rmse_utterance(const WaveformSignal& target, const WaveformSignal& converted);

struct RmseReport {
    std::vector<UtteranceRmse> utterances;
    std::size_t total_frames = 0;
    double corpus_mean_db = 0.0;     // frame-weighted
    double utterance_mean_db = 0.0;  // plain mean over utterances
};

RmseReport summarize(std::vector<UtteranceRmse> utterances);

// Pairs <name>.wav files present in both directories. Files found on one
// side only are reported on `warn` and skipped.
RmseReport evaluate_directories(const std::string& target_dir, const std::string& converted_dir,
                                std::size_t threads, std::ostream& warn);

// Human-readable summary and a tab-separated variant with one
// "name<TAB>frames<TAB>rmse_db" line per utterance and a final corpus line.
void write_report_text(std::ostream& out, const RmseReport& report);
void write_report_tsv(std::ostream& out, const RmseReport& report);

}  // namespace vcwave
