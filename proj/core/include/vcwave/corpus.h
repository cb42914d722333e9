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
#include "vcwave/features.h"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vcwave {

// A <name>.wav paired with <name>.ppg.vcf1. Optional <name>.f0.vcf1 and
// <name>.vuv.vcf1 replace the built-in pitch tracker.
struct CorpusEntry {
    std::string name;
    std::string wav_path;
    std::string ppg_path;
    std::optional<std::string> f0_path;
    std::optional<std::string> vuv_path;
};

// Pairs files by stem, sorted by name. Unpaired files are reported on `warn`
// and skipped. Throws DataError if the directory is missing.
std::vector<CorpusEntry> discover_corpus(const std::string& dir, std::ostream& warn);

// Reads a PPG file ([N x D] on disk) into a track ([D x N]).
Tensor read_ppg(const std::string& path);

// Builds the conditioning track of one utterance: PPG from disk, f0/vuv from
// disk or estimated from the audio and fitted to the PPG frame count.
// Throws DataError if the PPG frame count and the audio duration disagree by
// more than one frame.
ConditioningTrack load_track(const CorpusEntry& entry, const WaveformSignal& audio,
                             const F0EstimatorConfig& estimator = {});

// Same as above for loose files.
ConditioningTrack build_track(const std::string& source, Tensor ppg, const WaveformSignal& audio,
                              const std::optional<std::string>& f0_path, const std::optional<std::string>& vuv_path,
                              const F0EstimatorConfig& estimator = {});

}  // namespace vcwave
