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

#include <string>
#include <vector>

namespace vcwave {

inline constexpr int kSampleRate = 16000;

// Mono audio, samples nominally in [-1, 1].
struct WaveformSignal {
    std::vector<double> samples;
    int sample_rate = kSampleRate;

    double duration_seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// RIFF WAV, 16-bit signed PCM, mono. Anything else, including a sample rate
// other than expected_rate, is rejected with a DataError.
WaveformSignal read_wav(const std::string& path, int expected_rate = kSampleRate);

// Writes 16-bit PCM mono; samples are clipped to [-1, 1).
void write_wav(const std::string& path, const WaveformSignal& signal);

}  // namespace vcwave
