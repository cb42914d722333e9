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

#include <cstddef>
#include <span>
#include <vector>

namespace vcwave {

// Quantized waveform: class indices in [0, Q-1].
using ClassSequence = std::vector<int>;

struct MuLawConfig {
    int classes = 256;

    double mu() const { return static_cast<double>(classes - 1); }
    // Class of a zero-amplitude sample; also the generation cold-start class.
    int center_class() const;
    void validate() const;
};

// Compands with F(x) = sign(x) ln(1 + mu|x|) / ln(1 + mu) after clipping to
// [-1, 1], then quantizes F(x) uniformly into Q bins. Monotone non-decreasing.
int mulaw_encode(double x, const MuLawConfig& cfg = {});
ClassSequence mulaw_encode(std::span<const double> samples, const MuLawConfig& cfg = {});

// Inverse companding of the bin centre (c + 0.5). Throws std::out_of_range for
// classes outside [0, Q-1].
double mulaw_decode(int c, const MuLawConfig& cfg = {});
std::vector<double> mulaw_decode(std::span<const int> classes, const MuLawConfig& cfg = {});

}  // namespace vcwave
