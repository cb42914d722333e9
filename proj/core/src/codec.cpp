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

#include "vcwave/codec.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vcwave {

int MuLawConfig::center_class() const { return mulaw_encode(0.0, *this); }

void MuLawConfig::validate() const {
    if (classes < 2) throw std::invalid_argument("mu-law: class count must be >= 2, got " + std::to_string(classes));
}

int mulaw_encode(double x, const MuLawConfig& cfg) {
    const double mu = cfg.mu();
    const double clipped = std::clamp(x, -1.0, 1.0);
    const double y = std::copysign(std::log1p(mu * std::abs(clipped)) / std::log1p(mu), clipped);
    const double bin = std::floor((y + 1.0) / 2.0 * cfg.classes);
    return static_cast<int>(std::clamp(bin, 0.0, static_cast<double>(cfg.classes - 1)));
}

ClassSequence mulaw_encode(std::span<const double> samples, const MuLawConfig& cfg) {
    cfg.validate();
    ClassSequence out(samples.size());
    std::transform(samples.begin(), samples.end(), out.begin(), [&](double x) { return mulaw_encode(x, cfg); });
    return out;
}

double mulaw_decode(int c, const MuLawConfig& cfg) {
    if (c < 0 || c >= cfg.classes)
        throw std::out_of_range("mu-law: class " + std::to_string(c) + " outside [0, " +
                                std::to_string(cfg.classes - 1) + "]");
    const double mu = cfg.mu();
    const double y = 2.0 * (c + 0.5) / cfg.classes - 1.0;
    return std::copysign((std::pow(1.0 + mu, std::abs(y)) - 1.0) / mu, y);
}

std::vector<double> mulaw_decode(std::span<const int> classes, const MuLawConfig& cfg) {
    cfg.validate();
    std::vector<double> out(classes.size());
    std::transform(classes.begin(), classes.end(), out.begin(), [&](int c) { return mulaw_decode(c, cfg); });
    return out;
}

}  // namespace vcwave
