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

#include "vcwave/corpus.h"

#include "vcwave/errors.h"

#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>

namespace fs = std::filesystem;

namespace vcwave {

namespace {

constexpr std::string_view kPpgSuffix = ".ppg.vcf1";
constexpr std::string_view kF0Suffix = ".f0.vcf1";
constexpr std::string_view kVuvSuffix = ".vuv.vcf1";
constexpr std::string_view kWavSuffix = ".wav";

std::vector<double> read_column(const std::string& path) {
    const Tensor t = read_vcf1(path);
    if (t.dim(1) != 1) throw DataError(path + ": expected one column, found " + std::to_string(t.dim(1)));
    return {t.values().begin(), t.values().end()};
}

}  // namespace

std::vector<CorpusEntry> discover_corpus(const std::string& dir, std::ostream& warn) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw DataError("corpus directory not found: " + dir);
    struct Found {
        std::string wav, ppg, f0, vuv;
    };
    std::map<std::string, Found> by_stem;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string file = e.path().filename().string();
        auto strip = [&](std::string_view suffix) -> std::optional<std::string> {
            if (file.size() > suffix.size() && file.ends_with(suffix)) return file.substr(0, file.size() - suffix.size());
            return std::nullopt;
        };
        if (auto s = strip(kPpgSuffix)) by_stem[*s].ppg = e.path().string();
        else if (auto s = strip(kF0Suffix)) by_stem[*s].f0 = e.path().string();
        else if (auto s = strip(kVuvSuffix)) by_stem[*s].vuv = e.path().string();
        else if (auto s = strip(kWavSuffix)) by_stem[*s].wav = e.path().string();
    }
    std::vector<CorpusEntry> entries;
    for (const auto& [stem, f] : by_stem) {
        if (f.wav.empty() || f.ppg.empty()) {
            warn << "warning: skipping unpaired " << (f.wav.empty() ? (f.ppg.empty() ? f.f0 : f.ppg) : f.wav)
                 << "\n";
            continue;
        }
        CorpusEntry c{stem, f.wav, f.ppg, std::nullopt, std::nullopt};
        if (!f.f0.empty() && !f.vuv.empty()) {
            c.f0_path = f.f0;
            c.vuv_path = f.vuv;
        } else if (!f.f0.empty() || !f.vuv.empty()) {
            warn << "warning: " << stem << " has only one of .f0.vcf1/.vuv.vcf1; estimating pitch instead\n";
        }
        entries.push_back(std::move(c));
    }
    return entries;
}

Tensor read_ppg(const std::string& path) { return read_vcf1(path).transposed(); }

ConditioningTrack build_track(const std::string& source, Tensor ppg, const WaveformSignal& audio,
                              const std::optional<std::string>& f0_path, const std::optional<std::string>& vuv_path,
                              const F0EstimatorConfig& estimator) {
    ConditioningTrack track;
    track.frame_hop_s = estimator.hop_s;
    const std::size_t frames = ppg.dim(1);
    const std::size_t ratio = upsample_ratio(audio.sample_rate, track.frame_hop_s);
    const double audio_frames = static_cast<double>(audio.samples.size()) / static_cast<double>(ratio);
    if (std::abs(audio_frames - static_cast<double>(frames)) > 1.0)
        throw DataError(source + ": PPG has " + std::to_string(frames) + " frames but the audio spans " +
                        std::to_string(audio_frames) + " frames");
    track.ppg = std::move(ppg);
    if (f0_path && vuv_path) {
        track.f0 = read_column(*f0_path);
        const std::vector<double> v = read_column(*vuv_path);
        if (track.f0.size() != frames || v.size() != frames)
            throw DataError(source + ": f0/vuv frame count does not match the PPG (" + std::to_string(frames) + ")");
        track.vuv.resize(frames);
        for (std::size_t n = 0; n < frames; ++n) track.vuv[n] = v[n] > 0.5 ? 1 : 0;
    } else {
        PitchTrack p = fit_frames(estimate_f0_vuv(audio, estimator), frames);
        track.f0 = std::move(p.f0);
        track.vuv = std::move(p.vuv);
    }
    track.validate();
    return track;
}

ConditioningTrack load_track(const CorpusEntry& entry, const WaveformSignal& audio,
                             const F0EstimatorConfig& estimator) {
    return build_track(entry.name, read_ppg(entry.ppg_path), audio, entry.f0_path, entry.vuv_path, estimator);
}

}  // namespace vcwave
