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

#include "vcwave/evaluator.h"

#include "vcwave/errors.h"
#include "vcwave/features.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;

namespace vcwave {

double rmse_frame(std::span<const double> target_mag, std::span<const double> converted_mag) {
    if (target_mag.size() != converted_mag.size())
        throw std::invalid_argument("rmse_frame: " + std::to_string(target_mag.size()) + " vs " +
                                    std::to_string(converted_mag.size()) + " bins");
    if (target_mag.empty()) throw std::invalid_argument("rmse_frame: empty frame");
    double sum = 0.0;
    for (std::size_t f = 0; f < target_mag.size(); ++f) {
        const double a = std::max(target_mag[f], kMagnitudeFloor);
        const double b = std::max(converted_mag[f], kMagnitudeFloor);
        const double d = 20.0 * std::log10(a / b);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(target_mag.size()));
}

UtteranceRmse rmse_utterance(const WaveformSignal& target, const WaveformSignal& converted) {
    if (target.sample_rate != converted.sample_rate)
        throw DataError("sample rates differ: " + std::to_string(target.sample_rate) + " vs " +
                        std::to_string(converted.sample_rate));
    const SpectralFrames a = stft_magnitudes(target);
    const SpectralFrames b = stft_magnitudes(converted);
    UtteranceRmse r;
    r.target_frames = a.frames();
    r.converted_frames = b.frames();
    r.frames = std::min(r.target_frames, r.converted_frames);
    const Tensor at = a.magnitudes.transposed(), bt = b.magnitudes.transposed();
    const std::size_t bins = a.bins();
    double sum = 0.0;
    for (std::size_t m = 0; m < r.frames; ++m)
        sum += rmse_frame({at.row(m), bins}, {bt.row(m), bins});
    r.mean_db = sum / static_cast<double>(r.frames);
    if (!std::isfinite(r.mean_db)) throw NumericError("non-finite RMSE");
    return r;
}

RmseReport summarize(std::vector<UtteranceRmse> utterances) {
    RmseReport report;
    report.utterances = std::move(utterances);
    double weighted = 0.0, plain = 0.0;
    for (const UtteranceRmse& u : report.utterances) {
        report.total_frames += u.frames;
        weighted += u.mean_db * static_cast<double>(u.frames);
        plain += u.mean_db;
    }
    if (report.total_frames > 0) report.corpus_mean_db = weighted / static_cast<double>(report.total_frames);
    if (!report.utterances.empty()) report.utterance_mean_db = plain / static_cast<double>(report.utterances.size());
    return report;
}

RmseReport evaluate_directories(const std::string& target_dir, const std::string& converted_dir,
                                std::size_t threads, std::ostream& warn) {
    auto list = [](const std::string& dir) {
        std::error_code ec;
        if (!fs::is_directory(dir, ec)) throw DataError("directory not found: " + dir);
        std::map<std::string, std::string> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".wav") files[e.path().stem().string()] = e.path().string();
        return files;
    };
    const auto targets = list(target_dir), converted = list(converted_dir);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> names;
    for (const auto& [name, path] : targets) {
        const auto it = converted.find(name);
        if (it == converted.end()) {
            warn << "warning: no converted file for " << path << "\n";
            continue;
        }
        names.push_back(name);
        pairs.emplace_back(path, it->second);
    }
    for (const auto& [name, path] : converted)
        if (!targets.contains(name)) warn << "warning: no target file for " << path << "\n";
    if (pairs.empty()) throw DataError("no utterances found in both " + target_dir + " and " + converted_dir);

    std::vector<UtteranceRmse> results(pairs.size());
    std::vector<std::exception_ptr> errors(pairs.size());
    auto work = [&](std::size_t i) {
        try {
            results[i] = rmse_utterance(read_wav(pairs[i].first), read_wav(pairs[i].second));
            results[i].name = names[i];
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, pairs.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < pairs.size(); ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < pairs.size(); i += threads) work(i);
            });
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return summarize(std::move(results));
}

void write_report_text(std::ostream& out, const RmseReport& report) {
    char buf[256];
    for (const UtteranceRmse& u : report.utterances) {
        std::snprintf(buf, sizeof buf, "%-32s %8zu frames  %10.4f dB", u.name.c_str(), u.frames, u.mean_db);
        out << buf;
        if (u.target_frames != u.converted_frames)
            out << "  (target " << u.target_frames << ", converted " << u.converted_frames << " frames)";
        out << "\n";
    }
    std::snprintf(buf, sizeof buf,
                  "corpus: %zu utterances, %zu frames, frame-weighted mean %.4f dB, utterance mean %.4f dB\n",
                  report.utterances.size(), report.total_frames, report.corpus_mean_db, report.utterance_mean_db);
    out << buf;
}

void write_report_tsv(std::ostream& out, const RmseReport& report) {
    char buf[64];
    for (const UtteranceRmse& u : report.utterances) {
        std::snprintf(buf, sizeof buf, "%.9g", u.mean_db);
        out << u.name << "\t" << u.frames << "\t" << buf << "\n";
    }
    std::snprintf(buf, sizeof buf, "%.9g", report.corpus_mean_db);
    out << "corpus\t" << report.total_frames << "\t" << buf << "\n";
}

}  // namespace vcwave
