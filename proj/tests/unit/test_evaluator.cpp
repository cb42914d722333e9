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

#include "../support/synth.h"
#include "vcwave/audio.h"
#include "vcwave/errors.h"
#include "vcwave/evaluator.h"
#include "vcwave/features.h"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace vcwave;
using vcwave::testing::TempDir;

namespace {

WaveformSignal noise(std::size_t n, std::uint64_t seed, double amplitude = 0.3) {
    Rng rng(seed);
    WaveformSignal w;
    for (std::size_t i = 0; i < n; ++i) w.samples.push_back(amplitude * rng.uniform(-1, 1));
    return w;
}

WaveformSignal scaled(const WaveformSignal& x, double g) {
    WaveformSignal y = x;
    for (double& v : y.samples) v *= g;
    return y;
}

}  // namespace

TEST_CASE("frame rmse examples") {
    const std::vector<double> y{1.0, 2.0, 0.5, 4.0};
    CHECK(rmse_frame(y, y) == 0.0);
    std::vector<double> tenth;
    for (double v : y) tenth.push_back(v / 10);
    CHECK(rmse_frame(y, tenth) == doctest::Approx(20.0).epsilon(1e-14));
    const std::vector<double> half{1.0, 2.0, 0.05, 0.4};
    CHECK(rmse_frame(y, half) == doctest::Approx(std::sqrt(200.0)).epsilon(1e-14));
    CHECK(rmse_frame(y, half) == doctest::Approx(14.142).epsilon(1e-4));
    CHECK(rmse_frame(half, y) == rmse_frame(y, half));
    CHECK_THROWS_AS(rmse_frame(y, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("frame rmse floors zero magnitudes") {
    const std::vector<double> y{1.0, 1.0}, z{0.0, 0.0};
    const double v = rmse_frame(y, z);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(std::abs(20.0 * std::log10(kMagnitudeFloor))));
}

TEST_CASE("utterance rmse scale law") {
    const WaveformSignal x = noise(8000, 1);
    CHECK(rmse_utterance(x, x).mean_db == 0.0);
    for (double g : {0.1, 0.5, 2.0, 10.0}) {
        const double v = rmse_utterance(x, scaled(x, g)).mean_db;
        CHECK(std::abs(v - std::abs(20.0 * std::log10(g))) < 1e-6);
    }
}

TEST_CASE("utterance rmse is symmetric") {
    const WaveformSignal a = noise(6000, 2), b = noise(6000, 3);
    CHECK(rmse_utterance(a, b).mean_db == doctest::Approx(rmse_utterance(b, a).mean_db).epsilon(1e-15));
}

TEST_CASE("frame count mismatch is truncated and reported") {
    const WaveformSignal a = noise(8000, 4);
    WaveformSignal b = a;
    b.samples.resize(8000 - 3 * 80);
    const UtteranceRmse r = rmse_utterance(a, b);
    CHECK(r.target_frames == (8000 - 400) / 80 + 1);
    CHECK(r.converted_frames == r.target_frames - 3);
    CHECK(r.frames == r.converted_frames);
    CHECK(r.mean_db == 0.0);
    CHECK_THROWS_AS(rmse_utterance(a, noise(100, 5)), DataError);
}

TEST_CASE("silent conversion gives a large finite rmse") {
    const WaveformSignal x = noise(4000, 6);
    WaveformSignal silent;
    silent.samples.assign(4000, 0.0);
    const double v = rmse_utterance(x, silent).mean_db;
    CHECK(std::isfinite(v));
    CHECK(v > 100.0);
}

TEST_CASE("corpus aggregation is frame-weighted") {
    std::vector<UtteranceRmse> u{{"a", 10, 10, 10, 2.0}, {"b", 30, 30, 30, 6.0}};
    const RmseReport r = summarize(u);
    CHECK(r.total_frames == 40);
    CHECK(r.corpus_mean_db == doctest::Approx(5.0));
    CHECK(r.utterance_mean_db == doctest::Approx(4.0));
}

TEST_CASE("directory evaluation and reports") {
    TempDir t("eval"), c("eval");
    const WaveformSignal a = noise(4000, 7), b = noise(6000, 8);
    write_wav(t / "a.wav", a);
    write_wav(t / "b.wav", b);
    write_wav(t / "only_target.wav", a);
    write_wav(c / "a.wav", a);
    write_wav(c / "b.wav", b);
    std::ostringstream warn;
    const RmseReport same = evaluate_directories(t.path().string(), t.path().string(), 2, warn);
    CHECK(same.corpus_mean_db == 0.0);
    CHECK(same.utterances.size() == 3);

    const RmseReport r = evaluate_directories(t.path().string(), c.path().string(), 2, warn);
    CHECK(r.utterances.size() == 2);
    CHECK(warn.str().find("only_target") != std::string::npos);

    std::ostringstream tsv;
    write_report_tsv(tsv, r);
    std::istringstream lines(tsv.str());
    std::string line;
    std::vector<std::string> all;
    while (std::getline(lines, line)) all.push_back(line);
    REQUIRE(all.size() == 3);
    CHECK(all[0].rfind("a\t", 0) == 0);
    CHECK(all[2].rfind("corpus\t", 0) == 0);
    std::ostringstream text;
    write_report_text(text, r);
    CHECK(!text.str().empty());
}
