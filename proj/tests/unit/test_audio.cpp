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

#include <doctest.h>

#include <cstdint>
#include <fstream>

using namespace vcwave;
using vcwave::testing::TempDir;

namespace {

void put_u32(std::ofstream& f, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) f.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::ofstream& f, std::uint16_t v) {
    for (int i = 0; i < 2; ++i) f.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Writes a minimal canonical WAV by hand.
void write_raw_wav(const std::string& path, std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                   std::uint16_t bits, const std::vector<std::int16_t>& samples) {
    std::ofstream f(path, std::ios::binary);
    const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    f.write("RIFF", 4);
    put_u32(f, 36 + data_bytes);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put_u32(f, 16);
    put_u16(f, format);
    put_u16(f, channels);
    put_u32(f, rate);
    put_u32(f, rate * channels * bits / 8);
    put_u16(f, static_cast<std::uint16_t>(channels * bits / 8));
    put_u16(f, bits);
    f.write("data", 4);
    put_u32(f, data_bytes);
    for (std::int16_t s : samples) put_u16(f, static_cast<std::uint16_t>(s));
}

}  // namespace

TEST_CASE("wav round trip at 16-bit resolution") {
    TempDir dir("audio");
    WaveformSignal w;
    for (int i = -5; i <= 5; ++i) w.samples.push_back(i / 5.0 * 0.999);
    w.samples.push_back(0.0);
    write_wav(dir / "a.wav", w);
    const WaveformSignal r = read_wav(dir / "a.wav");
    CHECK(r.sample_rate == 16000);
    REQUIRE(r.samples.size() == w.samples.size());
    for (std::size_t i = 0; i < w.samples.size(); ++i) CHECK(std::abs(r.samples[i] - w.samples[i]) <= 1.0 / 32768);
}

TEST_CASE("wav reader decodes known PCM values") {
    TempDir dir("audio");
    write_raw_wav(dir / "k.wav", 1, 1, 16000, 16, {0, 16384, -32768, 32767});
    const WaveformSignal r = read_wav(dir / "k.wav");
    REQUIRE(r.samples.size() == 4);
    CHECK(r.samples[0] == 0.0);
    CHECK(r.samples[1] == 0.5);
    CHECK(r.samples[2] == -1.0);
    CHECK(r.samples[3] == 32767.0 / 32768.0);
}

TEST_CASE("wav reader rejects unsupported formats") {
    TempDir dir("audio");
    write_raw_wav(dir / "rate.wav", 1, 1, 22050, 16, {1, 2});
    write_raw_wav(dir / "stereo.wav", 1, 2, 16000, 16, {1, 2});
    write_raw_wav(dir / "float.wav", 3, 1, 16000, 16, {1, 2});
    write_raw_wav(dir / "bits.wav", 1, 1, 16000, 8, {1});
    std::ofstream(dir / "junk.wav") << "not a wav file";
    for (const char* name : {"rate.wav", "stereo.wav", "float.wav", "bits.wav", "junk.wav", "missing.wav"})
        CHECK_THROWS_AS(read_wav(dir / name), DataError);
    try {
        read_wav(dir / "rate.wav");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("22050") != std::string::npos);
    }
}

TEST_CASE("wav writer clips and refuses non-finite samples") {
    TempDir dir("audio");
    write_wav(dir / "clip.wav", WaveformSignal{{2.0, -2.0}, 16000});
    const WaveformSignal r = read_wav(dir / "clip.wav");
    CHECK(r.samples[0] == 32767.0 / 32768.0);
    CHECK(r.samples[1] == -1.0);
    CHECK_THROWS_AS(write_wav(dir / "nan.wav", WaveformSignal{{0.0, std::nan("")}, 16000}), NumericError);
}
