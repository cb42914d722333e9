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

#include "vcwave/audio.h"

#include "byte_io.h"
#include "vcwave/errors.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

namespace vcwave {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;
constexpr double kPcmScale = 32768.0;

struct FormatChunk {
    std::uint16_t format;
    std::uint16_t channels;
    std::uint32_t rate;
    std::uint16_t bits;
};

}  // namespace

WaveformSignal read_wav(const std::string& path, int expected_rate) {
    const std::vector<char> data = detail::read_file(path);
    detail::ByteReader in(data, path);
    if (in.bytes(4) != "RIFF") throw DataError(path + ": not a RIFF file");
    in.u32();
    if (in.bytes(4) != "WAVE") throw DataError(path + ": RIFF file is not WAVE");

    std::optional<FormatChunk> fmt;
    while (!in.at_end()) {
        const std::string id = in.bytes(4);
        const std::uint32_t size = in.u32();
        if (id == "fmt ") {
            if (size < 16) throw DataError(path + ": fmt chunk too short");
            FormatChunk f;
            f.format = in.u16();
            f.channels = in.u16();
            f.rate = in.u32();
            in.u32();  // byte rate
            in.u16();  // block align
            f.bits = in.u16();
            std::uint32_t consumed = 16;
            if (f.format == kFormatExtensible && size >= 26) {
                in.u16();  // cbSize
                in.u16();  // valid bits
                in.u32();  // channel mask
                f.format = in.u16();
                consumed = 26;
            }
            in.skip(size - consumed + (size & 1));
            fmt = f;
        } else if (id == "data") {
            if (!fmt) throw DataError(path + ": data chunk before fmt chunk");
            if (fmt->format != kFormatPcm) throw DataError(path + ": only PCM WAV is supported");
            if (fmt->channels != 1)
                throw DataError(path + ": expected mono audio, got " + std::to_string(fmt->channels) + " channels");
            if (fmt->bits != 16)
                throw DataError(path + ": expected 16-bit PCM, got " + std::to_string(fmt->bits) + " bits");
            if (static_cast<int>(fmt->rate) != expected_rate)
                throw DataError(path + ": sample rate " + std::to_string(fmt->rate) + " Hz is not supported (expected " +
                                std::to_string(expected_rate) + " Hz)");
            const std::size_t count = std::min<std::size_t>(size, in.remaining()) / 2;
            WaveformSignal signal;
            signal.sample_rate = expected_rate;
            signal.samples.resize(count);
            for (std::size_t i = 0; i < count; ++i) signal.samples[i] = in.i16() / kPcmScale;
            return signal;
        } else {
            in.skip(std::min<std::size_t>(size + (size & 1), in.remaining()));
        }
    }
    throw DataError(path + ": no data chunk");
}

void write_wav(const std::string& path, const WaveformSignal& signal) {
    const auto count = static_cast<std::uint32_t>(signal.samples.size());
    detail::ByteWriter out;
    out.bytes("RIFF");
    out.u32(36 + 2 * count);
    out.bytes("WAVE");
    out.bytes("fmt ");
    out.u32(16);
    out.u16(kFormatPcm);
    out.u16(1);
    out.u32(static_cast<std::uint32_t>(signal.sample_rate));
    out.u32(static_cast<std::uint32_t>(signal.sample_rate) * 2);
    out.u16(2);
    out.u16(16);
    out.bytes("data");
    out.u32(2 * count);
    for (double x : signal.samples) {
        if (!std::isfinite(x)) throw NumericError(path + ": refusing to write non-finite audio samples");
        const double scaled = std::nearbyint(std::clamp(x, -1.0, 1.0) * kPcmScale);
        out.i16(static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
    }
    detail::write_file_atomic(path, out.buffer());
}

}  // namespace vcwave
