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

#include "vcwave/features.h"

#include "byte_io.h"
#include "vcwave/errors.h"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

namespace vcwave {

void ConditioningTrack::validate() const {
    if (ppg.rank() != 2 || ppg.dim(0) < 1 || ppg.dim(1) < 1)
        throw DataError("conditioning track: PPG must be a non-empty [D x N] matrix, got " +
                        shape_to_string(ppg.shape()));
    const std::size_t n = frames();
    if (f0.size() != n || vuv.size() != n)
        throw DataError("conditioning track: " + std::to_string(n) + " PPG frames but " + std::to_string(f0.size()) +
                        " f0 and " + std::to_string(vuv.size()) + " vuv frames");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(f0[i]) || f0[i] < 0.0)
            throw DataError("conditioning track: invalid f0 " + std::to_string(f0[i]) + " at frame " +
                            std::to_string(i));
        if ((f0[i] > 0.0) != (vuv[i] == 1) || vuv[i] > 1)
            throw DataError("conditioning track: f0/vuv disagree at frame " + std::to_string(i));
    }
    if (!ppg.all_finite()) throw DataError("conditioning track: non-finite PPG entries");
    if (!(frame_hop_s > 0.0)) throw DataError("conditioning track: frame hop must be positive");
}

std::size_t upsample_ratio(int sample_rate, double frame_hop_s) {
    const double exact = sample_rate * frame_hop_s;
    const double rounded = std::round(exact);
    if (rounded < 1.0 || std::abs(exact - rounded) > 1e-6)
        throw DataError("frame hop " + std::to_string(frame_hop_s) + " s at " + std::to_string(sample_rate) +
                        " Hz is not a whole number of samples");
    return static_cast<std::size_t>(rounded);
}

std::vector<double> interpolated_log_f0(std::span<const double> f0) {
    const std::size_t n = f0.size();
    std::vector<double> out(n, 0.0);
    std::size_t prev = n;  // index of last voiced frame, n if none yet
    for (std::size_t i = 0; i < n; ++i) {
        if (f0[i] <= 0.0) continue;
        out[i] = std::log(f0[i]);
        if (prev != n && i - prev > 1) {
            const double a = out[prev], b = out[i];
            const double span = static_cast<double>(i - prev);
            for (std::size_t j = prev + 1; j < i; ++j) out[j] = a + (b - a) * (static_cast<double>(j - prev) / span);
        }
        prev = i;
    }
    return out;
}

UpsampledConditioning upsample_conditioning(const ConditioningTrack& track, int sample_rate, UpsampleMode mode) {
    if (track.frames() == 0) throw DataError("upsample_conditioning: empty conditioning track");
    track.validate();
    const std::size_t ratio = upsample_ratio(sample_rate, track.frame_hop_s);
    const std::size_t d = track.ppg_dim(), n = track.frames(), steps = n * ratio;
    const std::vector<double> log_f0 = interpolated_log_f0(track.f0);

    UpsampledConditioning out;
    out.ratio = ratio;
    out.ppg_dim = d;
    out.matrix = Tensor({d + 2, steps});
    auto fill_row = [&](double* row, auto&& frame_value, bool interpolate) {
        for (std::size_t f = 0; f < n; ++f) {
            const double a = frame_value(f);
            const double b = (interpolate && f + 1 < n) ? frame_value(f + 1) : a;
            double* dst = row + f * ratio;
            if (a == b) {
                std::fill(dst, dst + ratio, a);
            } else {
                for (std::size_t k = 0; k < ratio; ++k)
                    dst[k] = a + (b - a) * (static_cast<double>(k) / static_cast<double>(ratio));
            }
        }
    };
    const bool linear = mode == UpsampleMode::linear;
    for (std::size_t c = 0; c < d; ++c)
        fill_row(out.matrix.row(c), [&](std::size_t f) { return track.ppg.at(c, f); }, linear);
    fill_row(out.matrix.row(d), [&](std::size_t f) { return log_f0[f]; }, linear);
    fill_row(out.matrix.row(d + 1), [&](std::size_t f) { return static_cast<double>(track.vuv[f]); }, false);
    return out;
}

namespace {

F0Stats stats_of_logs(const std::vector<double>& logs) {
    if (logs.empty()) throw DataError("f0 statistics: no voiced frames");
    double mean = 0.0;
    for (double v : logs) mean += v;
    mean /= static_cast<double>(logs.size());
    double var = 0.0;
    for (double v : logs) var += (v - mean) * (v - mean);
    var /= static_cast<double>(logs.size());
    return F0Stats{mean, std::sqrt(var), logs.size()};
}

void append_voiced_logs(std::span<const double> f0, std::vector<double>& logs) {
    for (double v : f0)
        if (v > 0.0) logs.push_back(std::log(v));
}

}  // namespace

F0Stats f0_statistics(std::span<const ConditioningTrack> tracks) {
    std::vector<double> logs;
    for (const ConditioningTrack& t : tracks) append_voiced_logs(t.f0, logs);
    return stats_of_logs(logs);
}

F0Stats f0_statistics(std::span<const std::vector<double>> f0_tracks) {
    std::vector<double> logs;
    for (const auto& t : f0_tracks) append_voiced_logs(t, logs);
    return stats_of_logs(logs);
}

std::vector<double> transform_f0(std::span<const double> f0, const F0Stats& source, const F0Stats& target) {
    std::vector<double> out(f0.begin(), f0.end());
    if (std::none_of(f0.begin(), f0.end(), [](double v) { return v > 0.0; })) {
        std::cerr << "warning: transform_f0: input has no voiced frames; f0 left unchanged\n";
        return out;
    }
    if (source.sigma < 0.0 || target.sigma < 0.0) throw DataError("transform_f0: negative deviation in f0 stats");
    double scale = 1.0;
    if (source.sigma == 0.0) {
        if (target.sigma != 0.0)
            throw DataError("transform_f0: source log-f0 deviation is 0, cannot scale to target deviation " +
                            std::to_string(target.sigma));
    } else {
        scale = target.sigma / source.sigma;
    }
    for (double& v : out)
        if (v > 0.0) v = std::exp((std::log(v) - source.mu) * scale + target.mu);
    return out;
}

PitchTrack estimate_f0_vuv(const WaveformSignal& x, const F0EstimatorConfig& cfg) {
    if (x.samples.empty()) throw DataError("estimate_f0_vuv: empty signal");
    const double sr = x.sample_rate;
    if (sr < 2.0 * cfg.f0_max)
        throw DataError("estimate_f0_vuv: sample rate " + std::to_string(x.sample_rate) +
                        " Hz is below twice the maximum f0");
    if (!(cfg.f0_min > 0.0) || cfg.f0_min >= cfg.f0_max) throw DataError("estimate_f0_vuv: invalid f0 range");
    const std::size_t hop = upsample_ratio(x.sample_rate, cfg.hop_s);
    const std::size_t window = static_cast<std::size_t>(std::lround(cfg.window_s * sr));
    const std::size_t len = x.samples.size();
    const std::size_t frames = (len + hop - 1) / hop;
    const std::size_t min_lag = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(sr / cfg.f0_max)));
    const std::size_t max_lag_cfg = static_cast<std::size_t>(std::ceil(sr / cfg.f0_min));

    PitchTrack out{std::vector<double>(frames, 0.0), std::vector<std::uint8_t>(frames, 0)};
    std::vector<double> seg, r;
    for (std::size_t n = 0; n < frames; ++n) {
        const double centre = static_cast<double>(n * hop) + hop / 2.0;
        const auto begin = static_cast<std::ptrdiff_t>(std::floor(centre - window / 2.0));
        const std::size_t lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, begin));
        const std::size_t hi = std::min(len, static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, begin)) + window);
        if (hi <= lo) continue;
        seg.assign(x.samples.begin() + static_cast<std::ptrdiff_t>(lo), x.samples.begin() + static_cast<std::ptrdiff_t>(hi));
        double mean = 0.0;
        for (double v : seg) mean += v;
        mean /= static_cast<double>(seg.size());
        double energy = 0.0;
        for (double& v : seg) {
            v -= mean;
            energy += v * v;
        }
        if (std::sqrt(energy / static_cast<double>(seg.size())) < cfg.energy_threshold) continue;

        const std::size_t max_lag = std::min(max_lag_cfg, seg.size() / 2);
        if (max_lag <= min_lag + 1) continue;
        r.assign(max_lag + 2, 0.0);
        for (std::size_t lag = min_lag - 1; lag <= max_lag + 1 && lag < seg.size(); ++lag) {
            double xy = 0.0, xx = 0.0, yy = 0.0;
            for (std::size_t i = 0; i + lag < seg.size(); ++i) {
                xy += seg[i] * seg[i + lag];
                xx += seg[i] * seg[i];
                yy += seg[i + lag] * seg[i + lag];
            }
            r[lag] = (xx > 0.0 && yy > 0.0) ? xy / std::sqrt(xx * yy) : 0.0;
        }
        std::size_t best = min_lag;
        for (std::size_t lag = min_lag; lag <= max_lag; ++lag)
            if (r[lag] > r[best]) best = lag;
        if (r[best] < cfg.voicing_threshold) continue;
        // Prefer the shortest lag whose peak is close to the global one; longer
        // lags at period multiples score almost as high.
        for (std::size_t lag = min_lag; lag < best; ++lag) {
            if (r[lag] >= 0.9 * r[best] && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
                best = lag;
                break;
            }
        }
        double offset = 0.0;
        const double a = r[best - 1], b = r[best], c = r[best + 1];
        const double denom = a - 2.0 * b + c;
        if (denom < 0.0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
        out.f0[n] = sr / (static_cast<double>(best) + offset);
        out.vuv[n] = 1;
    }
    return out;
}

PitchTrack fit_frames(PitchTrack track, std::size_t frames) {
    track.f0.resize(frames, 0.0);
    track.vuv.resize(frames, 0);
    return track;
}

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    return w;
}

}  // namespace

SpectralFrames stft_magnitudes(const WaveformSignal& x) {
    const std::size_t len = x.samples.size();
    if (len < kStftWindow)
        throw DataError("stft: signal of " + std::to_string(len) + " samples is shorter than one " +
                        std::to_string(kStftWindow) + "-sample window");
    const std::size_t frames = (len - kStftWindow) / kStftHop + 1;
    const std::size_t bins = kFftSize / 2 + 1;
    static const std::vector<double> window = hann_window(kStftWindow);

    auto free_real = [](double* p) { fftw_free(p); };
    auto free_complex = [](fftw_complex* p) { fftw_free(p); };
    std::unique_ptr<double, decltype(free_real)> in(fftw_alloc_real(kFftSize), free_real);
    std::unique_ptr<fftw_complex, decltype(free_complex)> out(fftw_alloc_complex(bins), free_complex);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(kFftSize), in.get(), out.get(), FFTW_ESTIMATE);
    }

    SpectralFrames spec{Tensor({bins, frames})};
    for (std::size_t m = 0; m < frames; ++m) {
        const double* src = x.samples.data() + m * kStftHop;
        for (std::size_t i = 0; i < kStftWindow; ++i) in.get()[i] = src[i] * window[i];
        std::fill(in.get() + kStftWindow, in.get() + kFftSize, 0.0);
        fftw_execute(plan);
        for (std::size_t f = 0; f < bins; ++f) {
            const double mag = std::hypot(out.get()[f][0], out.get()[f][1]);
            spec.magnitudes.at(f, m) = std::max(mag, kMagnitudeFloor);
        }
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    return spec;
}

Tensor read_vcf1(const std::string& path) {
    const std::vector<char> data = detail::read_file(path);
    detail::ByteReader in(data, path);
    if (in.bytes(4) != "VCF1") throw DataError(path + ": bad magic, expected VCF1");
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    const std::uint64_t expected = static_cast<std::uint64_t>(rows) * cols * 4;
    if (in.remaining() != expected)
        throw DataError(path + ": header declares " + std::to_string(rows) + " x " + std::to_string(cols) +
                        " floats but payload has " + std::to_string(in.remaining()) + " bytes");
    Tensor t({rows, cols});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(in.f32());
    return t;
}

void write_vcf1(const std::string& path, const Tensor& rows_by_cols) {
    if (rows_by_cols.rank() != 2) throw DataError("write_vcf1: expected a rank-2 matrix");
    detail::ByteWriter out;
    out.bytes("VCF1");
    out.u32(static_cast<std::uint32_t>(rows_by_cols.dim(0)));
    out.u32(static_cast<std::uint32_t>(rows_by_cols.dim(1)));
    for (double v : rows_by_cols.values()) out.f32(static_cast<float>(v));
    detail::write_file_atomic(path, out.buffer());
}

void write_f0_stats(const std::string& path, const F0Stats& stats) {
    char buf[128];
    std::string text;
    std::snprintf(buf, sizeof buf, "mu=%.17g\n", stats.mu);
    text += buf;
    std::snprintf(buf, sizeof buf, "sigma=%.17g\n", stats.sigma);
    text += buf;
    detail::write_file_atomic(path, std::vector<char>(text.begin(), text.end()));
}

F0Stats read_f0_stats(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open f0 stats file " + path);
    F0Stats stats;
    bool have_mu = false, have_sigma = false;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc() || !std::isfinite(v)) throw DataError(path + ": bad value for " + key);
        if (key == "mu") {
            stats.mu = v;
            have_mu = true;
        } else if (key == "sigma") {
            stats.sigma = v;
            have_sigma = true;
        }
    }
    if (!have_mu || !have_sigma) throw DataError(path + ": expected mu= and sigma= lines");
    if (stats.sigma < 0.0) throw DataError(path + ": sigma must be >= 0");
    return stats;
}

}  // namespace vcwave
