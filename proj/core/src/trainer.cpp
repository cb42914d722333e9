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

#include "vcwave/trainer.h"

#include "vcwave/checkpoint.h"
#include "vcwave/errors.h"
#include "vcwave/network.h"
#include "vcwave/rng.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;

namespace vcwave {

namespace {

Tensor slice_columns(const Tensor& m, std::size_t first, std::size_t count) {
    Tensor out({m.dim(0), count});
    for (std::size_t r = 0; r < m.dim(0); ++r) std::copy_n(m.row(r) + first, count, out.row(r));
    return out;
}

void zero_all(ModelParams& p) {
    p.for_each([](const std::string&, Tensor& t) { t.fill(0.0); });
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::string format_report(const TrainReport& r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%llu\t%.9g\t%.6f\t%.3f\n", static_cast<unsigned long long>(r.step), r.loss,
                  r.accuracy, r.seconds);
    return buf;
}

// Keeps only lines whose leading step field is <= last_step.
void trim_log(const fs::path& path, std::uint64_t last_step) {
    std::ifstream in(path);
    if (!in) return;
    std::string kept;
    for (std::string line; std::getline(in, line);) {
        std::istringstream fields(line);
        unsigned long long step = 0;
        if (fields >> step && step <= last_step) kept += line + "\n";
    }
    in.close();
    std::ofstream out(path, std::ios::trunc);
    out << kept;
}

}  // namespace

Utterance prepare_utterance(std::string name, const WaveformSignal& audio, const ConditioningTrack& track,
                            const MuLawConfig& mulaw, UpsampleMode mode) {
    UpsampledConditioning h = upsample_conditioning(track, audio.sample_rate, mode);
    const std::size_t audio_len = audio.samples.size(), cond_len = h.samples();
    const std::size_t gap = audio_len > cond_len ? audio_len - cond_len : cond_len - audio_len;
    if (gap > h.ratio)
        throw DataError(name + ": audio has " + std::to_string(audio_len) + " samples but conditioning covers " +
                        std::to_string(cond_len) + " (more than one frame apart)");
    const std::size_t n = std::min(audio_len, cond_len);
    Utterance u;
    u.name = std::move(name);
    u.classes = mulaw_encode(std::span<const double>(audio.samples.data(), n), mulaw);
    u.conditioning = n == cond_len ? std::move(h.matrix) : slice_columns(h.matrix, 0, n);
    return u;
}

void validate_corpus(std::span<const Utterance> corpus, const ModelConfig& model) {
    if (corpus.empty()) throw DataError("training corpus is empty");
    const std::size_t rf = receptive_field(model);
    for (const Utterance& u : corpus) {
        if (u.conditioning.rank() != 2 || u.conditioning.dim(0) != model.conditioning_channels())
            throw DataError(u.name + ": conditioning has " +
                            std::to_string(u.conditioning.rank() == 2 ? u.conditioning.dim(0) : 0) +
                            " channels, model expects " + std::to_string(model.conditioning_channels()));
        if (u.conditioning.dim(1) != u.samples())
            throw DataError(u.name + ": conditioning and audio lengths differ");
        if (u.samples() <= rf)
            throw DataError(u.name + ": " + std::to_string(u.samples()) +
                            " samples is not longer than the receptive field (" + std::to_string(rf) + ")");
        for (int c : u.classes)
            if (c < 0 || static_cast<std::size_t>(c) >= model.classes)
                throw DataError(u.name + ": class " + std::to_string(c) + " out of range");
    }
}

std::vector<SegmentRef> make_batch(std::span<const Utterance> corpus, const TrainerConfig& config,
                                   std::uint64_t step) {
    if (corpus.empty()) throw DataError("training corpus is empty");
    if (config.batch_samples == 0) throw std::invalid_argument("batch size must be positive");
    if (config.segment_samples == 0) throw std::invalid_argument("segment length must be positive");
    Rng rng(mix_seed(mix_seed(config.seed) + step));
    std::vector<SegmentRef> batch;
    std::size_t remaining = config.batch_samples;
    while (remaining > 0) {
        SegmentRef s;
        s.utterance = rng.index(corpus.size());
        const std::size_t len = corpus[s.utterance].samples();
        if (len == 0) throw DataError(corpus[s.utterance].name + ": empty utterance");
        s.length = std::min({config.segment_samples, remaining, len});
        s.start = rng.index(len - s.length + 1);
        remaining -= s.length;
        batch.push_back(s);
    }
    return batch;
}

TrainSegment materialize(std::span<const Utterance> corpus, const SegmentRef& ref, std::size_t receptive_field,
                         int center_class) {
    const Utterance& u = corpus[ref.utterance];
    if (ref.length == 0 || ref.start + ref.length > u.samples())
        throw std::out_of_range(u.name + ": segment outside the utterance");
    TrainSegment seg;
    seg.ref = ref;
    seg.context = std::min(receptive_field - 1, ref.start);
    const std::size_t first = ref.start - seg.context, steps = seg.context + ref.length;
    seg.inputs.resize(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const std::size_t p = first + i;
        seg.inputs[i] = p == 0 ? center_class : u.classes[p - 1];
    }
    seg.targets.assign(u.classes.begin() + static_cast<std::ptrdiff_t>(ref.start),
                       u.classes.begin() + static_cast<std::ptrdiff_t>(ref.start + ref.length));
    seg.conditioning = slice_columns(u.conditioning, first, steps);
    return seg;
}

TrainReport train_step(ModelParams& params, std::span<const Utterance> corpus, std::span<const SegmentRef> batch,
                       AdamState& adam, std::size_t threads) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
    const auto t0 = std::chrono::steady_clock::now();
    const ModelConfig& cfg = params.config;
    const std::size_t rf = receptive_field(cfg);
    const int center = cfg.mulaw().center_class();

    std::size_t total = 0;
    for (const SegmentRef& s : batch) total += s.length;
    if (total == 0) throw std::invalid_argument("train_step: zero-length batch");
    const double scale = 1.0 / static_cast<double>(total);

    threads = std::min(resolve_threads(threads), batch.size());
    ModelParams grads = zero_params(cfg);
    std::vector<ModelParams> scratch(threads, grads);
    std::vector<SegmentStats> stats(batch.size());
    std::vector<std::exception_ptr> errors(threads);

    auto run = [&](std::size_t slot, std::size_t index) {
        try {
            if (index >= threads) zero_all(scratch[slot]);
            const TrainSegment seg = materialize(corpus, batch[index], rf, center);
            stats[index] = segment_forward_backward(params, seg.inputs, seg.targets, seg.conditioning, seg.context,
                                                    scale, &scratch[slot]);
        } catch (const NumericError& e) {
            const SegmentRef& r = batch[index];
            errors[slot] = std::make_exception_ptr(NumericError(
                std::string(e.what()) + " in segment " + std::to_string(index) + " (" + corpus[r.utterance].name +
                ", samples " + std::to_string(r.start) + ".." + std::to_string(r.start + r.length) + ")"));
        } catch (...) {
            errors[slot] = std::current_exception();
        }
    };

    for (std::size_t first = 0; first < batch.size(); first += threads) {
        const std::size_t n = std::min(threads, batch.size() - first);
        if (n == 1) {
            run(0, first);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t j = 0; j < n; ++j) pool.emplace_back(run, j, first + j);
            for (auto& t : pool) t.join();
        }
        for (std::size_t j = 0; j < n; ++j)
            if (errors[j]) std::rethrow_exception(errors[j]);
        for (std::size_t j = 0; j < n; ++j) accumulate(grads, scratch[j]);
    }

    TrainReport report;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (const SegmentStats& s : stats) {
        loss_sum += s.loss_sum;
        correct += s.correct;
    }
    report.loss = loss_sum / static_cast<double>(total);
    report.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    if (!std::isfinite(report.loss)) throw NumericError("train_step: non-finite loss");

    const std::vector<ParamSlot> slots = param_slots(params, grads);
    adam_step(slots, adam);
    report.step = adam.step;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

ValidationReport validate(const ModelParams& params, std::span<const Utterance> held_out) {
    constexpr std::size_t kChunk = 4000;
    const ModelConfig& cfg = params.config;
    const std::size_t rf = receptive_field(cfg);
    const int center = cfg.mulaw().center_class();
    ValidationReport report;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t u = 0; u < held_out.size(); ++u) {
        for (std::size_t start = 0; start < held_out[u].samples(); start += kChunk) {
            const SegmentRef ref{u, start, std::min(kChunk, held_out[u].samples() - start)};
            const TrainSegment seg = materialize(held_out, ref, rf, center);
            validate_inputs(cfg, seg.inputs, seg.conditioning.dim(0), seg.conditioning.dim(1), seg.inputs.size());
            const Tensor logits =
                output_head(params, residual_stack(params, seg.inputs, ConditioningView::of(seg.conditioning)));
            for (std::size_t s = 0; s < seg.targets.size(); ++s) {
                const std::size_t t = seg.context + s;
                double peak = logits.at(0, t);
                std::size_t best = 0;
                for (std::size_t q = 1; q < cfg.classes; ++q)
                    if (logits.at(q, t) > peak) peak = logits.at(best = q, t);
                double z = 0.0;
                for (std::size_t q = 0; q < cfg.classes; ++q) z += std::exp(logits.at(q, t) - peak);
                loss_sum += std::log(z) + peak - logits.at(static_cast<std::size_t>(seg.targets[s]), t);
                if (static_cast<int>(best) == seg.targets[s]) ++correct;
            }
            report.samples += seg.targets.size();
        }
    }
    if (report.samples > 0) {
        report.loss = loss_sum / static_cast<double>(report.samples);
        report.accuracy = static_cast<double>(correct) / static_cast<double>(report.samples);
    }
    if (!std::isfinite(report.loss)) throw NumericError("validation loss is not finite");
    return report;
}

std::string checkpoint_name(std::uint64_t step) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "ckpt_%08llu.vckp", static_cast<unsigned long long>(step));
    return buf;
}

std::string train(std::vector<Utterance> corpus, const TrainOptions& options) {
    const TrainerConfig& tc = options.trainer;
    tc.model.validate();
    if (options.out_dir.empty()) throw std::invalid_argument("train: output directory is required");
    if (options.checkpoint_every == 0) throw std::invalid_argument("train: checkpoint interval must be positive");
    if (!(options.validation_fraction >= 0.0 && options.validation_fraction < 1.0))
        throw std::invalid_argument("train: validation fraction must be in [0, 1)");
    if (corpus.empty()) throw DataError("training corpus is empty");

    const auto held = static_cast<std::size_t>(
        std::floor(static_cast<double>(corpus.size()) * options.validation_fraction));
    std::vector<Utterance> held_out(std::make_move_iterator(corpus.end() - static_cast<std::ptrdiff_t>(held)),
                                    std::make_move_iterator(corpus.end()));
    corpus.resize(corpus.size() - held);
    validate_corpus(corpus, tc.model);
    if (!held_out.empty()) validate_corpus(held_out, tc.model);

    const fs::path dir(options.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
    const fs::path train_log = dir / "train.log", valid_log = dir / "valid.log";

    ModelParams params;
    AdamState adam;
    if (!options.resume_from.empty()) {
        params = load_checkpoint(options.resume_from);
        if (!(params.config == tc.model))
            throw DataError(options.resume_from + ": checkpoint model configuration differs from the requested one:\n" +
                            config_to_text(params.config) + "vs\n" + config_to_text(tc.model));
        adam = load_adam_state(adam_state_path(options.resume_from), params);
        trim_log(train_log, adam.step);
        trim_log(valid_log, adam.step);
    } else {
        params = init_params(tc.model, tc.seed);
        adam.lr = tc.learning_rate;
        std::ofstream(train_log, std::ios::trunc);
        std::ofstream(valid_log, std::ios::trunc);
    }

    auto save = [&](std::uint64_t step) {
        const std::string path = (dir / checkpoint_name(step)).string();
        save_checkpoint(path, params);
        save_adam_state(adam_state_path(path), adam, params);
        if (!held_out.empty()) {
            const ValidationReport v = validate(params, held_out);
            std::ofstream out(valid_log, std::ios::app);
            char buf[128];
            std::snprintf(buf, sizeof buf, "%llu\t%.9g\t%.6f\n", static_cast<unsigned long long>(step), v.loss,
                          v.accuracy);
            out << buf;
        }
        return path;
    };

    std::string last = options.resume_from;
    if (options.resume_from.empty()) last = save(0);

    std::ofstream log(train_log, std::ios::app);
    if (!log) throw DataError("cannot write " + train_log.string());
    for (std::uint64_t step = adam.step; step < options.steps; ++step) {
        const std::vector<SegmentRef> batch = make_batch(corpus, tc, step);
        const TrainReport report = train_step(params, corpus, batch, adam, tc.threads);
        log << format_report(report) << std::flush;
        if (options.on_report) options.on_report(report);
        if (report.step % options.checkpoint_every == 0 || report.step == options.steps) last = save(report.step);
    }
    return last;
}

}  // namespace vcwave
