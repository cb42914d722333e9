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

#include "vcwave/audio.h"
#include "vcwave/codec.h"
#include "vcwave/features.h"
#include "vcwave/model.h"
#include "vcwave/optim.h"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace vcwave {

// One training utterance at sample rate: target classes and the conditioning
// matrix, truncated to a common length.
struct Utterance {
    std::string name;
    ClassSequence classes;
    Tensor conditioning;  // [C_h x T]

    std::size_t samples() const { return classes.size(); }
};

// Encodes the audio and upsamples the track. The two lengths may differ by at
// most one frame; both are cut to the shorter one.
Utterance prepare_utterance(std::string name, const WaveformSignal& audio, const ConditioningTrack& track,
                            const MuLawConfig& mulaw, UpsampleMode mode = UpsampleMode::hold);

struct TrainerConfig {
    ModelConfig model;
    std::size_t batch_samples = 15000;   // scored targets per step
    std::size_t segment_samples = 5000;
    double learning_rate = 1e-4;
    std::uint64_t seed = 0;
    std::size_t threads = 0;  // 0: hardware concurrency
};

// Where one segment comes from. The targets are classes[start, start + length).
struct SegmentRef {
    std::size_t utterance = 0;
    std::size_t start = 0;
    std::size_t length = 0;
};

// Teacher-forced inputs for positions [start - context, start + length) and
// the matching conditioning columns. Only the last `length` positions are
// scored. The context is cut at the utterance head rather than padded; with
// zero-padded causal convolutions both give the same logits.
struct TrainSegment {
    SegmentRef ref;
    std::size_t context = 0;
    ClassSequence inputs;
    ClassSequence targets;
    Tensor conditioning;
};

// The segment schedule of one step. Depends only on (seed, step) and the
// utterance lengths, so a resumed run draws the same segments.
std::vector<SegmentRef> make_batch(std::span<const Utterance> corpus, const TrainerConfig& config,
                                   std::uint64_t step);

TrainSegment materialize(std::span<const Utterance> corpus, const SegmentRef& ref, std::size_t receptive_field,
                         int center_class);

// Throws DataError for an empty corpus, a conditioning width that does not
// match the model, or an utterance not longer than the receptive field.
void validate_corpus(std::span<const Utterance> corpus, const ModelConfig& model);

struct TrainReport {
    std::uint64_t step = 0;  // updates completed after this report's step
    double loss = 0.0;       // mean cross-entropy in nats, before the update
    double accuracy = 0.0;
    double seconds = 0.0;
};

// One forward/backward/Adam cycle on the given segments. Per-segment
// gradients are summed in segment order whatever the thread count.
TrainReport train_step(ModelParams& params, std::span<const Utterance> corpus, std::span<const SegmentRef> batch,
                       AdamState& adam, std::size_t threads = 1);

struct ValidationReport {
    double loss = 0.0;
    double accuracy = 0.0;
    std::size_t samples = 0;
};

ValidationReport validate(const ModelParams& params, std::span<const Utterance> held_out);

struct TrainOptions {
    TrainerConfig trainer;
    std::uint64_t steps = 200000;
    std::uint64_t checkpoint_every = 1000;
    std::string out_dir;
    std::string resume_from;  // checkpoint path; empty starts fresh
    double validation_fraction = 0.05;
    std::function<void(const TrainReport&)> on_report;
};

std::string checkpoint_name(std::uint64_t step);

// Runs training and returns the final checkpoint path. Writes ckpt_<step>.vckp
// (plus the optimizer state next to it) at step 0 of a fresh run, every
// checkpoint_every steps and at the end, train.log with one line per step and
// valid.log at every checkpoint when utterances are held out.
std::string train(std::vector<Utterance> corpus, const TrainOptions& options);

}  // namespace vcwave
