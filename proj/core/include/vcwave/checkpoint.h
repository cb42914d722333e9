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

#include "vcwave/model.h"
#include "vcwave/optim.h"

#include <map>
#include <string>
#include <utility>
#include <vector>

// VCKP files: magic "VCKP", u32 version, u32 length + key=value text block,
// then (u32 name length, name, u32 rank, u32 dims..., f64 data) per tensor.
namespace vcwave {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointData {
    std::map<std::string, std::string> header;
    std::vector<std::pair<std::string, Tensor>> tensors;
};

std::vector<char> encode_checkpoint(const CheckpointData& data);
CheckpointData decode_checkpoint(const std::vector<char>& bytes, const std::string& source);

std::string config_to_text(const ModelConfig& config);
ModelConfig config_from_header(const std::map<std::string, std::string>& header, const std::string& source);

std::vector<char> serialize_params(const ModelParams& params);
void save_checkpoint(const std::string& path, const ModelParams& params);
// Throws DataError on a malformed file or a tensor layout that does not match
// the stored configuration.
ModelParams load_checkpoint(const std::string& path);
ModelConfig read_checkpoint_config(const std::string& path);

// Optimizer state lives next to the model checkpoint and stores the moments
// under "m/<name>" and "v/<name>".
std::string adam_state_path(const std::string& checkpoint_path);
void save_adam_state(const std::string& path, const AdamState& state, const ModelParams& params);
AdamState load_adam_state(const std::string& path, const ModelParams& params);

}  // namespace vcwave
