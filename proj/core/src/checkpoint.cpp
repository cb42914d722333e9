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

#include "vcwave/checkpoint.h"

#include "byte_io.h"
#include "vcwave/errors.h"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace vcwave {

namespace {

constexpr std::string_view kMagic = "VCKP";

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string header_text(const std::map<std::string, std::string>& header) {
    std::string text;
    for (const auto& [k, v] : header) text += k + "=" + v + "\n";
    return text;
}

const std::string& field(const std::map<std::string, std::string>& header, const std::string& key,
                         const std::string& source) {
    const auto it = header.find(key);
    if (it == header.end()) throw DataError(source + ": header is missing '" + key + "'");
    return it->second;
}

std::uint64_t parse_uint(const std::string& text, const std::string& key, const std::string& source) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size())
        throw DataError(source + ": '" + key + "' is not an unsigned integer: " + text);
    return v;
}

double parse_double(const std::string& text, const std::string& key, const std::string& source) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw DataError(source + ": '" + key + "' is not a number: " + text);
    return v;
}

}  // namespace

std::vector<char> encode_checkpoint(const CheckpointData& data) {
    detail::ByteWriter w;
    w.bytes(kMagic);
    w.u32(kCheckpointVersion);
    const std::string text = header_text(data.header);
    w.u32(static_cast<std::uint32_t>(text.size()));
    w.bytes(text);
    for (const auto& [name, t] : data.tensors) {
        w.u32(static_cast<std::uint32_t>(name.size()));
        w.bytes(name);
        w.u32(static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
        for (double v : t.values()) w.f64(v);
    }
    return std::move(w.buffer());
}

CheckpointData decode_checkpoint(const std::vector<char>& bytes, const std::string& source) {
    detail::ByteReader r(bytes, source);
    if (r.remaining() < 4 || r.bytes(4) != kMagic) throw DataError(source + ": not a VCKP checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw DataError(source + ": unsupported checkpoint version " + std::to_string(version));
    CheckpointData data;
    std::istringstream text(r.bytes(r.u32()));
    for (std::string line; std::getline(text, line);) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError(source + ": malformed header line '" + line + "'");
        data.header[line.substr(0, eq)] = line.substr(eq + 1);
    }
    while (!r.at_end()) {
        std::string name = r.bytes(r.u32());
        const std::uint32_t rank = r.u32();
        if (rank == 0 || rank > 8) throw DataError(source + ": tensor " + name + " has rank " + std::to_string(rank));
        Shape shape(rank);
        for (auto& d : shape) d = r.u32();
        const std::size_t n = shape_size(shape);
        if (n > r.remaining() / 8) throw DataError(source + ": tensor " + name + " is truncated");
        std::vector<double> values(n);
        for (double& v : values) v = r.f64();
        data.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
    }
    return data;
}

std::string config_to_text(const ModelConfig& c) {
    return "blocks=" + std::to_string(c.blocks) + "\nlayers_per_block=" + std::to_string(c.layers_per_block) +
           "\nkernel_size=" + std::to_string(c.kernel_size) + "\nresidual_channels=" +
           std::to_string(c.residual_channels) + "\nskip_channels=" + std::to_string(c.skip_channels) +
           "\nclasses=" + std::to_string(c.classes) + "\nppg_dim=" + std::to_string(c.ppg_dim) + "\n";
}

namespace {

std::map<std::string, std::string> config_header(const ModelConfig& c) {
    std::map<std::string, std::string> h;
    std::istringstream in(config_to_text(c));
    for (std::string line; std::getline(in, line);) {
        const auto eq = line.find('=');
        h[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return h;
}

}  // namespace

ModelConfig config_from_header(const std::map<std::string, std::string>& header, const std::string& source) {
    ModelConfig c;
    auto get = [&](const char* key) { return parse_uint(field(header, key, source), key, source); };
    c.blocks = get("blocks");
    c.layers_per_block = get("layers_per_block");
    c.kernel_size = get("kernel_size");
    c.residual_channels = get("residual_channels");
    c.skip_channels = get("skip_channels");
    c.classes = get("classes");
    c.ppg_dim = get("ppg_dim");
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(source + ": " + e.what());
    }
    return c;
}

std::vector<char> serialize_params(const ModelParams& params) {
    CheckpointData data;
    data.header = config_header(params.config);
    params.for_each([&](const std::string& name, const Tensor& t) { data.tensors.emplace_back(name, t); });
    return encode_checkpoint(data);
}

void save_checkpoint(const std::string& path, const ModelParams& params) {
    if (!params.all_finite()) throw NumericError("refusing to save non-finite parameters to " + path);
    detail::write_file_atomic(path, serialize_params(params));
}

namespace {

void fill_from(std::vector<std::pair<std::string, Tensor>>& tensors, std::size_t& next, const std::string& prefix,
               const std::string& name, Tensor& dst, const std::string& source) {
    if (next >= tensors.size()) throw DataError(source + ": missing tensor " + prefix + name);
    auto& [stored_name, stored] = tensors[next++];
    if (stored_name != prefix + name)
        throw DataError(source + ": expected tensor " + prefix + name + ", found " + stored_name);
    if (stored.shape() != dst.shape())
        throw DataError(source + ": tensor " + stored_name + " has shape " + shape_to_string(stored.shape()) +
                        ", expected " + shape_to_string(dst.shape()));
    dst = std::move(stored);
}

}  // namespace

ModelParams load_checkpoint(const std::string& path) {
    CheckpointData data = decode_checkpoint(detail::read_file(path), path);
    ModelParams params = zero_params(config_from_header(data.header, path));
    std::size_t next = 0;
    params.for_each([&](const std::string& name, Tensor& t) { fill_from(data.tensors, next, "", name, t, path); });
    if (next != data.tensors.size()) throw DataError(path + ": unexpected extra tensors");
    if (!params.all_finite()) throw NumericError(path + ": checkpoint holds non-finite values");
    return params;
}

ModelConfig read_checkpoint_config(const std::string& path) {
    return config_from_header(decode_checkpoint(detail::read_file(path), path).header, path);
}

std::string adam_state_path(const std::string& checkpoint_path) {
    const std::string ext = ".vckp";
    if (checkpoint_path.size() > ext.size() && checkpoint_path.ends_with(ext))
        return checkpoint_path.substr(0, checkpoint_path.size() - ext.size()) + ".adam.vckp";
    return checkpoint_path + ".adam.vckp";
}

void save_adam_state(const std::string& path, const AdamState& state, const ModelParams& params) {
    CheckpointData data;
    data.header = config_header(params.config);
    data.header["step"] = std::to_string(state.step);
    data.header["lr"] = format_double(state.lr);
    data.header["beta1"] = format_double(state.beta1);
    data.header["beta2"] = format_double(state.beta2);
    data.header["eps"] = format_double(state.eps);
    std::size_t i = 0;
    const bool has_moments = !state.first_moment.empty();
    params.for_each([&](const std::string& name, const Tensor& t) {
        data.tensors.emplace_back("m/" + name, has_moments ? state.first_moment[i] : Tensor(t.shape()));
        data.tensors.emplace_back("v/" + name, has_moments ? state.second_moment[i] : Tensor(t.shape()));
        ++i;
    });
    detail::write_file_atomic(path, encode_checkpoint(data));
}

AdamState load_adam_state(const std::string& path, const ModelParams& params) {
    CheckpointData data = decode_checkpoint(detail::read_file(path), path);
    if (!(config_from_header(data.header, path) == params.config))
        throw DataError(path + ": optimizer state belongs to a different model configuration");
    AdamState s;
    s.step = parse_uint(field(data.header, "step", path), "step", path);
    s.lr = parse_double(field(data.header, "lr", path), "lr", path);
    s.beta1 = parse_double(field(data.header, "beta1", path), "beta1", path);
    s.beta2 = parse_double(field(data.header, "beta2", path), "beta2", path);
    s.eps = parse_double(field(data.header, "eps", path), "eps", path);
    std::size_t next = 0;
    params.for_each([&](const std::string& name, const Tensor& t) {
        Tensor m(t.shape()), v(t.shape());
        fill_from(data.tensors, next, "m/", name, m, path);
        fill_from(data.tensors, next, "v/", name, v, path);
        s.first_moment.push_back(std::move(m));
        s.second_moment.push_back(std::move(v));
    });
    if (next != data.tensors.size()) throw DataError(path + ": unexpected extra tensors");
    return s;
}

}  // namespace vcwave
