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

#include "cli.h"

#include "vcwave/audio.h"
#include "vcwave/checkpoint.h"
#include "vcwave/corpus.h"
#include "vcwave/errors.h"
#include "vcwave/evaluator.h"
#include "vcwave/features.h"
#include "vcwave/generator.h"
#include "vcwave/trainer.h"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace vcwave::cli {

namespace {

struct ModelFlags {
    ModelConfig config;

    void add(CLI::App* app) {
        app->add_option("--blocks", config.blocks, "Dilated residual blocks")->capture_default_str();
        app->add_option("--layers", config.layers_per_block, "Layers per block (dilations 1, 2, 4, ...)")
            ->capture_default_str();
        app->add_option("--kernel-size", config.kernel_size, "Causal convolution width")->capture_default_str();
        app->add_option("--residual-channels", config.residual_channels, "Residual and gate channels")
            ->capture_default_str();
        app->add_option("--skip-channels", config.skip_channels, "Skip channels")->capture_default_str();
        app->add_option("--classes", config.classes, "mu-law classes")->capture_default_str();
    }
};

std::map<std::string, UpsampleMode> upsample_modes() {
    return {{"hold", UpsampleMode::hold}, {"linear", UpsampleMode::linear}};
}

SamplingMode sampling_mode(const std::string& name, double temperature) {
    if (name == "categorical") return SamplingMode::categorical();
    if (name == "argmax") return SamplingMode::argmax();
    return SamplingMode::with_temperature(temperature);
}

void add_estimator_flags(CLI::App* app, F0EstimatorConfig& cfg) {
    app->add_option("--f0-min", cfg.f0_min, "Lowest f0 searched (Hz)")->capture_default_str();
    app->add_option("--f0-max", cfg.f0_max, "Highest f0 searched (Hz)")->capture_default_str();
    app->add_option("--voicing-threshold", cfg.voicing_threshold,
                    "Minimum normalized autocorrelation peak for a voiced frame")
        ->capture_default_str();
    app->add_option("--energy-threshold", cfg.energy_threshold, "Minimum frame RMS for a voiced frame")
        ->capture_default_str();
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
    std::string corpus, out, resume;
    ModelFlags model;
    TrainOptions options;
    UpsampleMode upsample = UpsampleMode::hold;
    F0EstimatorConfig estimator;
    std::uint64_t log_every = 100;
};

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    const std::vector<CorpusEntry> entries = discover_corpus(a.corpus, err);
    if (entries.empty()) throw DataError("no <name>.wav / <name>.ppg.vcf1 pairs in " + a.corpus);
    TrainOptions options = a.options;
    options.out_dir = a.out;
    options.resume_from = a.resume;
    options.trainer.model = a.model.config;
    std::vector<Utterance> corpus;
    for (const CorpusEntry& e : entries) {
        const WaveformSignal audio = read_wav(e.wav_path);
        const ConditioningTrack track = load_track(e, audio, a.estimator);
        if (corpus.empty()) options.trainer.model.ppg_dim = track.ppg_dim();
        if (track.ppg_dim() != options.trainer.model.ppg_dim)
            throw DataError(e.name + ": PPG dimension " + std::to_string(track.ppg_dim()) + " differs from " +
                            std::to_string(options.trainer.model.ppg_dim) + " in the rest of the corpus");
        corpus.push_back(prepare_utterance(e.name, audio, track, options.trainer.model.mulaw(), a.upsample));
    }
    out << "corpus: " << corpus.size() << " utterances, receptive field "
        << receptive_field(options.trainer.model) << " samples, "
        << zero_params(options.trainer.model).parameter_count() << " parameters\n";
    options.on_report = [&](const TrainReport& r) {
        if (r.step % a.log_every == 0 || r.step == options.steps)
            out << "step " << r.step << "  loss " << fmt("%.4f", r.loss) << "  accuracy "
                << fmt("%.4f", r.accuracy) << "  " << fmt("%.2f", r.seconds) << " s\n"
                << std::flush;
    };
    const std::string last = train(std::move(corpus), options);
    out << "checkpoint: " << last << "\n";
    return 0;
}

// ---- convert -------------------------------------------------------------

struct ConvertArgs {
    std::string wav, ppg, ckpt, target_stats, source_stats, out;
    std::string mode = "categorical";
    double temperature = 1.0;
    ConvertOptions options;
};

int run_convert(const ConvertArgs& a, std::ostream& out, std::ostream&) {
    const ModelParams params = load_checkpoint(a.ckpt);
    const F0Stats target = read_f0_stats(a.target_stats);
    ConvertOptions options = a.options;
    options.mode = sampling_mode(a.mode, a.temperature);
    if (!a.source_stats.empty()) options.source_stats = read_f0_stats(a.source_stats);
    const WaveformSignal source = read_wav(a.wav);
    Tensor ppg = read_ppg(a.ppg);
    if (ppg.dim(0) != params.config.ppg_dim)
        throw DataError(a.ppg + " has PPG dimension " + std::to_string(ppg.dim(0)) + " but " + a.ckpt +
                        " expects PPG dimension " + std::to_string(params.config.ppg_dim));
    const auto t0 = std::chrono::steady_clock::now();
    const ConversionResult result = convert(source, std::move(ppg), params, target, options);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_wav(a.out, result.audio);
    out << a.out << ": " << result.audio.samples.size() << " samples (" << fmt("%.3f", result.audio.duration_seconds())
        << " s) in " << fmt("%.2f", seconds) << " s\n";
    return 0;
}

// ---- f0-stats ------------------------------------------------------------

int run_f0_stats(const std::string& corpus, const std::string& path, const F0EstimatorConfig& estimator,
                 std::ostream& out, std::ostream&) {
    std::error_code ec;
    if (!fs::is_directory(corpus, ec)) throw DataError("corpus directory not found: " + corpus);
    std::vector<fs::path> wavs;
    for (const auto& e : fs::directory_iterator(corpus))
        if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
    std::sort(wavs.begin(), wavs.end());
    if (wavs.empty()) throw DataError("no .wav files in " + corpus);
    std::vector<std::vector<double>> tracks;
    for (const fs::path& w : wavs) {
        const fs::path f0_file = fs::path(w).replace_extension(".f0.vcf1");
        if (fs::exists(f0_file)) {
            const Tensor t = read_vcf1(f0_file.string());
            tracks.emplace_back(t.values().begin(), t.values().end());
        } else {
            tracks.push_back(estimate_f0_vuv(read_wav(w.string()), estimator).f0);
        }
    }
    const F0Stats stats = f0_statistics(std::span<const std::vector<double>>(tracks));
    write_f0_stats(path, stats);
    out << path << ": mu=" << fmt("%.6f", stats.mu) << " sigma=" << fmt("%.6f", stats.sigma) << " over "
        << stats.frame_count << " voiced frames from " << wavs.size() << " files\n";
    return 0;
}

// ---- features ------------------------------------------------------------

int run_features(const std::string& wav, const std::string& out_f0, const std::string& out_vuv,
                 const F0EstimatorConfig& estimator, std::ostream& out) {
    const PitchTrack p = estimate_f0_vuv(read_wav(wav), estimator);
    Tensor f0({p.f0.size(), 1}), vuv({p.vuv.size(), 1});
    std::size_t voiced = 0;
    for (std::size_t n = 0; n < p.f0.size(); ++n) {
        f0[n] = p.f0[n];
        vuv[n] = p.vuv[n];
        voiced += p.vuv[n];
    }
    write_vcf1(out_f0, f0);
    write_vcf1(out_vuv, vuv);
    out << wav << ": " << p.f0.size() << " frames, " << voiced << " voiced\n";
    return 0;
}

// ---- evaluate ------------------------------------------------------------

int run_evaluate(const std::string& target_dir, const std::string& converted_dir, const std::string& report_path,
                 std::size_t threads, std::ostream& out, std::ostream& err) {
    const RmseReport report = evaluate_directories(target_dir, converted_dir, threads, err);
    std::ostringstream text, tsv;
    write_report_text(text, report);
    write_report_tsv(tsv, report);
    for (const auto& [path, body] : {std::pair{report_path, text.str()}, std::pair{report_path + ".tsv", tsv.str()}}) {
        std::ofstream file(path);
        if (!(file << body)) throw DataError("cannot write " + path);
    }
    out << text.str();
    return 0;
}

// ---- gen-bench -----------------------------------------------------------

struct BenchArgs {
    std::string ckpt;
    std::int64_t samples = 16000;
    std::uint64_t seed = 0;
    bool naive = false;
    std::string mode = "categorical";
    double temperature = 1.0;
};

int run_gen_bench(const BenchArgs& a, std::ostream& out) {
    if (a.samples <= 0) throw std::invalid_argument("--samples must be positive");
    const ModelParams params = load_checkpoint(a.ckpt);
    const SamplingMode mode = sampling_mode(a.mode, a.temperature);
    Tensor h({params.config.conditioning_channels(), static_cast<std::size_t>(a.samples)});
    Rng rng(a.seed);
    for (double& v : h.values()) v = rng.uniform();
    auto time = [&](auto&& generate) {
        const auto t0 = std::chrono::steady_clock::now();
        generate(params, h, a.samples, a.seed, mode);
        return static_cast<double>(a.samples) /
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    out << "fast\t" << fmt("%.6g", time(generate_fast)) << "\n";
    if (a.naive) out << "naive\t" << fmt("%.6g", time(generate_naive)) << "\n";
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"vcwave: voice conversion with a conditional WaveNet", "vcwave"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a model on <name>.wav + <name>.ppg.vcf1 pairs");
    train_cmd->add_option("--corpus", train_args.corpus, "Corpus directory")->required();
    train_cmd->add_option("--out", train_args.out, "Output directory for checkpoints and logs")->required();
    train_cmd->add_option("--steps", train_args.options.steps, "Optimization steps")->capture_default_str();
    train_cmd->add_option("--seed", train_args.options.trainer.seed, "Initialization and batch seed")
        ->capture_default_str();
    train_cmd->add_option("--lr", train_args.options.trainer.learning_rate, "Adam learning rate")
        ->capture_default_str();
    train_cmd->add_option("--batch-samples", train_args.options.trainer.batch_samples, "Target samples per step")
        ->capture_default_str();
    train_cmd->add_option("--segment-samples", train_args.options.trainer.segment_samples, "Segment length")
        ->capture_default_str();
    train_cmd->add_option("--checkpoint-every", train_args.options.checkpoint_every, "Steps between checkpoints")
        ->capture_default_str();
    train_cmd->add_option("--validation-fraction", train_args.options.validation_fraction,
                          "Share of utterances held out for validation")
        ->capture_default_str();
    train_cmd->add_option("--resume", train_args.resume, "Checkpoint to resume from");
    train_cmd->add_option("--threads", train_args.options.trainer.threads, "Worker threads (0: all cores)")
        ->capture_default_str();
    train_cmd->add_option("--log-every", train_args.log_every, "Steps between progress lines")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--upsample", train_args.upsample, "Frame to sample extension")
        ->transform(CLI::CheckedTransformer(upsample_modes(), CLI::ignore_case));
    train_args.model.add(train_cmd);
    add_estimator_flags(train_cmd, train_args.estimator);

    ConvertArgs convert_args;
    auto* convert_cmd = app.add_subcommand("convert", "Convert one utterance with a trained model");
    convert_cmd->add_option("--wav", convert_args.wav, "Source speech")->required();
    convert_cmd->add_option("--ppg", convert_args.ppg, "Source PPG (VCF1)")->required();
    convert_cmd->add_option("--ckpt", convert_args.ckpt, "Target speaker checkpoint")->required();
    convert_cmd->add_option("--target-f0-stats", convert_args.target_stats, "Target speaker f0 statistics")
        ->required();
    convert_cmd->add_option("--source-f0-stats", convert_args.source_stats,
                            "Source speaker statistics (default: computed from this utterance)");
    convert_cmd->add_option("--out", convert_args.out, "Output WAV")->required();
    convert_cmd->add_option("--seed", convert_args.options.seed, "Sampling seed")->capture_default_str();
    convert_cmd->add_option("--mode", convert_args.mode, "Sampling mode")
        ->check(CLI::IsMember({"categorical", "argmax", "temperature"}))
        ->capture_default_str();
    convert_cmd->add_option("--temperature", convert_args.temperature, "Softmax temperature for --mode temperature")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    convert_cmd->add_option("--upsample", convert_args.options.upsample, "Frame to sample extension")
        ->transform(CLI::CheckedTransformer(upsample_modes(), CLI::ignore_case));
    add_estimator_flags(convert_cmd, convert_args.options.estimator);

    std::string stats_corpus, stats_out;
    F0EstimatorConfig stats_estimator;
    auto* stats_cmd = app.add_subcommand("f0-stats", "Log-f0 mean and deviation over a speaker's .wav files");
    stats_cmd->add_option("--corpus", stats_corpus, "Directory of .wav files")->required();
    stats_cmd->add_option("--out", stats_out, "Output statistics file")->required();
    add_estimator_flags(stats_cmd, stats_estimator);

    std::string feat_wav, feat_f0, feat_vuv;
    F0EstimatorConfig feat_estimator;
    auto* feat_cmd = app.add_subcommand("features", "Estimate f0 and voicing every 5 ms");
    feat_cmd->add_option("--wav", feat_wav, "Input WAV")->required();
    feat_cmd->add_option("--out-f0", feat_f0, "f0 track (VCF1, Hz, 0 when unvoiced)")->required();
    feat_cmd->add_option("--out-vuv", feat_vuv, "Voicing track (VCF1, 0/1)")->required();
    add_estimator_flags(feat_cmd, feat_estimator);

    std::string eval_target, eval_converted, eval_report;
    std::size_t eval_threads = 0;
    auto* eval_cmd = app.add_subcommand("evaluate", "Log-spectral RMSE between target and converted speech");
    eval_cmd->add_option("--target-dir", eval_target, "Directory of target .wav files")->required();
    eval_cmd->add_option("--converted-dir", eval_converted, "Directory of converted .wav files")->required();
    eval_cmd->add_option("--report", eval_report, "Report path (a .tsv twin is written next to it)")->required();
    eval_cmd->add_option("--threads", eval_threads, "Worker threads (0: all cores)")->capture_default_str();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("gen-bench", "Generation throughput on random conditioning");
    bench_cmd->add_option("--ckpt", bench.ckpt, "Checkpoint")->required();
    bench_cmd->add_option("--samples", bench.samples, "Samples to generate")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Sampling seed")->capture_default_str();
    bench_cmd->add_flag("--naive", bench.naive, "Also time the reference generator");
    bench_cmd->add_option("--mode", bench.mode, "Sampling mode")
        ->check(CLI::IsMember({"categorical", "argmax", "temperature"}))
        ->capture_default_str();
    bench_cmd->add_option("--temperature", bench.temperature, "Softmax temperature")->capture_default_str();

    if (args.empty()) {
        err << app.help();
        return 1;
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto parsed = app.get_subcommands();
        err << (parsed.empty() ? app.help() : parsed.front()->help());
        return 1;
    }

    try {
        if (train_cmd->parsed()) return run_train(train_args, out, err);
        if (convert_cmd->parsed()) return run_convert(convert_args, out, err);
        if (stats_cmd->parsed()) return run_f0_stats(stats_corpus, stats_out, stats_estimator, out, err);
        if (feat_cmd->parsed()) return run_features(feat_wav, feat_f0, feat_vuv, feat_estimator, out);
        if (eval_cmd->parsed()) return run_evaluate(eval_target, eval_converted, eval_report, eval_threads, out, err);
        if (bench_cmd->parsed()) return run_gen_bench(bench, out);
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    }
    err << app.help();
    return 1;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args, out, err);
}

}  // namespace vcwave::cli
