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
#include "cli.h"
#include "vcwave/audio.h"
#include "vcwave/checkpoint.h"
#include "vcwave/features.h"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vcwave;
using vcwave::testing::TempDir;
using vcwave::testing::tone_sequence;
using vcwave::testing::tone_track;
using vcwave::testing::write_pair;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    const Run none = run({});
    CHECK(none.code == 1);
    CHECK(none.err.find("Usage") != std::string::npos);
    CHECK(run({"nonsense"}).code == 1);
    CHECK(run({"evaluate", "--target-dir", "x"}).code == 1);
    CHECK(run({"train", "--corpus", "a", "--out", "b", "--steps", "many"}).code == 1);
    const Run help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("convert") != std::string::npos);
}

TEST_CASE("evaluate a directory against itself") {
    TempDir dir("cli");
    write_wav(dir / "a.wav", tone_sequence({50, 70}, 4000));
    write_wav(dir / "b.wav", tone_sequence({90}, 6000, 0.2));
    const Run r = run({"evaluate", "--target-dir", dir.path().string(), "--converted-dir", dir.path().string(),
                       "--report", dir / "report.txt"});
    CHECK(r.code == 0);
    std::ifstream tsv(dir / "report.txt.tsv");
    std::string line, last;
    while (std::getline(tsv, line)) last = line;
    CHECK(last.rfind("corpus\t", 0) == 0);
    CHECK(std::stod(last.substr(last.rfind('\t') + 1)) == 0.0);
    CHECK(std::filesystem::exists(dir / "report.txt"));
}

TEST_CASE("missing inputs are data errors") {
    TempDir dir("cli");
    CHECK(run({"evaluate", "--target-dir", dir / "nope", "--converted-dir", dir / "nope", "--report",
               dir / "r.txt"})
              .code == 2);
    CHECK(run({"features", "--wav", dir / "missing.wav", "--out-f0", dir / "f.vcf1", "--out-vuv", dir / "v.vcf1"})
              .code == 2);
    CHECK(run({"f0-stats", "--corpus", dir.path().string(), "--out", dir / "s.txt"}).code == 2);
}

TEST_CASE("features writes frame tracks") {
    TempDir dir("cli");
    const WaveformSignal w = tone_sequence({80}, 8000);
    write_wav(dir / "x.wav", w);
    const Run r = run({"features", "--wav", dir / "x.wav", "--out-f0", dir / "x.f0.vcf1", "--out-vuv",
                       dir / "x.vuv.vcf1"});
    REQUIRE(r.code == 0);
    const PitchTrack expected = estimate_f0_vuv(read_wav(dir / "x.wav"));
    const Tensor f0 = read_vcf1(dir / "x.f0.vcf1"), vuv = read_vcf1(dir / "x.vuv.vcf1");
    REQUIRE(f0.shape() == Shape{expected.f0.size(), 1});
    for (std::size_t n = 0; n < expected.f0.size(); ++n) {
        CHECK(f0[n] == static_cast<double>(static_cast<float>(expected.f0[n])));
        CHECK(vuv[n] == expected.vuv[n]);
    }
}

TEST_CASE("f0-stats pools every utterance") {
    TempDir dir("cli");
    write_wav(dir / "a.wav", tone_sequence({80}, 8000));
    write_wav(dir / "b.wav", tone_sequence({100, 64}, 4000));
    const Run r = run({"f0-stats", "--corpus", dir.path().string(), "--out", dir / "s.txt"});
    REQUIRE(r.code == 0);
    const std::vector<double> tracks[] = {estimate_f0_vuv(read_wav(dir / "a.wav")).f0,
                                          estimate_f0_vuv(read_wav(dir / "b.wav")).f0};
    const F0Stats expected = f0_statistics(std::span<const std::vector<double>>(tracks));
    const F0Stats got = read_f0_stats(dir / "s.txt");
    CHECK(got.mu == expected.mu);
    CHECK(got.sigma == expected.sigma);
}

TEST_CASE("train, convert and bench through the command line") {
    TempDir corpus("cli"), out("cli");
    const std::vector<int> periods{60, 90};
    write_pair(corpus.path(), "u1", tone_sequence(periods, 1600), tone_track(periods, 1600, 3));
    write_pair(corpus.path(), "u2", tone_sequence({75}, 3200), tone_track({75}, 3200, 3));
    std::ofstream(corpus / "stray.wav") << "";

    const std::vector<std::string> train_args{"train", "--corpus", corpus.path().string(), "--out",
                                              out.path().string(), "--steps", "3", "--blocks", "1", "--layers", "3",
                                              "--residual-channels", "4", "--skip-channels", "4", "--classes", "32",
                                              "--batch-samples", "400", "--segment-samples", "200",
                                              "--validation-fraction", "0", "--threads", "1"};
    const Run t = run(train_args);
    INFO(t.err);
    REQUIRE(t.code == 0);
    CHECK(t.err.find("stray") != std::string::npos);
    const std::string ckpt = out / "ckpt_00000003.vckp";
    REQUIRE(std::filesystem::exists(ckpt));
    CHECK(read_checkpoint_config(ckpt).ppg_dim == 3);
    std::ifstream log(out / "train.log");
    std::size_t lines = 0;
    for (std::string l; std::getline(log, l);) ++lines;
    CHECK(lines == 3);

    write_f0_stats(out / "target.txt", F0Stats{std::log(200.0), 0.1, 0});
    const std::vector<std::string> convert_args{"convert",
                                                "--wav", corpus / "u1.wav",
                                                "--ppg", corpus / "u1.ppg.vcf1",
                                                "--ckpt", ckpt,
                                                "--target-f0-stats", out / "target.txt",
                                                "--out", out / "c.wav",
                                                "--seed", "5"};
    const Run c = run(convert_args);
    INFO(c.err);
    REQUIRE(c.code == 0);
    const WaveformSignal converted = read_wav(out / "c.wav");
    CHECK(converted.samples.size() == 40 * 80);
    auto again = convert_args;
    again.back() = "5";
    again[again.size() - 3] = out / "d.wav";
    REQUIRE(run(again).code == 0);
    CHECK(read_wav(out / "d.wav").samples == converted.samples);

    auto missing_stats = convert_args;
    missing_stats[8] = out / "no_stats.txt";
    CHECK(run(missing_stats).code == 2);

    write_vcf1(out / "wide.ppg.vcf1", Tensor({40, 7}));
    auto wide = convert_args;
    wide[4] = out / "wide.ppg.vcf1";
    const Run w = run(wide);
    CHECK(w.code == 2);
    CHECK(w.err.find("dimension 7") != std::string::npos);
    CHECK(w.err.find("dimension 3") != std::string::npos);

    auto resume = train_args;
    resume[6] = "5";
    resume.push_back("--resume");
    resume.push_back(ckpt);
    CHECK(run(resume).code == 0);
    CHECK(std::filesystem::exists(out / "ckpt_00000005.vckp"));

    auto mismatch = resume;
    mismatch[14] = "8";
    CHECK(run(mismatch).code == 2);

    const Run b = run({"gen-bench", "--ckpt", ckpt, "--samples", "300", "--naive"});
    REQUIRE(b.code == 0);
    CHECK(b.out.rfind("fast\t", 0) == 0);
    CHECK(b.out.find("\nnaive\t") != std::string::npos);
}
