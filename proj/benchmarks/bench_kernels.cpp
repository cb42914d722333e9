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

#include "vcwave/kernels.h"
#include "vcwave/rng.h"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    vcwave::Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

void BM_GemmAcc(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0)), k = m, n = static_cast<std::size_t>(state.range(1));
    const auto a = random_vector(m * k, 1), b = random_vector(k * n, 2);
    std::vector<double> c(m * n);
    for (auto _ : state) {
        vcwave::kernels::gemm_acc(m, n, k, {a.data(), k, 1}, b.data(), n, c.data(), n);
        benchmark::DoNotOptimize(c.data());
    }
    state.counters["GFLOPS"] = benchmark::Counter(2.0 * m * n * k, benchmark::Counter::kIsIterationInvariantRate,
                                                  benchmark::Counter::kIs1000);
}
BENCHMARK(BM_GemmAcc)->Args({64, 2000})->Args({512, 512})->Args({256, 4000});

void BM_GemmNtAcc(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0)), len = static_cast<std::size_t>(state.range(1));
    const auto a = random_vector(m * len, 3), b = random_vector(m * len, 4);
    std::vector<double> c(m * m);
    for (auto _ : state) {
        vcwave::kernels::gemm_nt_acc(m, m, len, a.data(), len, b.data(), len, c.data(), m, 1);
        benchmark::DoNotOptimize(c.data());
    }
    state.counters["GFLOPS"] = benchmark::Counter(2.0 * m * m * len, benchmark::Counter::kIsIterationInvariantRate,
                                                  benchmark::Counter::kIs1000);
}
BENCHMARK(BM_GemmNtAcc)->Args({64, 2000})->Args({512, 1000});

void BM_MatvecT(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0)), k = static_cast<std::size_t>(state.range(1));
    const auto at = random_vector(m * k, 5), x = random_vector(k, 6);
    std::vector<double> y(m);
    for (auto _ : state) {
        vcwave::kernels::matvec_t_acc(m, k, at.data(), x.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    state.counters["GFLOPS"] = benchmark::Counter(2.0 * m * k, benchmark::Counter::kIsIterationInvariantRate,
                                                  benchmark::Counter::kIs1000);
}
BENCHMARK(BM_MatvecT)->Args({1024, 512})->Args({128, 64});

}  // namespace
