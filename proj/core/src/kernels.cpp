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

#include "vcwave/errors.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace vcwave::kernels {

namespace {

// Scalar reference path; also handles ragged edges of the vector path.
void gemm_acc_scalar(std::size_t m, std::size_t n, std::size_t k, StridedMatrix a, const double* b,
                     std::size_t ldb, double* c, std::size_t ldc) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * ldc;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = a(i, kk);
            const double* brow = b + kk * ldb;
            for (std::size_t j = 0; j < n; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
        }
    }
}

#if defined(__AVX512F__)

constexpr std::size_t kTileRows = 6;
constexpr std::size_t kTileVecs = 4;
constexpr std::size_t kLanes = 8;

// acc[r][v] covers C rows r, columns 8v..8v+7. `panel` is A packed as
// [k][rows] so the broadcasts walk memory linearly.
template <std::size_t Rows, std::size_t Vecs>
inline void tile(std::size_t k, const double* panel, std::size_t panel_ld, const double* b, std::size_t ldb,
                 double* c, std::size_t ldc) {
    __m512d acc[Rows][Vecs];
    for (std::size_t r = 0; r < Rows; ++r)
        for (std::size_t v = 0; v < Vecs; ++v) acc[r][v] = _mm512_loadu_pd(c + r * ldc + kLanes * v);
    for (std::size_t kk = 0; kk < k; ++kk) {
        const double* brow = b + kk * ldb;
        __m512d bv[Vecs];
        for (std::size_t v = 0; v < Vecs; ++v) bv[v] = _mm512_loadu_pd(brow + kLanes * v);
        const double* arow = panel + kk * panel_ld;
        for (std::size_t r = 0; r < Rows; ++r) {
            const __m512d av = _mm512_set1_pd(arow[r]);
            for (std::size_t v = 0; v < Vecs; ++v) acc[r][v] = _mm512_fmadd_pd(av, bv[v], acc[r][v]);
        }
    }
    for (std::size_t r = 0; r < Rows; ++r)
        for (std::size_t v = 0; v < Vecs; ++v) _mm512_storeu_pd(c + r * ldc + kLanes * v, acc[r][v]);
}

template <std::size_t Rows>
void row_block(std::size_t n, std::size_t k, const double* panel, std::size_t panel_ld, const double* b,
               std::size_t ldb, double* c, std::size_t ldc) {
    constexpr std::size_t wide = kLanes * kTileVecs;
    std::size_t j = 0;
    for (; j + wide <= n; j += wide) tile<Rows, kTileVecs>(k, panel, panel_ld, b + j, ldb, c + j, ldc);
    for (; j + kLanes <= n; j += kLanes) tile<Rows, 1>(k, panel, panel_ld, b + j, ldb, c + j, ldc);
    if (j < n) {
        for (std::size_t r = 0; r < Rows; ++r) {
            double* crow = c + r * ldc;
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double av = panel[kk * panel_ld + r];
                const double* brow = b + kk * ldb;
                for (std::size_t jj = j; jj < n; ++jj) crow[jj] = std::fma(av, brow[jj], crow[jj]);
            }
        }
    }
}

#endif

}  // namespace

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, StridedMatrix a, const double* b, std::size_t ldb,
              double* c, std::size_t ldc) {
    if (m == 0 || n == 0 || k == 0) return;
#if defined(__AVX512F__)
    if (n < kLanes) {
        gemm_acc_scalar(m, n, k, a, b, ldb, c, ldc);
        return;
    }
    std::vector<double> panel(k * kTileRows);
    std::size_t i = 0;
    for (; i + kTileRows <= m; i += kTileRows) {
        for (std::size_t kk = 0; kk < k; ++kk)
            for (std::size_t r = 0; r < kTileRows; ++r) panel[kk * kTileRows + r] = a(i + r, kk);
        row_block<kTileRows>(n, k, panel.data(), kTileRows, b, ldb, c + i * ldc, ldc);
    }
    for (; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) panel[kk] = a(i, kk);
        row_block<1>(n, k, panel.data(), 1, b, ldb, c + i * ldc, ldc);
    }
#else
    gemm_acc_scalar(m, n, k, a, b, ldb, c, ldc);
#endif
}

void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t len, const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double* c, std::size_t c_row, std::size_t c_col) {
    if (m == 0 || n == 0) return;
    auto dot = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        const double* ar = a + i * lda;
        const double* br = b + j * ldb;
        for (std::size_t t = 0; t < len; ++t) s = std::fma(ar[t], br[t], s);
        return s;
    };
#if defined(__AVX512F__)
    auto hsum = [](__m512d v) {
        alignas(64) double t[8];
        _mm512_store_pd(t, v);
        return ((t[0] + t[1]) + (t[2] + t[3])) + ((t[4] + t[5]) + (t[6] + t[7]));
    };
    constexpr std::size_t B = 4;
    std::size_t i = 0;
    for (; i + B <= m; i += B) {
        std::size_t j = 0;
        for (; j + B <= n; j += B) {
            __m512d acc[B][B];
            for (auto& row : acc)
                for (auto& v : row) v = _mm512_setzero_pd();
            std::size_t t = 0;
            for (; t + kLanes <= len; t += kLanes) {
                __m512d av[B], bv[B];
                for (std::size_t r = 0; r < B; ++r) av[r] = _mm512_loadu_pd(a + (i + r) * lda + t);
                for (std::size_t s = 0; s < B; ++s) bv[s] = _mm512_loadu_pd(b + (j + s) * ldb + t);
                for (std::size_t r = 0; r < B; ++r)
                    for (std::size_t s = 0; s < B; ++s) acc[r][s] = _mm512_fmadd_pd(av[r], bv[s], acc[r][s]);
            }
            for (std::size_t r = 0; r < B; ++r) {
                for (std::size_t s = 0; s < B; ++s) {
                    double v = hsum(acc[r][s]);
                    const double* ar = a + (i + r) * lda;
                    const double* br = b + (j + s) * ldb;
                    for (std::size_t tt = t; tt < len; ++tt) v = std::fma(ar[tt], br[tt], v);
                    c[(i + r) * c_row + (j + s) * c_col] += v;
                }
            }
        }
        for (; j < n; ++j)
            for (std::size_t r = 0; r < B; ++r) c[(i + r) * c_row + j * c_col] += dot(i + r, j);
    }
    for (; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * c_row + j * c_col] += dot(i, j);
#else
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * c_row + j * c_col] += dot(i, j);
#endif
}

void matvec_t_acc(std::size_t m, std::size_t k, const double* at, const double* x, double* y) {
    for (std::size_t kk = 0; kk < k; ++kk) {
        const double xv = x[kk];
        const double* row = at + kk * m;
        for (std::size_t i = 0; i < m; ++i) y[i] = std::fma(row[i], xv, y[i]);
    }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace vcwave::kernels

namespace vcwave {

void conv1d_causal_acc(const Tensor& input, const Tensor& weights, std::size_t dilation, Tensor& out) {
    const std::size_t cin = input.dim(0), steps = input.dim(1);
    const std::size_t cout = weights.dim(0), taps = weights.dim(2);
    for (std::size_t tap = 0; tap < taps; ++tap) {
        const std::size_t shift = (taps - 1 - tap) * dilation;
        if (shift >= steps) continue;
        const kernels::StridedMatrix w{weights.data() + tap, cin * taps, taps};
        kernels::gemm_acc(cout, steps - shift, cin, w, input.data(), steps, out.data() + shift, steps);
    }
}

Tensor conv1d_causal(const Tensor& input, const Tensor& weights, const Tensor& bias, std::size_t dilation) {
    if (input.rank() != 2 || weights.rank() != 3 || bias.rank() != 1)
        throw std::invalid_argument("conv1d_causal: expected input [C_in x T], weights [C_out x C_in x K], bias [C_out]");
    if (weights.dim(1) != input.dim(0))
        throw std::invalid_argument("conv1d_causal: weights expect " + std::to_string(weights.dim(1)) +
                                    " input channels, input has " + std::to_string(input.dim(0)));
    if (bias.dim(0) != weights.dim(0))
        throw std::invalid_argument("conv1d_causal: bias length does not match output channels");
    if (weights.dim(2) < 1) throw std::invalid_argument("conv1d_causal: kernel size must be >= 1");
    if (dilation < 1) throw std::invalid_argument("conv1d_causal: dilation must be >= 1");
    require_finite(input, "conv1d_causal input");
    require_finite(weights, "conv1d_causal weights");
    require_finite(bias, "conv1d_causal bias");

    const std::size_t cout = weights.dim(0), steps = input.dim(1);
    Tensor out({cout, steps});
    for (std::size_t o = 0; o < cout; ++o) std::fill(out.row(o), out.row(o) + steps, bias[o]);
    conv1d_causal_acc(input, weights, dilation, out);
    return out;
}

}  // namespace vcwave
