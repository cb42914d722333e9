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

#include "vcwave/tensor.h"

#include <cstddef>

// Dense kernels shared by training, teacher-forced inference and incremental
// generation.
//
// Accumulation order contract: every output element of gemm_acc and
// matvec_t_acc is updated as c = fma(a[i][k], b[k][j], c) for k = 0, 1, ...
// in ascending order, whatever the blocking or vector width. This is what lets
// the cached generator reproduce the full re-convolution bit for bit.
namespace vcwave::kernels {

// Read-only matrix view with arbitrary element strides; a transposed or
// tap-sliced weight tensor is just a different pair of strides.
struct StridedMatrix {
    const double* data;
    std::size_t row_stride;
    std::size_t col_stride;

    double operator()(std::size_t r, std::size_t c) const { return data[r * row_stride + c * col_stride]; }
};

// C[m x n] += A[m x k] * B[k x n]. B and C are row-major with leading
// dimensions ldb/ldc.
void gemm_acc(std::size_t m, std::size_t n, std::size_t k, StridedMatrix a, const double* b, std::size_t ldb,
              double* c, std::size_t ldc);

// C(i, j) += sum_t A[i][t] * B[j][t] for t in [0, len). C is addressed as
// c[i * c_row + j * c_col]. Used for weight gradients.
void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t len, const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double* c, std::size_t c_row, std::size_t c_col);

// y[m] += At^T x, with At stored row-major as [k x m]. Same per-element
// order as gemm_acc with n == 1.
void matvec_t_acc(std::size_t m, std::size_t k, const double* at, const double* x, double* y);

double sigmoid(double x);

}  // namespace vcwave::kernels

namespace vcwave {

// Dilated causal 1-D convolution. input [C_in x T], weights [C_out x C_in x K],
// bias [C_out]. Tap K-1 reads the current sample, tap k reads
// t - (K-1-k) * dilation; reads before t = 0 see zeros, so the output keeps
// length T.
Tensor conv1d_causal(const Tensor& input, const Tensor& weights, const Tensor& bias, std::size_t dilation);

// Accumulates one dilated causal convolution into `out` ([C_out x T]) without
// bias; shared by conv1d_causal and the network forward passes.
void conv1d_causal_acc(const Tensor& input, const Tensor& weights, std::size_t dilation, Tensor& out);

}  // namespace vcwave
