// Copyright 2026-present the mklcsp project
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

#include <string>
#include <vector>

#include "mklcsp/linalg/matrix.hpp"

namespace mklcsp::kernels {

/// Symmetric Gram matrix over training examples.  norm_factor records the
/// average-diagonal divisor applied to it (1 when unnormalized); test
/// cross-kernels must be divided by the same factor.
struct KernelMatrix {
    Matrix k;
    double norm_factor = 1.0;

    [[nodiscard]] std::size_t size() const { return k.rows(); }
};

/// Per-view kernels over one training set, all the same size, in the same
/// order as the feature blocks that produced them.
struct KernelStack {
    std::vector<KernelMatrix> kernels;
    std::vector<std::string> view_ids;

    [[nodiscard]] std::size_t views() const { return kernels.size(); }
};

/// Linear kernel K[i][j] = <row_i, row_j> over examples stored as rows.
KernelMatrix linear_kernel(const Matrix& features);

/// Divide by the average diagonal value so that mean(diag) == 1; the
/// factor is recorded on the result.  An average diagonal below 1e-300 is
/// a degenerate kernel.
KernelMatrix normalize_avg_diag(const KernelMatrix& k);

/// Test-against-training kernel (t x n), divided by the training kernel's
/// norm factor.  Feature dimensions must agree.
Matrix cross_kernel(const Matrix& train_features, const Matrix& test_features,
                    double norm_factor);

} // namespace mklcsp::kernels
