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

#include "mklcsp/kernels/gram.hpp"

#include "mklcsp/errors.hpp"
#include "mklcsp/simd/ops.hpp"

namespace mklcsp::kernels {

KernelMatrix linear_kernel(const Matrix& features) {
    if (features.rows() == 0)
        throw ParameterError("linear_kernel: no examples");
    const std::size_t n = features.rows();
    KernelMatrix out;
    out.k = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = simd::dot(features.row(i), features.row(j), features.cols());
            out.k(i, j) = v;
            out.k(j, i) = v;
        }
    out.norm_factor = 1.0;
    return out;
}

KernelMatrix normalize_avg_diag(const KernelMatrix& k) {
    const std::size_t n = k.size();
    if (n == 0)
        throw ParameterError("normalize_avg_diag: empty kernel");
    double avg = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        avg += k.k(i, i);
    avg /= static_cast<double>(n);
    if (avg <= 1e-300)
        throw DegenerateInputError("normalize_avg_diag: average diagonal is " +
                                   std::to_string(avg) + "; kernel is degenerate");
    KernelMatrix out;
    out.k = Matrix(n, n);
    for (std::size_t i = 0; i < n * n; ++i)
        out.k.data()[i] = k.k.data()[i] / avg;
    out.norm_factor = k.norm_factor * avg;
    return out;
}

Matrix cross_kernel(const Matrix& train_features, const Matrix& test_features,
                    double norm_factor) {
    if (train_features.cols() != test_features.cols())
        throw DimensionError("cross_kernel: feature dimension mismatch");
    if (!(norm_factor > 0.0))
        throw ParameterError("cross_kernel: norm factor must be positive");
    Matrix out(test_features.rows(), train_features.rows());
    for (std::size_t t = 0; t < test_features.rows(); ++t)
        for (std::size_t i = 0; i < train_features.rows(); ++i)
            out(t, i) = simd::dot(test_features.row(t), train_features.row(i),
                                  train_features.cols()) /
                        norm_factor;
    return out;
}

} // namespace mklcsp::kernels
