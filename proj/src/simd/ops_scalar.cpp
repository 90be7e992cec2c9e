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

#include "mklcsp/simd/ops.hpp"

// Reference kernels.  Plain loops, no pragmas: these define the semantics
// the vectorized variants are tested against.

namespace mklcsp::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double c, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += c * x[i];
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i];
    return acc;
}

double sumsq_centered_scalar(const double* x, std::size_t n, double mean) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        acc += d * d;
    }
    return acc;
}

void scale_scalar(double* x, std::size_t n, double c) {
    for (std::size_t i = 0; i < n; ++i)
        x[i] *= c;
}

} // namespace

namespace detail {

const OpsTable scalar_table = {
    dot_scalar,
    axpy_scalar,
    sum_scalar,
    sumsq_centered_scalar,
    scale_scalar,
};

} // namespace detail
} // namespace mklcsp::simd
