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

#include <cstddef>
#include <string_view>

// Data-parallel double-precision primitives used by the covariance, Gram
// matrix, feature and SVM inner loops.  A scalar reference implementation
// is always available; on x86-64 an AVX2+FMA variant is compiled in and
// selected at runtime when the CPU supports it.  The active backend can be
// overridden programmatically or through the MKLCSP_SIMD environment
// variable ("scalar", "avx2" or "auto").

namespace mklcsp::simd {

enum class Backend {
    scalar,
    avx2,
};

struct OpsTable {
    // dot(a, b, n)            -> sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // axpy(c, x, y, n)        -> y[i] += c*x[i]
    void (*axpy)(double c, const double* x, double* y, std::size_t n);
    // sum(x, n)               -> sum_i x[i]
    double (*sum)(const double* x, std::size_t n);
    // sumsq_centered(x, n, m) -> sum_i (x[i]-m)^2
    double (*sumsq_centered)(const double* x, std::size_t n, double mean);
    // scale(x, n, c)          -> x[i] *= c
    void (*scale)(double* x, std::size_t n, double c);
};

/// Table of the currently selected backend.
const OpsTable& ops();

/// Backend used by ops().
Backend active_backend();

/// True when the backend is both compiled in and usable on this CPU.
bool backend_available(Backend b);

/// Select a backend explicitly.  Throws ParameterError if unavailable.
void select_backend(Backend b);

/// Select by name: "scalar", "avx2" or "auto".  Throws ParameterError on
/// unknown names or unavailable backends.
void select_backend(std::string_view name);

const char* backend_name(Backend b);

inline double dot(const double* a, const double* b, std::size_t n) {
    return ops().dot(a, b, n);
}

inline void axpy(double c, const double* x, double* y, std::size_t n) {
    ops().axpy(c, x, y, n);
}

inline double sum(const double* x, std::size_t n) {
    return ops().sum(x, n);
}

inline double sumsq_centered(const double* x, std::size_t n, double mean) {
    return ops().sumsq_centered(x, n, mean);
}

inline void scale(double* x, std::size_t n, double c) {
    ops().scale(x, n, c);
}

namespace detail {
extern const OpsTable scalar_table;
// Null when AVX2 support was not compiled in.
const OpsTable* avx2_table();
} // namespace detail

} // namespace mklcsp::simd
