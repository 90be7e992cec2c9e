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

#include "mklcsp/linalg/matrix.hpp"

#include <cmath>

#include "mklcsp/errors.hpp"
#include "mklcsp/simd/ops.hpp"

namespace mklcsp {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v))
            return false;
    return true;
}

void Matrix::add_scaled(const Matrix& other, double c) {
    if (other.rows_ != rows_ || other.cols_ != cols_)
        throw DimensionError("add_scaled: shape mismatch");
    simd::axpy(c, other.data_.data(), data_.data(), data_.size());
}

void Matrix::scale(double c) {
    simd::scale(data_.data(), data_.size(), c);
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> v(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        v[r] = (*this)(r, c);
    return v;
}

void Matrix::set_column(std::size_t c, const std::vector<double>& v) {
    if (v.size() != rows_)
        throw DimensionError("set_column: length mismatch");
    for (std::size_t r = 0; r < rows_; ++r)
        (*this)(r, c) = v[r];
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw DimensionError("matmul_nt: inner dimension mismatch");
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j)
            out(i, j) = simd::dot(a.row(i), b.row(j), a.cols());
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimension mismatch");
    // Accumulate rows of b scaled by a's entries; keeps the inner loop
    // contiguous for row-major storage.
    Matrix out(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* dst = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k)
            simd::axpy(a(i, k), b.row(k), dst, b.cols());
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw DimensionError("matmul_tn: inner dimension mismatch");
    Matrix out(a.cols(), b.cols(), 0.0);
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i)
            simd::axpy(a(k, i), brow, out.row(i), b.cols());
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(c, r) = m(r, c);
    return out;
}

double frobenius_norm(const Matrix& m) {
    return std::sqrt(simd::dot(m.data(), m.data(), m.size()));
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("max_abs_diff: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::fabs(a.data()[i] - b.data()[i]));
    return worst;
}

} // namespace mklcsp
