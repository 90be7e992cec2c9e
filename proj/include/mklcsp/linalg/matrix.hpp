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
#include <vector>

namespace mklcsp {

/// Dense row-major double matrix.  Small and deliberately minimal: the
/// toolkit works with channel counts and trial counts in the hundreds, so
/// clarity wins over blocking tricks.  Inner loops route through the simd
/// primitives.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] double* row(std::size_t r) { return data_.data() + r * cols_; }
    [[nodiscard]] const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    [[nodiscard]] double* data() { return data_.data(); }
    [[nodiscard]] const double* data() const { return data_.data(); }

    [[nodiscard]] bool all_finite() const;

    /// this += c * other (same shape required).
    void add_scaled(const Matrix& other, double c);

    /// this *= c.
    void scale(double c);

    [[nodiscard]] std::vector<double> column(std::size_t c) const;
    void set_column(std::size_t c, const std::vector<double>& v);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a * b.
Matrix matmul(const Matrix& a, const Matrix& b);

/// a * b^T (dot products of rows; the cheap orientation for row-major data).
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// a^T * b.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

double frobenius_norm(const Matrix& m);

/// max_ij |a_ij - b_ij| (same shape required).
double max_abs_diff(const Matrix& a, const Matrix& b);

} // namespace mklcsp
