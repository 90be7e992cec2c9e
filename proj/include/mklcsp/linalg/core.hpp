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

#include <vector>

#include "mklcsp/linalg/matrix.hpp"

namespace mklcsp::linalg {

/// Symmetric covariance matrix.  Construction validates finiteness and
/// symmetry (relative tolerance 1e-12) and then mirrors the lower triangle
/// so the stored data is exactly symmetric.
class CovMatrix {
public:
    CovMatrix() = default;
    explicit CovMatrix(Matrix m);

    [[nodiscard]] std::size_t dim() const { return m_.rows(); }
    [[nodiscard]] const Matrix& matrix() const { return m_; }

    double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

private:
    Matrix m_;
};

/// Zero-mean-or-not Gaussian described by mean and covariance.
struct Gaussian {
    std::vector<double> mean;
    CovMatrix covariance;

    Gaussian(std::vector<double> mu, CovMatrix cov);
};

/// Solution of the symmetric-definite generalized eigenproblem
/// c1 * w = lambda * c2 * w.  Eigenvalues are sorted descending (ties keep
/// their pre-sort order); eigenvector k is column k of `eigenvectors` and
/// satisfies w^T c2 w = 1.  Each column is sign-fixed so that its
/// largest-magnitude entry is positive.
struct GenEigResult {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

/// Eigendecomposition of a symmetric matrix (cyclic Jacobi).  Eigenvalues
/// sorted descending; eigenvectors are the orthonormal columns of v.
struct SymEigResult {
    std::vector<double> eigenvalues;
    Matrix v;
};

/// Lower Cholesky factor of an SPD matrix.  Throws DefinitenessError
/// naming the first non-positive pivot if the matrix is not positive
/// definite.
Matrix cholesky(const Matrix& a);

/// Solve L x = b for lower-triangular L (forward substitution).
std::vector<double> forward_subst(const Matrix& l, const std::vector<double>& b);

/// Solve L^T x = b for lower-triangular L (back substitution).
std::vector<double> back_subst_t(const Matrix& l, const std::vector<double>& b);

/// Solve A x = b for SPD A via Cholesky.
std::vector<double> spd_solve(const Matrix& a, const std::vector<double>& b);

SymEigResult sym_eig(const Matrix& a);

/// Normalized single-trial covariance X X^T / trace(X X^T).
/// X is channels x samples; the mean is deliberately not removed.
/// Throws DegenerateInputError when the trial is all zero.
CovMatrix trial_covariance(const Matrix& trial);

/// Arithmetic mean of per-trial covariances.  All trials must share the
/// same channel count; an empty list is an error.
CovMatrix class_covariance(const std::vector<Matrix>& trials);

/// c + eps * mean(diag(c)) * I.
CovMatrix regularize_spd(const CovMatrix& c, double eps);

/// Generalized symmetric-definite eigensolve via Cholesky reduction of c2.
/// A ridge of c2_eps * mean(diag(c2)) is added to c2 before factorization
/// to absorb benign rank deficiency; genuinely indefinite c2 still throws
/// DefinitenessError.
GenEigResult gen_eig_sym(const CovMatrix& c1, const CovMatrix& c2, double c2_eps = 1e-9);

/// Kullback-Leibler divergence KL(n0 || n1) between Gaussians:
///   0.5 * (tr(S1^-1 S0) + (m1-m0)^T S1^-1 (m1-m0) - ln(det S0/det S1) - k)
/// computed with Cholesky log-determinants.  Both covariances must be
/// strictly positive definite; callers with near-singular estimates should
/// regularize first.
double kl_gaussian(const Gaussian& n0, const Gaussian& n1);

} // namespace mklcsp::linalg
