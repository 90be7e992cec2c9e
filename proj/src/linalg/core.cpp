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

#include "mklcsp/linalg/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mklcsp/errors.hpp"
#include "mklcsp/simd/ops.hpp"

namespace mklcsp::linalg {
namespace {

double mean_diag(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        s += m(i, i);
    return s / static_cast<double>(m.rows());
}

} // namespace

CovMatrix::CovMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
        throw DimensionError("covariance matrix must be square");
    if (!m_.all_finite())
        throw DegenerateInputError("covariance matrix has non-finite entries");
    double scale = 0.0;
    for (std::size_t i = 0; i < m_.size(); ++i)
        scale = std::max(scale, std::fabs(m_.data()[i]));
    const double tol = 1e-12 * std::max(scale, 1e-300);
    for (std::size_t r = 0; r < m_.rows(); ++r) {
        for (std::size_t c = r + 1; c < m_.cols(); ++c) {
            if (std::fabs(m_(r, c) - m_(c, r)) > tol)
                throw DegenerateInputError("covariance matrix is not symmetric");
            m_(r, c) = m_(c, r);
        }
    }
}

Gaussian::Gaussian(std::vector<double> mu, CovMatrix cov)
    : mean(std::move(mu)), covariance(std::move(cov)) {
    if (mean.size() != covariance.dim())
        throw DimensionError("gaussian mean/covariance dimension mismatch");
}

Matrix cholesky(const Matrix& a) {
    const std::size_t n = a.rows();
    if (n != a.cols())
        throw DimensionError("cholesky: matrix must be square");
    Matrix l(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j) - simd::dot(l.row(j), l.row(j), j);
        if (!(d > 0.0))
            throw DefinitenessError("matrix is not positive definite: pivot " +
                                    std::to_string(j) + " = " + std::to_string(d));
        d = std::sqrt(d);
        l(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i)
            l(i, j) = (a(i, j) - simd::dot(l.row(i), l.row(j), j)) / d;
    }
    return l;
}

std::vector<double> forward_subst(const Matrix& l, const std::vector<double>& b) {
    const std::size_t n = l.rows();
    if (b.size() != n)
        throw DimensionError("forward_subst: length mismatch");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = (b[i] - simd::dot(l.row(i), x.data(), i)) / l(i, i);
    return x;
}

std::vector<double> back_subst_t(const Matrix& l, const std::vector<double>& b) {
    const std::size_t n = l.rows();
    if (b.size() != n)
        throw DimensionError("back_subst_t: length mismatch");
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k)
            s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

std::vector<double> spd_solve(const Matrix& a, const std::vector<double>& b) {
    const Matrix l = cholesky(a);
    return back_subst_t(l, forward_subst(l, b));
}

SymEigResult sym_eig(const Matrix& a) {
    const std::size_t n = a.rows();
    if (n != a.cols())
        throw DimensionError("sym_eig: matrix must be square");
    Matrix w = a;
    // Force exact symmetry so rotations stay consistent.
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = r + 1; c < n; ++c) {
            const double v = 0.5 * (w(r, c) + w(c, r));
            w(r, c) = v;
            w(c, r) = v;
        }
    Matrix v = Matrix::identity(n);

    const double norm = std::max(frobenius_norm(w), 1e-300);
    const double stop = 1e-15 * norm;
    const int max_sweeps = 64;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = r + 1; c < n; ++c)
                off += 2.0 * w(r, c) * w(r, c);
        if (std::sqrt(off) <= stop)
            break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = w(p, q);
                if (std::fabs(apq) <= 1e-300)
                    continue;
                // Classic Jacobi rotation annihilating w(p,q).
                const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double wkp = w(k, p);
                    const double wkq = w(k, q);
                    w(k, p) = c * wkp - s * wkq;
                    w(k, q) = s * wkp + c * wkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double wpk = w(p, k);
                    const double wqk = w(q, k);
                    w(p, k) = c * wpk - s * wqk;
                    w(q, k) = s * wpk + c * wqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return w(i, i) > w(j, j); });

    SymEigResult res;
    res.eigenvalues.resize(n);
    res.v = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        res.eigenvalues[k] = w(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r)
            res.v(r, k) = v(r, order[k]);
    }
    return res;
}

CovMatrix trial_covariance(const Matrix& trial) {
    if (trial.rows() == 0 || trial.cols() == 0)
        throw DimensionError("trial_covariance: empty trial");
    if (!trial.all_finite())
        throw DegenerateInputError("trial_covariance: non-finite samples");
    const std::size_t ch = trial.rows();
    Matrix c(ch, ch);
    for (std::size_t i = 0; i < ch; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = simd::dot(trial.row(i), trial.row(j), trial.cols());
            c(i, j) = v;
            c(j, i) = v;
        }
    double trace = 0.0;
    for (std::size_t i = 0; i < ch; ++i)
        trace += c(i, i);
    if (trace <= 0.0)
        throw DegenerateInputError("trial_covariance: all-zero trial");
    c.scale(1.0 / trace);
    return CovMatrix(std::move(c));
}

CovMatrix class_covariance(const std::vector<Matrix>& trials) {
    if (trials.empty())
        throw ParameterError("class_covariance: empty trial list");
    const std::size_t ch = trials.front().rows();
    Matrix acc(ch, ch, 0.0);
    for (const Matrix& t : trials) {
        if (t.rows() != ch)
            throw DimensionError("class_covariance: mixed channel counts");
        acc.add_scaled(trial_covariance(t).matrix(), 1.0);
    }
    acc.scale(1.0 / static_cast<double>(trials.size()));
    return CovMatrix(std::move(acc));
}

CovMatrix regularize_spd(const CovMatrix& c, double eps) {
    if (eps < 0.0)
        throw ParameterError("regularize_spd: eps must be non-negative");
    Matrix m = c.matrix();
    const double ridge = eps * mean_diag(m);
    for (std::size_t i = 0; i < m.rows(); ++i)
        m(i, i) += ridge;
    return CovMatrix(std::move(m));
}

GenEigResult gen_eig_sym(const CovMatrix& c1, const CovMatrix& c2, double c2_eps) {
    if (c1.dim() != c2.dim())
        throw DimensionError("gen_eig_sym: dimension mismatch");
    const std::size_t n = c1.dim();

    const Matrix l = cholesky(regularize_spd(c2, c2_eps).matrix());

    // B = L^-1 C1 L^-T, formed column by column with triangular solves.
    Matrix b(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> col = forward_subst(l, c1.matrix().column(j));
        b.set_column(j, col);
    }
    Matrix bt(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> row(n);
        for (std::size_t k = 0; k < n; ++k)
            row[k] = b(j, k);
        bt.set_column(j, forward_subst(l, row));
    }
    // bt = L^-1 (L^-1 C1)^T = L^-1 C1 L^-T up to roundoff.

    const SymEigResult se = sym_eig(bt);

    GenEigResult out;
    out.eigenvalues = se.eigenvalues;
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> w = back_subst_t(l, se.v.column(k));
        // Sign convention: largest-magnitude entry positive.
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::fabs(w[i]) > std::fabs(w[arg]))
                arg = i;
        if (w[arg] < 0.0)
            for (double& x : w)
                x = -x;
        out.eigenvectors.set_column(k, w);
    }
    return out;
}

double kl_gaussian(const Gaussian& n0, const Gaussian& n1) {
    const std::size_t k = n0.covariance.dim();
    if (n1.covariance.dim() != k)
        throw DimensionError("kl_gaussian: dimension mismatch");

    const Matrix l0 = cholesky(n0.covariance.matrix());
    const Matrix l1 = cholesky(n1.covariance.matrix());

    // tr(S1^-1 S0) = ||L1^-1 L0||_F^2.
    double tr = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const std::vector<double> x = forward_subst(l1, l0.column(j));
        tr += simd::dot(x.data(), x.data(), k);
    }

    std::vector<double> dmu(k);
    for (std::size_t i = 0; i < k; ++i)
        dmu[i] = n1.mean[i] - n0.mean[i];
    const std::vector<double> y = forward_subst(l1, dmu);
    const double quad = simd::dot(y.data(), y.data(), k);

    double logdet0 = 0.0;
    double logdet1 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        logdet0 += std::log(l0(i, i));
        logdet1 += std::log(l1(i, i));
    }

    return 0.5 * (tr + quad - 2.0 * (logdet0 - logdet1) - static_cast<double>(k));
}

} // namespace mklcsp::linalg
