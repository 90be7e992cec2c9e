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

#include "mklcsp/mkl/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mklcsp/errors.hpp"
#include "mklcsp/simd/ops.hpp"

namespace mklcsp::mkl {

SvmSolution svm_dual_solve(const kernels::KernelMatrix& kernel,
                           const std::vector<int>& labels, double c,
                           const SvmOptions& options) {
    const std::size_t n = labels.size();
    if (kernel.k.rows() != n || kernel.k.cols() != n)
        throw DimensionError("svm_dual_solve: kernel size does not match labels");
    if (n == 0)
        throw ParameterError("svm_dual_solve: empty problem");
    if (!(c > 0.0))
        throw ParameterError("svm_dual_solve: C must be positive");

    bool has_pos = false;
    bool has_neg = false;
    for (int y : labels) {
        if (y == 1)
            has_pos = true;
        else if (y == -1)
            has_neg = true;
        else
            throw ParameterError("svm_dual_solve: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg)
        throw DegenerateInputError("svm_dual_solve: training set contains one class only");

    std::vector<double> alpha(n, 0.0);
    std::vector<double> f(n, 0.0); // f_i = sum_l alpha_l y_l K(i,l)
    if (!options.warm_start.empty()) {
        if (options.warm_start.size() != n)
            throw DimensionError("svm_dual_solve: warm start size mismatch");
        alpha = options.warm_start;
        for (std::size_t l = 0; l < n; ++l) {
            const double w = alpha[l] * labels[l];
            if (w != 0.0)
                simd::axpy(w, kernel.k.row(l), f.data(), n);
        }
    }

    const std::size_t max_iter =
        options.max_iterations ? options.max_iterations
                               : std::max<std::size_t>(100000, 1000 * n);

    SvmSolution sol;
    sol.converged = false;

    double viol_hi = 0.0;
    double viol_lo = 0.0;
    std::size_t it = 0;
    for (; it < max_iter; ++it) {
        // Maximal violating pair over the feasible ascent directions.
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double yg = labels[t] * (labels[t] * f[t] - 1.0); // y_t * G_t
            const bool in_up = (labels[t] == 1) ? alpha[t] < c : alpha[t] > 0.0;
            const bool in_low = (labels[t] == 1) ? alpha[t] > 0.0 : alpha[t] < c;
            if (in_up && -yg > m_up) {
                m_up = -yg;
                i = t;
            }
            if (in_low && -yg < m_low) {
                m_low = -yg;
                j = t;
            }
        }
        viol_hi = m_up;
        viol_lo = m_low;
        if (i == n || j == n || m_up - m_low <= options.tol) {
            sol.converged = true;
            break;
        }

        // Curvature along the feasible direction (alpha_i, alpha_j) +=
        // (y_i, -y_j) * d; the label factors cancel against Q = YKY.
        double a = kernel.k(i, i) + kernel.k(j, j) - 2.0 * kernel.k(i, j);
        if (a <= 1e-12)
            a = 1e-12;
        double d = (m_up - m_low) / a;

        // Step bounds from both box constraints.
        const double cap_i = (labels[i] == 1) ? c - alpha[i] : alpha[i];
        const double cap_j = (labels[j] == 1) ? alpha[j] : c - alpha[j];
        d = std::min(d, std::min(cap_i, cap_j));

        alpha[i] += labels[i] * d;
        alpha[j] -= labels[j] * d;
        // Clip exact bound hits so feasibility never drifts.
        alpha[i] = std::clamp(alpha[i], 0.0, c);
        alpha[j] = std::clamp(alpha[j], 0.0, c);

        simd::axpy(d, kernel.k.row(i), f.data(), n);
        simd::axpy(-d, kernel.k.row(j), f.data(), n);
    }
    sol.iterations = it;

    sol.alphas = alpha;
    sol.decision_raw = f;

    double obj = 0.0;
    for (std::size_t t = 0; t < n; ++t)
        obj += alpha[t] - 0.5 * alpha[t] * labels[t] * f[t];
    sol.objective = obj;

    const double sv_tol = 1e-8 * c;
    double bias_acc = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > sv_tol)
            sol.support.push_back(t);
        if (alpha[t] > sv_tol && alpha[t] < c - sv_tol) {
            bias_acc += labels[t] - f[t];
            ++free_count;
        }
    }
    sol.bias = free_count > 0 ? bias_acc / static_cast<double>(free_count)
                              : 0.5 * (viol_hi + viol_lo);
    return sol;
}

} // namespace mklcsp::mkl
