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

#include "mklcsp/mkl/mkl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mklcsp/errors.hpp"
#include "mklcsp/simd/ops.hpp"

namespace mklcsp::mkl {
namespace {

constexpr double kP1Internal = 1.0001;

void check_stack(const kernels::KernelStack& stack, std::size_t n) {
    if (stack.kernels.empty())
        throw ParameterError("mkl: empty kernel stack");
    for (const auto& km : stack.kernels)
        if (km.size() != n)
            throw DimensionError("mkl: kernel sizes in the stack differ");
}

// Primal-equivalent objective at the current iterate:
//   1/2 sum_j beta_j q_j + C sum_i hinge(1 - y_i (f_i + b))
// where q_j = alpha^T Y K_j Y alpha equals |w_j|^2 / beta_j^2.
double primal_objective(const std::vector<double>& betas, const std::vector<double>& q,
                        const SvmSolution& sol, const std::vector<int>& labels, double c) {
    double reg = 0.0;
    for (std::size_t j = 0; j < betas.size(); ++j)
        reg += betas[j] * q[j];
    double hinge = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double margin = 1.0 - labels[i] * (sol.decision_raw[i] + sol.bias);
        if (margin > 0.0)
            hinge += margin;
    }
    return 0.5 * reg + c * hinge;
}

std::vector<double> view_quadratics(const kernels::KernelStack& stack,
                                    const std::vector<double>& alphas,
                                    const std::vector<int>& labels) {
    const std::size_t n = labels.size();
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = alphas[i] * labels[i];
    std::vector<double> q(stack.views(), 0.0);
    for (std::size_t j = 0; j < stack.views(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (t[i] != 0.0)
                acc += t[i] * simd::dot(stack.kernels[j].k.row(i), t.data(), n);
        q[j] = std::max(acc, 0.0);
    }
    return q;
}

} // namespace

kernels::KernelMatrix combine_kernels(const kernels::KernelStack& stack,
                                      const std::vector<double>& betas) {
    if (betas.size() != stack.views())
        throw DimensionError("combine_kernels: one weight per view required");
    const std::size_t n = stack.kernels.empty() ? 0 : stack.kernels.front().size();
    check_stack(stack, n);
    for (double b : betas)
        if (!(b >= 0.0))
            throw ParameterError("combine_kernels: negative weight " + std::to_string(b));

    kernels::KernelMatrix out;
    out.k = Matrix(n, n, 0.0);
    for (std::size_t j = 0; j < stack.views(); ++j)
        if (betas[j] != 0.0)
            out.k.add_scaled(stack.kernels[j].k, betas[j]);
    out.norm_factor = 1.0;
    return out;
}

std::vector<double> beta_update(const std::vector<double>& s, double p) {
    if (s.empty())
        throw ParameterError("beta_update: empty input");
    if (std::isinf(p))
        return std::vector<double>(s.size(), 1.0);
    if (!(p >= 1.0))
        throw ParameterError("beta_update: p must be >= 1");
    const double pe = (p == 1.0) ? kP1Internal : p;

    double denom_sum = 0.0;
    for (double v : s) {
        if (!(v >= 0.0))
            throw ParameterError("beta_update: negative s entry");
        denom_sum += std::pow(v, pe / (pe + 1.0));
    }
    if (denom_sum <= 0.0)
        throw DegenerateInputError("beta_update: all view quadratics are zero");
    const double denom = std::pow(denom_sum, 1.0 / pe);

    std::vector<double> beta(s.size());
    for (std::size_t j = 0; j < s.size(); ++j)
        beta[j] = std::pow(s[j], 1.0 / (pe + 1.0)) / denom;
    return beta;
}

MklModel mkl_train(const kernels::KernelStack& stack, const std::vector<int>& labels,
                   double c, double p, const MklOptions& options) {
    const std::size_t n = labels.size();
    check_stack(stack, n);
    const std::size_t m = stack.views();

    MklModel model;
    model.labels = labels;
    model.p = p;
    model.c = c;
    model.view_ids = stack.view_ids;

    SvmOptions svm_opts;
    svm_opts.tol = options.inner_tol;

    if (std::isinf(p)) {
        // Uniform weights are already the lp ball's solution; no iteration.
        model.betas.assign(m, 1.0);
        const kernels::KernelMatrix combined = combine_kernels(stack, model.betas);
        model.solution = svm_dual_solve(combined, labels, c, svm_opts);
        const std::vector<double> q = view_quadratics(stack, model.solution.alphas, labels);
        model.objective_trace.push_back(primal_objective(model.betas, q, model.solution, labels, c));
        model.converged = true;
        model.outer_iterations = 1;
        return model;
    }

    if (!(p >= 1.0))
        throw ParameterError("mkl_train: p must be >= 1 or infinity");
    const double pe = (p == 1.0) ? kP1Internal : p;

    std::vector<double> beta(m, std::pow(static_cast<double>(m), -1.0 / pe));
    double prev_obj = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t outer = 0; outer < options.max_outer; ++outer) {
        const kernels::KernelMatrix combined = combine_kernels(stack, beta);
        model.solution = svm_dual_solve(combined, labels, c, svm_opts);
        svm_opts.warm_start = model.solution.alphas;
        model.outer_iterations = outer + 1;

        const std::vector<double> q = view_quadratics(stack, model.solution.alphas, labels);
        const double obj = primal_objective(beta, q, model.solution, labels, c);
        model.objective_trace.push_back(obj);

        std::vector<double> s(m);
        double s_total = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            s[j] = beta[j] * beta[j] * q[j];
            s_total += s[j];
        }
        if (s_total <= 0.0) {
            // No view carries any of the solution; nothing to redistribute.
            model.stagnated = true;
            model.converged = true;
            break;
        }

        const std::vector<double> beta_next = beta_update(s, pe);
        double dbeta = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            dbeta = std::max(dbeta, std::fabs(beta_next[j] - beta[j]));
        const double dobj = std::isnan(prev_obj)
                                ? std::numeric_limits<double>::infinity()
                                : std::fabs(obj - prev_obj) / std::max(1.0, std::fabs(obj));
        prev_obj = obj;

        if (dbeta <= options.beta_tol && dobj <= options.objective_rel_tol) {
            // Keep the weights the final alphas were solved against.
            model.converged = true;
            break;
        }
        beta = beta_next;
    }

    model.betas = beta;
    return model;
}

MklModel mkl_train(const std::vector<Matrix>& feature_blocks,
                   const std::vector<std::string>& view_ids,
                   const std::vector<int>& labels, double c, double p,
                   const MklOptions& options) {
    if (feature_blocks.empty())
        throw ParameterError("mkl_train: no feature blocks");
    if (view_ids.size() != feature_blocks.size())
        throw DimensionError("mkl_train: one view id per block required");

    kernels::KernelStack stack;
    stack.view_ids = view_ids;
    std::vector<double> factors;
    for (const Matrix& block : feature_blocks) {
        if (block.rows() != labels.size())
            throw DimensionError("mkl_train: block row count does not match labels");
        const kernels::KernelMatrix norm =
            kernels::normalize_avg_diag(kernels::linear_kernel(block));
        factors.push_back(norm.norm_factor);
        stack.kernels.push_back(norm);
    }

    MklModel model = mkl_train(stack, labels, c, p, options);
    model.train_blocks = feature_blocks;
    model.norm_factors = std::move(factors);
    return model;
}

std::vector<double> mkl_predict(const MklModel& model,
                                const std::vector<Matrix>& test_blocks) {
    if (model.train_blocks.empty())
        throw ParameterError("mkl_predict: model retains no training blocks");
    if (test_blocks.size() != model.train_blocks.size())
        throw DimensionError("mkl_predict: expected " +
                             std::to_string(model.train_blocks.size()) + " views, got " +
                             std::to_string(test_blocks.size()));
    const std::size_t n = model.labels.size();
    const std::size_t t = test_blocks.front().rows();
    for (const Matrix& block : test_blocks)
        if (block.rows() != t)
            throw DimensionError("mkl_predict: test views disagree on trial count");

    Matrix f(t, n, 0.0);
    for (std::size_t j = 0; j < test_blocks.size(); ++j) {
        if (test_blocks[j].cols() != model.train_blocks[j].cols())
            throw DimensionError("mkl_predict: feature width mismatch on view " +
                                 std::to_string(j));
        if (model.betas[j] == 0.0)
            continue;
        const Matrix kx = kernels::cross_kernel(model.train_blocks[j], test_blocks[j],
                                                model.norm_factors[j]);
        f.add_scaled(kx, model.betas[j]);
    }

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = model.solution.alphas[i] * model.labels[i];

    std::vector<double> out(t);
    for (std::size_t r = 0; r < t; ++r)
        out[r] = simd::dot(f.row(r), w.data(), n) + model.solution.bias;
    return out;
}

std::vector<int> predict_labels(const std::vector<double>& decisions) {
    std::vector<int> out(decisions.size());
    for (std::size_t i = 0; i < decisions.size(); ++i)
        out[i] = decisions[i] >= 0.0 ? 1 : -1;
    return out;
}

} // namespace mklcsp::mkl
