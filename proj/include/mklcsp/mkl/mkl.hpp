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

#include "mklcsp/kernels/gram.hpp"
#include "mklcsp/mkl/svm.hpp"

namespace mklcsp::mkl {

/// Multiple kernel learning model with an lp-constrained kernel weight
/// vector:  ||beta||_p <= 1, beta_j >= 0.  p may be infinity, in which
/// case every weight is 1 and the model is the plain sum-kernel SVM.
struct MklModel {
    SvmSolution solution;
    std::vector<int> labels;
    std::vector<double> betas;
    /// Requested norm exponent (p = 1 runs as 1.0001 internally but is
    /// recorded here as given).
    double p = 2.0;
    double c = 1.0;
    bool converged = false;
    bool stagnated = false;
    std::size_t outer_iterations = 0;
    /// Primal-equivalent objective after each outer iteration.
    std::vector<double> objective_trace;

    /// Per-view training data retained for prediction.
    std::vector<std::string> view_ids;
    std::vector<Matrix> train_blocks;
    std::vector<double> norm_factors;
};

struct MklOptions {
    double inner_tol = 1e-5;       // SMO stopping tolerance
    double beta_tol = 1e-5;        // max |delta beta| for convergence
    double objective_rel_tol = 1e-7;
    std::size_t max_outer = 200;
};

/// sum_j beta_j * K_j.  Weights must be non-negative, one per view.
kernels::KernelMatrix combine_kernels(const kernels::KernelStack& stack,
                                      const std::vector<double>& betas);

/// Closed-form lp weight update from s_j = beta_j^2 * alpha^T Y K_j Y alpha:
///   beta_j = s_j^(1/(p+1)) / (sum_k s_k^(p/(p+1)))^(1/p)
/// giving ||beta||_p = 1.  For p = infinity all weights are 1.  When every
/// s_j is zero the previous weights are kept (signalled via the model's
/// stagnation flag by the caller).
std::vector<double> beta_update(const std::vector<double>& s, double p);

/// Alternating optimization: SVM solve at fixed beta, closed-form beta
/// update at fixed alpha, until the weights and the objective settle or
/// max_outer is hit (then the current state is returned with converged
/// false).  p = infinity skips the alternation entirely.
MklModel mkl_train(const kernels::KernelStack& stack, const std::vector<int>& labels,
                   double c, double p, const MklOptions& options = {});

/// Convenience overload: builds one normalized linear kernel per feature
/// block, trains, and retains blocks, ids and norm factors for prediction.
MklModel mkl_train(const std::vector<Matrix>& feature_blocks,
                   const std::vector<std::string>& view_ids,
                   const std::vector<int>& labels, double c, double p,
                   const MklOptions& options = {});

/// Decision values f(x) = sum_i alpha_i y_i sum_j beta_j k_j(x_j^i, x_j) + b
/// for test feature blocks (one matrix per view, rows = trials).
std::vector<double> mkl_predict(const MklModel& model,
                                const std::vector<Matrix>& test_blocks);

/// sign(f) with ties mapped to +1.
std::vector<int> predict_labels(const std::vector<double>& decisions);

} // namespace mklcsp::mkl
