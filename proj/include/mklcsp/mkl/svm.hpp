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

#include "mklcsp/kernels/gram.hpp"

namespace mklcsp::mkl {

/// Solution of the soft-margin SVM dual
///   max_a  sum_i a_i - 1/2 sum_il a_i a_l y_i y_l K(i,l)
///   s.t.   0 <= a_i <= C,  sum_i y_i a_i = 0.
struct SvmSolution {
    std::vector<double> alphas;
    double bias = 0.0;
    /// Dual objective at the returned alphas.
    double objective = 0.0;
    /// Indices with alpha above the support threshold.
    std::vector<std::size_t> support;
    std::size_t iterations = 0;
    bool converged = false;
    /// Decision values without bias: f_i = sum_l alpha_l y_l K(i,l).
    std::vector<double> decision_raw;
};

struct SvmOptions {
    /// Stop when the maximal KKT violation drops below this.
    double tol = 1e-5;
    /// Hard cap on pairwise updates (0 = choose from problem size).
    std::size_t max_iterations = 0;
    /// Optional warm start; must be dual-feasible if provided.
    std::vector<double> warm_start;
};

/// Sequential minimal optimization with maximal-violating-pair selection.
/// Labels must be +1/-1 and both classes must be present.  The bias is the
/// average over free support vectors, or the KKT interval midpoint when no
/// free vector exists.
SvmSolution svm_dual_solve(const kernels::KernelMatrix& kernel,
                           const std::vector<int>& labels, double c,
                           const SvmOptions& options = {});

} // namespace mklcsp::mkl
