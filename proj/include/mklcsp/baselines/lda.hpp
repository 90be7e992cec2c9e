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

namespace mklcsp::baselines {

/// Linear discriminant: f(x) = w^T x + b, predicted label sign(f) with
/// ties resolved to +1.
struct LdaModel {
    std::vector<double> w;
    double b = 0.0;
};

/// Fisher discriminant with diagonal shrinkage of the pooled within-class
/// covariance:  S~ = (1-gamma) S + gamma mean(diag(S)) I,
/// w = S~^-1 (mu+ - mu-),  b = -w^T (mu+ + mu-)/2.
/// Rows of `features` are examples; labels are +1/-1 and both classes must
/// be present.  A singular S~ (possible only with gamma = 0) raises a
/// definiteness error suggesting gamma > 0.
LdaModel lda_fit(const Matrix& features, const std::vector<int>& labels, double gamma);

std::vector<double> lda_decision(const LdaModel& model, const Matrix& features);

std::vector<int> lda_predict(const LdaModel& model, const Matrix& features);

/// Fraction of mismatched labels.  Empty input is an error.
double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

} // namespace mklcsp::baselines
