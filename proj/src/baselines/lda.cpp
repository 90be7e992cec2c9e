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

#include "mklcsp/baselines/lda.hpp"

#include <string>

#include "mklcsp/errors.hpp"
#include "mklcsp/linalg/core.hpp"
#include "mklcsp/simd/ops.hpp"

namespace mklcsp::baselines {

LdaModel lda_fit(const Matrix& features, const std::vector<int>& labels, double gamma) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    if (labels.size() != n)
        throw DimensionError("lda_fit: one label per example required");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ParameterError("lda_fit: gamma must be in [0, 1]");

    std::size_t n_pos = 0, n_neg = 0;
    std::vector<double> mu_pos(d, 0.0), mu_neg(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == 1) {
            simd::axpy(1.0, features.row(i), mu_pos.data(), d);
            ++n_pos;
        } else if (labels[i] == -1) {
            simd::axpy(1.0, features.row(i), mu_neg.data(), d);
            ++n_neg;
        } else {
            throw ParameterError("lda_fit: labels must be +1 or -1");
        }
    }
    if (n_pos == 0 || n_neg == 0)
        throw DegenerateInputError("lda_fit: both classes must be present");
    simd::scale(mu_pos.data(), d, 1.0 / static_cast<double>(n_pos));
    simd::scale(mu_neg.data(), d, 1.0 / static_cast<double>(n_neg));

    // Pooled within-class scatter, population normalization.
    Matrix s(d, d, 0.0);
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double>& mu = labels[i] == 1 ? mu_pos : mu_neg;
        for (std::size_t k = 0; k < d; ++k)
            centered[k] = features(i, k) - mu[k];
        for (std::size_t r = 0; r < d; ++r)
            simd::axpy(centered[r], centered.data(), s.row(r), d);
    }
    s.scale(1.0 / static_cast<double>(n));

    double mean_diag = 0.0;
    for (std::size_t k = 0; k < d; ++k)
        mean_diag += s(k, k);
    mean_diag /= static_cast<double>(d);
    s.scale(1.0 - gamma);
    for (std::size_t k = 0; k < d; ++k)
        s(k, k) += gamma * mean_diag;

    std::vector<double> diff(d);
    for (std::size_t k = 0; k < d; ++k)
        diff[k] = mu_pos[k] - mu_neg[k];

    LdaModel model;
    try {
        model.w = linalg::spd_solve(s, diff);
    } catch (const DefinitenessError& e) {
        throw DefinitenessError(std::string(e.what()) +
                                " (shrinkage gamma > 0 would regularize the scatter)");
    }

    double mid = 0.0;
    for (std::size_t k = 0; k < d; ++k)
        mid += model.w[k] * 0.5 * (mu_pos[k] + mu_neg[k]);
    model.b = -mid;
    return model;
}

std::vector<double> lda_decision(const LdaModel& model, const Matrix& features) {
    if (features.cols() != model.w.size())
        throw DimensionError("lda_decision: feature width mismatch");
    std::vector<double> f(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i)
        f[i] = simd::dot(features.row(i), model.w.data(), model.w.size()) + model.b;
    return f;
}

std::vector<int> lda_predict(const LdaModel& model, const Matrix& features) {
    const std::vector<double> f = lda_decision(model, features);
    std::vector<int> labels(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        labels[i] = f[i] >= 0.0 ? 1 : -1;
    return labels;
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.empty() || predicted.size() != truth.size())
        throw ParameterError("error_rate: label lists must be non-empty and equal length");
    std::size_t bad = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] != truth[i])
            ++bad;
    return static_cast<double>(bad) / static_cast<double>(predicted.size());
}

} // namespace mklcsp::baselines
