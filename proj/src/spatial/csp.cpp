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

#include "mklcsp/spatial/csp.hpp"

#include <cmath>

#include "mklcsp/errors.hpp"
#include "mklcsp/log.hpp"
#include "mklcsp/simd/ops.hpp"

namespace mklcsp::spatial {

using linalg::CovMatrix;

FilterBank fit_csp(const CovMatrix& c1, const CovMatrix& c2, const std::string& subject_id) {
    if (c1.dim() != c2.dim())
        throw DimensionError("fit_csp: covariance dimension mismatch");
    if (c1.dim() < kFiltersPerBank)
        throw DimensionError("fit_csp: need at least " + std::to_string(kFiltersPerBank) +
                             " channels, got " + std::to_string(c1.dim()));

    const linalg::GenEigResult ge = linalg::gen_eig_sym(c1, c2);
    const std::size_t n = c1.dim();
    const std::size_t half = kFiltersPerBank / 2;

    FilterBank bank;
    bank.subject_id = subject_id;
    bank.filters = Matrix(n, kFiltersPerBank);
    bank.eigenvalues.resize(kFiltersPerBank);
    for (std::size_t k = 0; k < half; ++k) {
        // Largest eigenvalues, descending.
        bank.eigenvalues[k] = ge.eigenvalues[k];
        bank.filters.set_column(k, ge.eigenvectors.column(k));
        // Smallest eigenvalues, keeping descending order within the group.
        const std::size_t src = n - half + k;
        bank.eigenvalues[half + k] = ge.eigenvalues[src];
        bank.filters.set_column(half + k, ge.eigenvectors.column(src));
    }
    return bank;
}

SimilarityWeights similarity_weights(const CovMatrix& target,
                                     const std::map<std::string, CovMatrix>& others,
                                     const std::string& target_id) {
    if (others.empty())
        throw ParameterError("similarity_weights: no other subjects");

    // Light ridge keeps sample covariance estimates safely invertible for
    // the divergence computation.
    const CovMatrix tgt = linalg::regularize_spd(target, 1e-6);
    const std::vector<double> zero(target.dim(), 0.0);
    const linalg::Gaussian gt(zero, tgt);

    SimilarityWeights out;
    out.target_id = target_id;
    double total = 0.0;
    for (const auto& [id, cov] : others) {
        const linalg::Gaussian gj(zero, linalg::regularize_spd(cov, 1e-6));
        double kl = linalg::kl_gaussian(gj, gt);
        if (kl < 1e-12) {
            warn("similarity_weights: KL divergence for subject '" + id +
                 "' is zero; clamping to 1e-12");
            kl = 1e-12;
        }
        const double inv = 1.0 / kl;
        out.weights[id] = inv;
        total += inv;
    }
    for (auto& [id, w] : out.weights)
        w /= total;
    return out;
}

CovMatrix composite_covariance(const CovMatrix& target,
                               const std::map<std::string, CovMatrix>& others,
                               const SimilarityWeights& weights, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw ParameterError("composite_covariance: lambda must be in [0, 1], got " +
                             std::to_string(lambda));
    Matrix acc = target.matrix();
    acc.scale(1.0 - lambda);
    for (const auto& [id, cov] : others) {
        const auto it = weights.weights.find(id);
        if (it == weights.weights.end())
            throw ParameterError("composite_covariance: no weight for subject '" + id + "'");
        if (cov.dim() != target.dim())
            throw DimensionError("composite_covariance: dimension mismatch for subject '" +
                                 id + "'");
        acc.add_scaled(cov.matrix(), lambda * it->second);
    }
    return CovMatrix(std::move(acc));
}

FilterBank fit_ccsp(const std::vector<Matrix>& target_class1,
                    const std::vector<Matrix>& target_class2,
                    const std::map<std::string, CovMatrix>& others_class1,
                    const std::map<std::string, CovMatrix>& others_class2,
                    double lambda, const std::string& target_id) {
    if (others_class1.size() != others_class2.size())
        throw ParameterError("fit_ccsp: per-class subject sets differ in size");

    const CovMatrix t1 = linalg::class_covariance(target_class1);
    const CovMatrix t2 = linalg::class_covariance(target_class2);

    CovMatrix comp1 = t1;
    CovMatrix comp2 = t2;
    if (lambda > 0.0 && !others_class1.empty()) {
        const SimilarityWeights w1 = similarity_weights(t1, others_class1, target_id);
        const SimilarityWeights w2 = similarity_weights(t2, others_class2, target_id);
        comp1 = composite_covariance(t1, others_class1, w1, lambda);
        comp2 = composite_covariance(t2, others_class2, w2, lambda);
    } else if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ParameterError("fit_ccsp: lambda must be in [0, 1], got " +
                             std::to_string(lambda));
    }
    return fit_csp(comp1, comp2, target_id);
}

std::vector<double> log_variance_features(const FilterBank& bank, const Matrix& trial) {
    if (trial.rows() != bank.filters.rows())
        throw DimensionError("log_variance_features: trial channels do not match bank");
    const std::size_t n = trial.cols();
    if (n == 0)
        throw DimensionError("log_variance_features: empty trial");

    std::vector<double> y(n);
    std::vector<double> feats(kFiltersPerBank);
    for (std::size_t k = 0; k < kFiltersPerBank; ++k) {
        for (std::size_t s = 0; s < n; ++s)
            y[s] = 0.0;
        for (std::size_t ch = 0; ch < trial.rows(); ++ch)
            simd::axpy(bank.filters(ch, k), trial.row(ch), y.data(), n);
        const double mean = simd::sum(y.data(), n) / static_cast<double>(n);
        double var = simd::sumsq_centered(y.data(), n, mean) / static_cast<double>(n);
        if (var < 1e-300) {
            warn("log_variance_features: variance underflow on filter " +
                 std::to_string(k) + "; clamping");
            var = 1e-300;
        }
        feats[k] = std::log(var);
    }
    return feats;
}

std::vector<FeatureVector> multi_view_features(const std::vector<FilterBank>& banks,
                                               const std::vector<signal::Trial>& trials) {
    if (banks.empty())
        throw ParameterError("multi_view_features: no banks");
    std::vector<FeatureVector> out;
    out.reserve(trials.size());
    for (const signal::Trial& t : trials) {
        FeatureVector fv;
        fv.label = t.label;
        fv.values.reserve(banks.size() * kFiltersPerBank);
        for (const FilterBank& b : banks) {
            const std::vector<double> f = log_variance_features(b, t.data);
            fv.values.insert(fv.values.end(), f.begin(), f.end());
        }
        out.push_back(std::move(fv));
    }
    return out;
}

Matrix activity_patterns(const FilterBank& bank, const CovMatrix& cavg) {
    if (cavg.dim() != bank.filters.rows())
        throw DimensionError("activity_patterns: covariance does not match bank");

    const Matrix cw = matmul(cavg.matrix(), bank.filters); // channels x 6
    Matrix g = matmul_tn(bank.filters, cw);                // 6 x 6, W^T C W

    Matrix l;
    try {
        l = linalg::cholesky(g);
    } catch (const DefinitenessError&) {
        warn("activity_patterns: W^T C W is singular; regularizing");
        double md = 0.0;
        for (std::size_t i = 0; i < g.rows(); ++i)
            md += g(i, i);
        md /= static_cast<double>(g.rows());
        for (std::size_t i = 0; i < g.rows(); ++i)
            g(i, i) += 1e-10 * md;
        l = linalg::cholesky(g);
    }

    // Solve (W^T C W) X^T = (C W)^T row by row: patterns = C W (W^T C W)^-1.
    Matrix patterns(cw.rows(), cw.cols());
    for (std::size_t r = 0; r < cw.rows(); ++r) {
        std::vector<double> rhs(cw.cols());
        for (std::size_t c = 0; c < cw.cols(); ++c)
            rhs[c] = cw(r, c);
        const std::vector<double> x = linalg::back_subst_t(l, linalg::forward_subst(l, rhs));
        for (std::size_t c = 0; c < cw.cols(); ++c)
            patterns(r, c) = x[c];
    }
    return patterns;
}

} // namespace mklcsp::spatial
