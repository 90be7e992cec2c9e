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

#include <map>
#include <string>
#include <vector>

#include "mklcsp/linalg/core.hpp"
#include "mklcsp/signal/recording.hpp"

namespace mklcsp::spatial {

/// Number of spatial filters in a bank: the three generalized eigenvectors
/// with the largest eigenvalues followed by the three with the smallest,
/// each group in descending eigenvalue order.
inline constexpr std::size_t kFiltersPerBank = 6;

/// Spatial filter bank of one subject: channels x 6 filter matrix plus the
/// corresponding generalized eigenvalues.
struct FilterBank {
    std::string subject_id;
    Matrix filters;
    std::vector<double> eigenvalues;
};

/// Normalized inverse-divergence weights over other subjects for one class.
/// Weights are positive and sum to one.
struct SimilarityWeights {
    std::string target_id;
    std::map<std::string, double> weights;
};

/// Multi-view feature vector: one 6-value block per contributing view, in
/// the order of the bank list that produced it, plus the trial label.
struct FeatureVector {
    std::vector<double> values;
    int label = 0;
};

/// Plain CSP on a pair of class covariances (at least 6 channels).
FilterBank fit_csp(const linalg::CovMatrix& c1, const linalg::CovMatrix& c2,
                   const std::string& subject_id);

/// Weights proportional to 1 / KL(N(0, other) || N(0, target)).  A zero
/// divergence (identical covariance) is clamped to 1e-12 with a warning.
/// Covariances are lightly regularized before the divergence so that
/// near-singular estimates stay invertible.
SimilarityWeights similarity_weights(const linalg::CovMatrix& target,
                                     const std::map<std::string, linalg::CovMatrix>& others,
                                     const std::string& target_id);

/// (1 - lambda) * target + lambda * sum_j alpha_j * other_j.
/// lambda must lie in [0, 1]; the weight map must cover every other subject.
linalg::CovMatrix composite_covariance(const linalg::CovMatrix& target,
                                       const std::map<std::string, linalg::CovMatrix>& others,
                                       const SimilarityWeights& weights, double lambda);

/// Composite CSP: per-class similarity weights and composite covariances
/// from the target's trials and the other subjects' class covariances,
/// then plain CSP on the pair.  lambda = 0 reduces to fit_csp on the
/// target's own covariances.
FilterBank fit_ccsp(const std::vector<Matrix>& target_class1,
                    const std::vector<Matrix>& target_class2,
                    const std::map<std::string, linalg::CovMatrix>& others_class1,
                    const std::map<std::string, linalg::CovMatrix>& others_class2,
                    double lambda, const std::string& target_id);

/// log(var(w^T X)) per filter; population variance with the mean removed.
/// Variances below 1e-300 are clamped (with a warning) before the log.
std::vector<double> log_variance_features(const FilterBank& bank, const Matrix& trial);

/// Features of every trial under every bank, blocks concatenated in bank
/// order.  All banks must share the trial's channel count.
std::vector<FeatureVector> multi_view_features(const std::vector<FilterBank>& banks,
                                               const std::vector<signal::Trial>& trials);

/// Activity patterns A = C W (W^T C W)^-1 for a bank and an average
/// covariance; column k is the source pattern of filter k.  A singular
/// W^T C W is regularized with eps 1e-10 and a warning.
Matrix activity_patterns(const FilterBank& bank, const linalg::CovMatrix& cavg);

} // namespace mklcsp::spatial
