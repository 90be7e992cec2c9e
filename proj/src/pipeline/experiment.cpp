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

#include "mklcsp/pipeline/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mklcsp/baselines/lda.hpp"
#include "mklcsp/errors.hpp"
#include "mklcsp/kernels/gram.hpp"
#include "mklcsp/linalg/rng.hpp"
#include "mklcsp/log.hpp"
#include "mklcsp/mkl/mkl.hpp"
#include "mklcsp/pipeline/session.hpp"
#include "mklcsp/signal/filter.hpp"
#include "mklcsp/simd/ops.hpp"

namespace mklcsp::pipeline {
namespace {

using json = nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void trace_line(std::string* trace, const std::string& line) {
    if (trace != nullptr) {
        trace->append(line);
        trace->push_back('\n');
    }
}

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
};

std::vector<Split> make_splits(const std::vector<std::vector<std::size_t>>& folds,
                               std::size_t n) {
    std::vector<Split> splits(folds.size());
    std::vector<std::size_t> owner(n, folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f)
        for (std::size_t i : folds[f])
            owner[i] = f;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            if (owner[i] == f)
                splits[f].val.push_back(i);
            else
                splits[f].train.push_back(i);
        }
    }
    return splits;
}

std::vector<int> labels_of(const std::vector<signal::Trial>& trials,
                           const std::vector<std::size_t>& idx) {
    std::vector<int> y;
    y.reserve(idx.size());
    for (std::size_t i : idx)
        y.push_back(trials[i].label);
    return y;
}

spatial::FilterBank csp_bank(const std::vector<signal::Trial>& trials,
                             const std::vector<std::size_t>& idx, const std::string& id) {
    std::vector<Matrix> c1;
    std::vector<Matrix> c2;
    for (std::size_t i : idx)
        (trials[i].label == 1 ? c1 : c2).push_back(trials[i].data);
    if (c1.empty() || c2.empty())
        throw DegenerateInputError("run_subject: training portion for '" + id +
                                   "' has a single class");
    return spatial::fit_csp(linalg::class_covariance(c1), linalg::class_covariance(c2), id);
}

void class_covs(const std::vector<signal::Trial>& trials, const std::vector<std::size_t>& idx,
                const std::string& id, linalg::CovMatrix& out1, linalg::CovMatrix& out2) {
    std::vector<Matrix> c1;
    std::vector<Matrix> c2;
    for (std::size_t i : idx)
        (trials[i].label == 1 ? c1 : c2).push_back(trials[i].data);
    if (c1.empty() || c2.empty())
        throw DegenerateInputError("run_subject: training portion for '" + id +
                                   "' has a single class");
    out1 = linalg::class_covariance(c1);
    out2 = linalg::class_covariance(c2);
}

Matrix logvar_matrix(const spatial::FilterBank& bank, const std::vector<signal::Trial>& trials,
                     const std::vector<std::size_t>& idx) {
    Matrix f(idx.size(), spatial::kFiltersPerBank);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const std::vector<double> v = spatial::log_variance_features(bank, trials[idx[r]].data);
        for (std::size_t c = 0; c < v.size(); ++c)
            f(r, c) = v[c];
    }
    return f;
}

std::vector<double> svm_decisions(const mkl::SvmSolution& sol, const std::vector<int>& y_train,
                                  const Matrix& train_feats, const Matrix& test_feats,
                                  double norm_factor) {
    const Matrix cross = kernels::cross_kernel(train_feats, test_feats, norm_factor);
    std::vector<double> coef(y_train.size());
    for (std::size_t i = 0; i < coef.size(); ++i)
        coef[i] = sol.alphas[i] * static_cast<double>(y_train[i]);
    std::vector<double> f(test_feats.rows());
    for (std::size_t t = 0; t < f.size(); ++t)
        f[t] = simd::dot(cross.row(t), coef.data(), coef.size()) + sol.bias;
    return f;
}

long count_misses(const std::vector<double>& decisions, const std::vector<int>& truth) {
    long misses = 0;
    for (std::size_t i = 0; i < decisions.size(); ++i)
        if ((decisions[i] >= 0.0 ? 1 : -1) != truth[i])
            ++misses;
    return misses;
}

std::vector<signal::Trial> truncate_trials(const std::vector<signal::Trial>& trials, int k) {
    if (k <= 0 || static_cast<std::size_t>(k) >= trials.size())
        return trials;
    const std::size_t want = static_cast<std::size_t>(k);
    std::size_t n_pos = 0;
    for (const signal::Trial& t : trials)
        n_pos += t.label == 1 ? 1 : 0;
    const std::size_t n_neg = trials.size() - n_pos;
    std::size_t q_pos = std::min((want + 1) / 2, n_pos);
    std::size_t q_neg = std::min(want - q_pos, n_neg);
    // Top the quotas up from the larger class when one side runs short.
    q_pos = std::min(q_pos + (want - q_pos - q_neg), n_pos);
    q_neg = std::min(q_neg + (want - q_pos - q_neg), n_neg);

    std::vector<signal::Trial> kept;
    kept.reserve(q_pos + q_neg);
    std::size_t taken_pos = 0;
    std::size_t taken_neg = 0;
    for (const signal::Trial& t : trials) {
        if (t.label == 1 && taken_pos < q_pos) {
            kept.push_back(t);
            ++taken_pos;
        } else if (t.label == -1 && taken_neg < q_neg) {
            kept.push_back(t);
            ++taken_neg;
        }
    }
    return kept;
}

/// Everything run_subject's method engines share.
struct RunContext {
    const ExperimentConfig& config;
    std::string target_id;
    std::vector<signal::Trial> trials; // truncated target calibration
    std::vector<int> labels;
    std::vector<Split> splits;
    const SubjectInput* target = nullptr;
    std::string* trace = nullptr;
    std::vector<std::size_t> all_idx;
};

std::string trace_prefix(const RunContext& ctx, Method method) {
    return "subject=" + ctx.target_id + " method=" + method_name(method);
}

void finish_selection(MethodResult& result, const RunContext& ctx, long misses) {
    result.cv_misses = misses;
    result.cv_error = static_cast<double>(misses) / static_cast<double>(ctx.trials.size());
}

/// Test-set evaluation shared by every arm; decisions_fn maps prepared
/// test trials to decision values.
template <typename DecisionsFn>
void eval_test(MethodResult& result, const RunContext& ctx, DecisionsFn&& decisions_fn) {
    if (!ctx.target->test_available) {
        result.ok = false;
        result.message = ctx.target->test_failure.empty() ? "test session unavailable"
                                                          : ctx.target->test_failure;
        return;
    }
    const std::vector<signal::Trial>& test = ctx.target->test;
    if (test.empty()) {
        result.ok = false;
        result.message = "test session has no trials";
        return;
    }
    std::vector<std::size_t> idx(test.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    const std::vector<double> decisions = decisions_fn(test, idx);
    const std::vector<int> pred = mkl::predict_labels(decisions);
    result.test_error = baselines::error_rate(pred, labels_of(test, idx));
    result.ok = true;
}

MethodResult run_csp(const RunContext& ctx, bool use_svm) {
    const Method method = use_svm ? Method::csp_svm : Method::csp_lda;
    MethodResult result;
    result.subject = ctx.target_id;
    result.method = method_name(method);

    const std::vector<double>& c_grid = ctx.config.c_grid;
    std::vector<long> misses(use_svm ? c_grid.size() : 1, 0);
    for (const Split& split : ctx.splits) {
        const spatial::FilterBank bank = csp_bank(ctx.trials, split.train, ctx.target_id);
        const Matrix ftr = logvar_matrix(bank, ctx.trials, split.train);
        const Matrix fva = logvar_matrix(bank, ctx.trials, split.val);
        const std::vector<int> ytr = labels_of(ctx.trials, split.train);
        const std::vector<int> yva = labels_of(ctx.trials, split.val);
        if (!use_svm) {
            const baselines::LdaModel model = baselines::lda_fit(ftr, ytr, ctx.config.lda_gamma);
            misses[0] += count_misses(lda_decision(model, fva), yva);
        } else {
            const kernels::KernelMatrix k = normalize_avg_diag(kernels::linear_kernel(ftr));
            for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
                const mkl::SvmSolution sol = mkl::svm_dual_solve(k, ytr, c_grid[ci]);
                misses[ci] +=
                    count_misses(svm_decisions(sol, ytr, ftr, fva, k.norm_factor), yva);
            }
        }
    }

    std::size_t best = 0;
    if (use_svm) {
        for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
            trace_line(ctx.trace, trace_prefix(ctx, method) + " C=" + fmt(c_grid[ci]) +
                                      " cv_misses=" + std::to_string(misses[ci]) + " cv_error=" +
                                      fmt(static_cast<double>(misses[ci]) /
                                          static_cast<double>(ctx.trials.size())));
            if (misses[ci] < misses[best] ||
                (misses[ci] == misses[best] && c_grid[ci] < c_grid[best]))
                best = ci;
        }
        result.chosen_c = c_grid[best];
        trace_line(ctx.trace, trace_prefix(ctx, method) + " chosen C=" + fmt(c_grid[best]) +
                                  " cv_misses=" + std::to_string(misses[best]));
    } else {
        trace_line(ctx.trace, trace_prefix(ctx, method) + " gamma=" + fmt(ctx.config.lda_gamma) +
                                  " cv_misses=" + std::to_string(misses[0]));
        trace_line(ctx.trace, trace_prefix(ctx, method) + " chosen gamma=" +
                                  fmt(ctx.config.lda_gamma) +
                                  " cv_misses=" + std::to_string(misses[0]));
    }
    finish_selection(result, ctx, misses[best]);

    const spatial::FilterBank bank = csp_bank(ctx.trials, ctx.all_idx, ctx.target_id);
    const Matrix ftr = logvar_matrix(bank, ctx.trials, ctx.all_idx);
    const std::vector<int> ytr = labels_of(ctx.trials, ctx.all_idx);
    if (!use_svm) {
        const baselines::LdaModel model = baselines::lda_fit(ftr, ytr, ctx.config.lda_gamma);
        eval_test(result, ctx, [&](const std::vector<signal::Trial>& test, const auto& idx) {
            return lda_decision(model, logvar_matrix(bank, test, idx));
        });
    } else {
        const kernels::KernelMatrix k = normalize_avg_diag(kernels::linear_kernel(ftr));
        const mkl::SvmSolution sol = mkl::svm_dual_solve(k, ytr, result.chosen_c);
        eval_test(result, ctx, [&](const std::vector<signal::Trial>& test, const auto& idx) {
            return svm_decisions(sol, ytr, ftr, logvar_matrix(bank, test, idx), k.norm_factor);
        });
    }
    return result;
}

MethodResult run_ccsp(const RunContext& ctx, bool use_svm, const PreparedCohort& prep) {
    const Method method = use_svm ? Method::ccsp_svm : Method::ccsp_lda;
    MethodResult result;
    result.subject = ctx.target_id;
    result.method = method_name(method);

    std::map<std::string, linalg::CovMatrix> others1;
    std::map<std::string, linalg::CovMatrix> others2;
    for (const auto& [id, cov] : prep.cov1)
        if (id != ctx.target_id)
            others1.emplace(id, cov);
    for (const auto& [id, cov] : prep.cov2)
        if (id != ctx.target_id)
            others2.emplace(id, cov);

    const std::vector<double>& l_grid = ctx.config.lambda_grid;
    const std::vector<double>& c_grid = ctx.config.c_grid;
    const std::size_t n_c = use_svm ? c_grid.size() : 1;
    std::vector<long> misses(l_grid.size() * n_c, 0);

    auto bank_at = [&](const linalg::CovMatrix& t1, const linalg::CovMatrix& t2,
                       const spatial::SimilarityWeights& w1,
                       const spatial::SimilarityWeights& w2, double lambda) {
        if (lambda == 0.0 || others1.empty())
            return spatial::fit_csp(t1, t2, ctx.target_id);
        return spatial::fit_csp(composite_covariance(t1, others1, w1, lambda),
                                composite_covariance(t2, others2, w2, lambda), ctx.target_id);
    };

    const bool need_weights =
        !others1.empty() && std::any_of(l_grid.begin(), l_grid.end(),
                                        [](double l) { return l > 0.0; });

    for (const Split& split : ctx.splits) {
        linalg::CovMatrix t1;
        linalg::CovMatrix t2;
        class_covs(ctx.trials, split.train, ctx.target_id, t1, t2);
        spatial::SimilarityWeights w1;
        spatial::SimilarityWeights w2;
        if (need_weights) {
            w1 = spatial::similarity_weights(t1, others1, ctx.target_id);
            w2 = spatial::similarity_weights(t2, others2, ctx.target_id);
        }
        const std::vector<int> ytr = labels_of(ctx.trials, split.train);
        const std::vector<int> yva = labels_of(ctx.trials, split.val);
        for (std::size_t li = 0; li < l_grid.size(); ++li) {
            const spatial::FilterBank bank = bank_at(t1, t2, w1, w2, l_grid[li]);
            const Matrix ftr = logvar_matrix(bank, ctx.trials, split.train);
            const Matrix fva = logvar_matrix(bank, ctx.trials, split.val);
            if (!use_svm) {
                const baselines::LdaModel model = baselines::lda_fit(ftr, ytr, ctx.config.lda_gamma);
                misses[li] += count_misses(lda_decision(model, fva), yva);
            } else {
                const kernels::KernelMatrix k = normalize_avg_diag(kernels::linear_kernel(ftr));
                for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
                    const mkl::SvmSolution sol = mkl::svm_dual_solve(k, ytr, c_grid[ci]);
                    misses[li * n_c + ci] +=
                        count_misses(svm_decisions(sol, ytr, ftr, fva, k.norm_factor), yva);
                }
            }
        }
    }

    // Lowest pooled error; ties prefer smaller C, then smaller lambda.
    std::size_t best_li = 0;
    std::size_t best_ci = 0;
    bool have = false;
    for (std::size_t li = 0; li < l_grid.size(); ++li) {
        for (std::size_t ci = 0; ci < n_c; ++ci) {
            const long m = misses[li * n_c + ci];
            std::string line = trace_prefix(ctx, method) + " lambda=" + fmt(l_grid[li]);
            if (use_svm)
                line += " C=" + fmt(c_grid[ci]);
            trace_line(ctx.trace, line + " cv_misses=" + std::to_string(m) + " cv_error=" +
                                      fmt(static_cast<double>(m) /
                                          static_cast<double>(ctx.trials.size())));
            const long bm = misses[best_li * n_c + best_ci];
            bool better = !have || m < bm;
            if (have && m == bm && use_svm && c_grid[ci] < c_grid[best_ci])
                better = true;
            if (have && m == bm && (!use_svm || c_grid[ci] == c_grid[best_ci]) &&
                l_grid[li] < l_grid[best_li])
                better = true;
            if (better) {
                best_li = li;
                best_ci = ci;
                have = true;
            }
        }
    }
    result.chosen_lambda = l_grid[best_li];
    std::string chosen = trace_prefix(ctx, method) + " chosen lambda=" + fmt(l_grid[best_li]);
    if (use_svm) {
        result.chosen_c = c_grid[best_ci];
        chosen += " C=" + fmt(c_grid[best_ci]);
    }
    trace_line(ctx.trace,
               chosen + " cv_misses=" + std::to_string(misses[best_li * n_c + best_ci]));
    finish_selection(result, ctx, misses[best_li * n_c + best_ci]);

    linalg::CovMatrix t1;
    linalg::CovMatrix t2;
    class_covs(ctx.trials, ctx.all_idx, ctx.target_id, t1, t2);
    spatial::SimilarityWeights w1;
    spatial::SimilarityWeights w2;
    if (!others1.empty() && result.chosen_lambda > 0.0) {
        w1 = spatial::similarity_weights(t1, others1, ctx.target_id);
        w2 = spatial::similarity_weights(t2, others2, ctx.target_id);
    }
    const spatial::FilterBank bank = bank_at(t1, t2, w1, w2, result.chosen_lambda);
    const Matrix ftr = logvar_matrix(bank, ctx.trials, ctx.all_idx);
    const std::vector<int> ytr = labels_of(ctx.trials, ctx.all_idx);
    if (!use_svm) {
        const baselines::LdaModel model = baselines::lda_fit(ftr, ytr, ctx.config.lda_gamma);
        eval_test(result, ctx, [&](const std::vector<signal::Trial>& test, const auto& idx) {
            return lda_decision(model, logvar_matrix(bank, test, idx));
        });
    } else {
        const kernels::KernelMatrix k = normalize_avg_diag(kernels::linear_kernel(ftr));
        const mkl::SvmSolution sol = mkl::svm_dual_solve(k, ytr, result.chosen_c);
        eval_test(result, ctx, [&](const std::vector<signal::Trial>& test, const auto& idx) {
            return svm_decisions(sol, ytr, ftr, logvar_matrix(bank, test, idx), k.norm_factor);
        });
    }
    return result;
}

MethodResult run_mkl(const RunContext& ctx, const PreparedCohort& prep,
                     const std::vector<std::string>& view_ids) {
    MethodResult result;
    result.subject = ctx.target_id;
    result.method = method_name(Method::mkl);

    const std::vector<double>& c_grid = ctx.config.c_grid;
    const std::vector<double>& p_grid = ctx.config.p_grid;
    std::vector<long> misses(c_grid.size() * p_grid.size(), 0);

    auto view_banks = [&](const spatial::FilterBank& target_bank) {
        std::vector<spatial::FilterBank> banks;
        banks.reserve(view_ids.size());
        for (const std::string& id : view_ids)
            banks.push_back(id == ctx.target_id ? target_bank : prep.banks.at(id));
        return banks;
    };
    auto view_blocks = [&](const std::vector<spatial::FilterBank>& banks,
                           const std::vector<signal::Trial>& trials,
                           const std::vector<std::size_t>& idx) {
        std::vector<Matrix> blocks;
        blocks.reserve(banks.size());
        for (const spatial::FilterBank& bank : banks)
            blocks.push_back(logvar_matrix(bank, trials, idx));
        return blocks;
    };

    for (const Split& split : ctx.splits) {
        const std::vector<spatial::FilterBank> banks =
            view_banks(csp_bank(ctx.trials, split.train, ctx.target_id));
        const std::vector<Matrix> btr = view_blocks(banks, ctx.trials, split.train);
        const std::vector<Matrix> bva = view_blocks(banks, ctx.trials, split.val);
        const std::vector<int> ytr = labels_of(ctx.trials, split.train);
        const std::vector<int> yva = labels_of(ctx.trials, split.val);
        for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
            for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
                const mkl::MklModel model =
                    mkl::mkl_train(btr, view_ids, ytr, c_grid[ci], p_grid[pi]);
                misses[ci * p_grid.size() + pi] +=
                    count_misses(mkl::mkl_predict(model, bva), yva);
            }
        }
    }

    std::size_t best_ci = 0;
    std::size_t best_pi = 0;
    bool have = false;
    for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
        for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
            const long m = misses[ci * p_grid.size() + pi];
            trace_line(ctx.trace, trace_prefix(ctx, Method::mkl) + " C=" + fmt(c_grid[ci]) +
                                      " p=" + fmt(p_grid[pi]) + " cv_misses=" +
                                      std::to_string(m) + " cv_error=" +
                                      fmt(static_cast<double>(m) /
                                          static_cast<double>(ctx.trials.size())));
            const long bm = misses[best_ci * p_grid.size() + best_pi];
            bool better = !have || m < bm;
            if (have && m == bm && c_grid[ci] < c_grid[best_ci])
                better = true;
            if (have && m == bm && c_grid[ci] == c_grid[best_ci] && p_grid[pi] < p_grid[best_pi])
                better = true;
            if (better) {
                best_ci = ci;
                best_pi = pi;
                have = true;
            }
        }
    }
    result.chosen_c = c_grid[best_ci];
    result.chosen_p = p_grid[best_pi];
    trace_line(ctx.trace, trace_prefix(ctx, Method::mkl) + " chosen C=" + fmt(c_grid[best_ci]) +
                              " p=" + fmt(p_grid[best_pi]) + " cv_misses=" +
                              std::to_string(misses[best_ci * p_grid.size() + best_pi]));
    finish_selection(result, ctx, misses[best_ci * p_grid.size() + best_pi]);

    const std::vector<spatial::FilterBank> banks =
        view_banks(csp_bank(ctx.trials, ctx.all_idx, ctx.target_id));
    const std::vector<Matrix> btr = view_blocks(banks, ctx.trials, ctx.all_idx);
    const std::vector<int> ytr = labels_of(ctx.trials, ctx.all_idx);
    const mkl::MklModel model =
        mkl::mkl_train(btr, view_ids, ytr, result.chosen_c, result.chosen_p);
    result.view_ids = model.view_ids;
    result.betas = model.betas;
    eval_test(result, ctx, [&](const std::vector<signal::Trial>& test, const auto& idx) {
        return mkl::mkl_predict(model, view_blocks(banks, test, idx));
    });
    return result;
}

json spec_to_json_obj(const synth::CohortSpec& spec) {
    json j;
    j["subjects"] = spec.subjects;
    j["channels"] = spec.channels;
    j["sources"] = spec.sources;
    j["fs"] = spec.fs;
    j["trials_per_class"] = spec.trials_per_class;
    j["trial_ms"] = spec.trial_ms;
    j["seed"] = spec.seed;
    j["similar_fraction"] = spec.similar_fraction;
    j["class_gain"] = spec.class_gain;
    j["noise_sigma"] = spec.noise_sigma;
    return j;
}

signal::Recording preprocess(signal::Recording rec, const ExperimentConfig& config) {
    if (!config.channels.empty())
        rec = select_channels(rec, config.channels);
    const signal::BandpassFilter filter = signal::design_butterworth_bandpass(
        config.filter_order, config.band_low_hz, config.band_high_hz, rec.fs);
    return apply_filter(rec, filter);
}

} // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char b : std::string_view(bytes)) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, int k,
                                                       std::uint64_t seed) {
    if (labels.empty())
        throw ParameterError("stratified_folds: no labels");
    if (k < 1)
        throw ParameterError("stratified_folds: need at least 1 fold, got " + std::to_string(k));
    // Leave-one-out: every index is its own fold; the per-class minimum
    // cannot apply to this degenerate split.
    if (static_cast<std::size_t>(k) == labels.size()) {
        std::vector<std::vector<std::size_t>> folds(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i)
            folds[i] = {i};
        return folds;
    }
    std::map<int, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < labels.size(); ++i)
        classes[labels[i]].push_back(i);
    for (const auto& [label, idx] : classes)
        if (idx.size() < static_cast<std::size_t>(k))
            throw ParameterError("stratified_folds: class " + std::to_string(label) + " has " +
                                 std::to_string(idx.size()) + " members, need at least " +
                                 std::to_string(k));
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (auto& [label, idx] : classes) {
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.below(i)]);
        for (std::size_t i = 0; i < idx.size(); ++i)
            folds[i % static_cast<std::size_t>(k)].push_back(idx[i]);
    }
    for (auto& fold : folds)
        std::sort(fold.begin(), fold.end());
    return folds;
}

PreparedCohort prepare_cohort(const std::map<std::string, SubjectInput>& cohort) {
    PreparedCohort prep;
    for (const auto& [id, input] : cohort) {
        std::vector<Matrix> c1;
        std::vector<Matrix> c2;
        for (const signal::Trial& t : input.calibration)
            (t.label == 1 ? c1 : c2).push_back(t.data);
        if (c1.empty() || c2.empty())
            throw DegenerateInputError("prepare_cohort: subject '" + id +
                                       "' calibration has a single class");
        linalg::CovMatrix cov1 = linalg::class_covariance(c1);
        linalg::CovMatrix cov2 = linalg::class_covariance(c2);
        prep.banks.emplace(id, spatial::fit_csp(cov1, cov2, id));
        prep.cov1.emplace(id, std::move(cov1));
        prep.cov2.emplace(id, std::move(cov2));
    }
    return prep;
}

MethodResult run_subject(Method method, const std::string& target_id,
                         const std::map<std::string, SubjectInput>& cohort,
                         const ExperimentConfig& config, const PreparedCohort* prepared,
                         std::string* trace) {
    validate_config(config);
    const auto it = cohort.find(target_id);
    if (it == cohort.end())
        throw ParameterError("run_subject: no subject '" + target_id + "' in the cohort");

    RunContext ctx{config, target_id, {}, {}, {}, &it->second, trace, {}};
    ctx.trials = truncate_trials(it->second.calibration, config.target_calib_trials);
    for (const signal::Trial& t : ctx.trials)
        ctx.labels.push_back(t.label);
    const std::vector<std::vector<std::size_t>> folds =
        stratified_folds(ctx.labels, config.folds, Rng::mix(config.seed, fnv1a64(target_id)));
    ctx.splits = make_splits(folds, ctx.trials.size());
    ctx.all_idx.resize(ctx.trials.size());
    for (std::size_t i = 0; i < ctx.all_idx.size(); ++i)
        ctx.all_idx[i] = i;

    std::string sizes;
    for (const auto& fold : folds)
        sizes += (sizes.empty() ? "" : ",") + std::to_string(fold.size());
    trace_line(trace, trace_prefix(ctx, method) + " trials=" + std::to_string(ctx.trials.size()) +
                          " folds=" + std::to_string(config.folds) + " sizes=" + sizes);

    const bool needs_others = method == Method::ccsp_lda || method == Method::ccsp_svm ||
                              method == Method::mkl;
    PreparedCohort local;
    const PreparedCohort* prep = prepared;
    if (prep == nullptr && needs_others) {
        local = prepare_cohort(cohort);
        prep = &local;
    }

    switch (method) {
    case Method::csp_lda:
        return run_csp(ctx, false);
    case Method::csp_svm:
        return run_csp(ctx, true);
    case Method::ccsp_lda:
        return run_ccsp(ctx, false, *prep);
    case Method::ccsp_svm:
        return run_ccsp(ctx, true, *prep);
    case Method::mkl: {
        // View order contract: target first, then the other subjects sorted by id.
        std::vector<std::string> view_ids;
        view_ids.push_back(target_id);
        for (const auto& [id, input] : cohort)
            if (id != target_id)
                view_ids.push_back(id);
        return run_mkl(ctx, *prep, view_ids);
    }
    }
    throw ParameterError("run_subject: unknown method");
}

ExperimentReport run_benchmark(const std::map<std::string, SubjectInput>& cohort,
                               const ExperimentConfig& config) {
    validate_config(config);
    if (cohort.size() < 2)
        throw ParameterError("run_benchmark: need a cohort of at least 2 subjects");
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentReport report;
    report.config = config;
    for (const auto& [id, input] : cohort) {
        report.subject_ids.push_back(id);
        report.groups[id] = input.group;
    }
    const std::size_t n = report.subject_ids.size();
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < n; ++i)
        col[report.subject_ids[i]] = i;

    const PreparedCohort prep = prepare_cohort(cohort);

    report.beta_matrix = Matrix(n, n);
    report.alpha_matrix = Matrix(n, n);
    for (const std::string& target : report.subject_ids) {
        for (Method method : config.methods) {
            MethodResult result;
            try {
                result = run_subject(method, target, cohort, config, &prep,
                                     &report.selection_trace);
            } catch (const Error& e) {
                result.subject = target;
                result.method = method_name(method);
                result.ok = false;
                result.message = e.what();
                trace_line(&report.selection_trace, "subject=" + target + " method=" +
                                                        method_name(method) +
                                                        " failed: " + std::string(e.what()));
            }
            if (result.method == method_name(Method::mkl) && !result.betas.empty()) {
                const std::size_t row = col.at(target);
                for (std::size_t v = 0; v < result.view_ids.size(); ++v)
                    report.beta_matrix(row, col.at(result.view_ids[v])) = result.betas[v];
            }
            report.results.push_back(std::move(result));
        }
    }

    // Similarity rows: class-averaged weights of every target over the
    // others, from the same (possibly truncated) calibration trials the
    // methods saw.
    for (const std::string& target : report.subject_ids) {
        std::map<std::string, linalg::CovMatrix> others1;
        std::map<std::string, linalg::CovMatrix> others2;
        for (const auto& [id, cov] : prep.cov1)
            if (id != target)
                others1.emplace(id, cov);
        for (const auto& [id, cov] : prep.cov2)
            if (id != target)
                others2.emplace(id, cov);
        try {
            const std::vector<signal::Trial> trials =
                truncate_trials(cohort.at(target).calibration, config.target_calib_trials);
            linalg::CovMatrix t1;
            linalg::CovMatrix t2;
            std::vector<std::size_t> all(trials.size());
            for (std::size_t i = 0; i < all.size(); ++i)
                all[i] = i;
            class_covs(trials, all, target, t1, t2);
            const spatial::SimilarityWeights w1 = spatial::similarity_weights(t1, others1, target);
            const spatial::SimilarityWeights w2 = spatial::similarity_weights(t2, others2, target);
            const std::size_t row = col.at(target);
            for (const auto& [id, w] : w1.weights)
                report.alpha_matrix(row, col.at(id)) += 0.5 * w;
            for (const auto& [id, w] : w2.weights)
                report.alpha_matrix(row, col.at(id)) += 0.5 * w;
        } catch (const Error& e) {
            warn("similarity row for '" + target + "' failed: " + std::string(e.what()));
        }
    }

    // Activity patterns of the strongest and weakest sources under the
    // learned kernel weights (column averages of the beta matrix).
    bool any_beta = false;
    for (std::size_t i = 0; i < report.beta_matrix.size(); ++i)
        any_beta = any_beta || report.beta_matrix.data()[i] != 0.0;
    if (any_beta && n >= 2) {
        std::vector<double> score(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t t = 0; t < n; ++t)
                if (t != j)
                    score[j] += report.beta_matrix(t, j);
            score[j] /= static_cast<double>(n - 1);
        }
        std::size_t hi = 0;
        std::size_t lo = 0;
        for (std::size_t j = 1; j < n; ++j) {
            if (score[j] > score[hi])
                hi = j;
            if (score[j] < score[lo])
                lo = j;
        }
        for (std::size_t j : std::set<std::size_t>{hi, lo}) {
            const std::string& id = report.subject_ids[j];
            Matrix avg = prep.cov1.at(id).matrix();
            avg.add_scaled(prep.cov2.at(id).matrix(), 1.0);
            avg.scale(0.5);
            report.patterns[id] =
                spatial::activity_patterns(prep.banks.at(id), linalg::CovMatrix(avg));
            report.pattern_channels[id] = cohort.at(id).channel_names;
        }
    }

    report.trace_hash = fnv1a64(report.selection_trace);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::vector<CohortEntry> load_cohort_index(const std::filesystem::path& dir) {
    const std::filesystem::path manifest = dir / "cohort.json";
    std::ifstream in(manifest, std::ios::binary);
    if (!in)
        throw IoError("cannot open cohort manifest: " + manifest.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("cohort manifest " + manifest.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("subjects") || !j["subjects"].is_array())
        throw FormatError("cohort manifest " + manifest.string() +
                          ": expected an object with a 'subjects' array");
    std::vector<CohortEntry> entries;
    std::set<std::string> seen;
    for (const json& s : j["subjects"]) {
        if (!s.is_object() || !s.contains("id") || !s["id"].is_string() ||
            !s.contains("calibration") || !s["calibration"].is_string())
            throw FormatError("cohort manifest " + manifest.string() +
                              ": each subject needs string 'id' and 'calibration'");
        CohortEntry e;
        e.id = s["id"].get<std::string>();
        e.calibration = dir / s["calibration"].get<std::string>();
        if (s.contains("test")) {
            if (!s["test"].is_string())
                throw FormatError("cohort manifest " + manifest.string() +
                                  ": 'test' must be a string");
            e.test = dir / s["test"].get<std::string>();
        }
        if (s.contains("group")) {
            if (!s["group"].is_string())
                throw FormatError("cohort manifest " + manifest.string() +
                                  ": 'group' must be a string");
            e.group = s["group"].get<std::string>();
        }
        if (!seen.insert(e.id).second)
            throw ValidationError("cohort manifest " + manifest.string() +
                                  ": duplicate subject id '" + e.id + "'");
        entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(),
              [](const CohortEntry& a, const CohortEntry& b) { return a.id < b.id; });
    return entries;
}

std::map<std::string, SubjectInput> load_cohort(const std::filesystem::path& dir,
                                                const ExperimentConfig& config) {
    validate_config(config);
    std::map<std::string, SubjectInput> cohort;
    for (const CohortEntry& entry : load_cohort_index(dir)) {
        SubjectInput si;
        si.id = entry.id;
        si.group = entry.group;
        const signal::Recording calib = preprocess(load_session(entry.calibration), config);
        si.channel_names = calib.channel_names;
        si.calibration = signal::epoch(calib, config.epoch_start_ms, config.epoch_end_ms);
        if (entry.test.empty()) {
            si.test_failure = "no test session listed";
        } else {
            try {
                const signal::Recording test = preprocess(load_session(entry.test), config);
                si.test = signal::epoch(test, config.epoch_start_ms, config.epoch_end_ms);
                si.test_available = true;
            } catch (const Error& e) {
                si.test_failure = e.what();
            }
        }
        cohort.emplace(si.id, std::move(si));
    }
    return cohort;
}

ExperimentReport run_benchmark_files(const std::filesystem::path& cohort_dir,
                                     const ExperimentConfig& config) {
    return run_benchmark(load_cohort(cohort_dir, config), config);
}

synth::CohortSpec parse_cohort_spec(const std::string& text, const std::string& context) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(context + ": " + e.what());
    }
    if (!j.is_object())
        throw FormatError(context + ": cohort spec must be a JSON object");
    const char* const known[] = {"subjects",  "channels",         "sources",
                                 "fs",        "trials_per_class", "trial_ms",
                                 "seed",      "similar_fraction", "class_gain",
                                 "noise_sigma"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* key : known)
            ok = ok || it.key() == key;
        if (!ok)
            throw FormatError(context + ": unknown key '" + it.key() + "'");
    }
    synth::CohortSpec spec;
    auto get_int = [&](const char* key, int& out) {
        if (!j.contains(key))
            return;
        if (!j[key].is_number_integer())
            throw FormatError(context + ": '" + std::string(key) + "' must be an integer");
        out = j[key].get<int>();
    };
    auto get_num = [&](const char* key, double& out) {
        if (!j.contains(key))
            return;
        if (!j[key].is_number())
            throw FormatError(context + ": '" + std::string(key) + "' must be a number");
        out = j[key].get<double>();
    };
    get_int("subjects", spec.subjects);
    get_int("channels", spec.channels);
    get_int("sources", spec.sources);
    get_num("fs", spec.fs);
    get_int("trials_per_class", spec.trials_per_class);
    get_num("trial_ms", spec.trial_ms);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() && !j["seed"].is_number_unsigned())
            throw FormatError(context + ": 'seed' must be a non-negative integer");
        if (j["seed"].is_number_integer() && !j["seed"].is_number_unsigned() &&
            j["seed"].get<std::int64_t>() < 0)
            throw ValidationError(context + ": 'seed' must be non-negative");
        spec.seed = j["seed"].get<std::uint64_t>();
    }
    get_num("similar_fraction", spec.similar_fraction);
    get_num("class_gain", spec.class_gain);
    get_num("noise_sigma", spec.noise_sigma);
    return spec;
}

std::string cohort_spec_to_json(const synth::CohortSpec& spec) {
    return spec_to_json_obj(spec).dump(2) + "\n";
}

std::filesystem::path write_cohort(const std::filesystem::path& dir,
                                   const synth::CohortSpec& spec) {
    std::filesystem::create_directories(dir);
    const std::map<std::string, synth::SubjectData> cohort = synth::generate_cohort(spec);

    json manifest;
    manifest["spec"] = spec_to_json_obj(spec);
    manifest["subjects"] = json::array();
    for (const auto& [id, data] : cohort) {
        save_session(dir / (id + "_calibration"), data.calibration);
        save_session(dir / (id + "_test"), data.test);
        manifest["subjects"].push_back({{"id", id},
                                        {"group", data.model.group},
                                        {"calibration", id + "_calibration.eegmeta.json"},
                                        {"test", id + "_test.eegmeta.json"}});
    }

    const std::filesystem::path manifest_path = dir / "cohort.json";
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open for writing: " + manifest_path.string());
    out << manifest.dump(2) << "\n";
    if (!out)
        throw IoError("write failed: " + manifest_path.string());
    return manifest_path;
}

} // namespace mklcsp::pipeline
