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

// Release gate: one check per shipping criterion, one PASS/FAIL line each,
// exit code = number of failures.  Everything runs from scratch in a
// temporary directory under the working directory.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mklcsp/errors.hpp"
#include "mklcsp/kernels/gram.hpp"
#include "mklcsp/linalg/core.hpp"
#include "mklcsp/linalg/rng.hpp"
#include "mklcsp/mkl/mkl.hpp"
#include "mklcsp/mkl/svm.hpp"
#include "mklcsp/pipeline/config.hpp"
#include "mklcsp/pipeline/experiment.hpp"
#include "mklcsp/pipeline/reports.hpp"
#include "mklcsp/pipeline/session.hpp"
#include "mklcsp/signal/filter.hpp"
#include "mklcsp/signal/recording.hpp"
#include "mklcsp/spatial/csp.hpp"
#include "mklcsp/synth/cohort.hpp"

using namespace mklcsp;
namespace fs = std::filesystem;

namespace {

const fs::path kWorkRoot = "tmp_acceptance";

struct Check {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }

    void note(const std::string& text) {
        if (pass)
            detail = text;
    }
};

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(3);
    out << v;
    return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Matrix random_spd(Rng& rng, std::size_t n) {
    Matrix b(n, n);
    for (std::size_t i = 0; i < b.size(); ++i)
        b.data()[i] = rng.normal();
    Matrix a = matmul_nt(b, b);
    for (std::size_t i = 0; i < n; ++i)
        a(i, i) += 0.5 * static_cast<double>(n);
    return a;
}

// ---------------------------------------------------------------- 1 ----

Check eigensolver_residuals() {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    double worst_resid = 0.0;
    double worst_orth = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 4 + rng.below(29); // dims 4..32
        const linalg::CovMatrix c1(random_spd(rng, n));
        const linalg::CovMatrix c2(random_spd(rng, n));
        const linalg::GenEigResult eig = linalg::gen_eig_sym(c1, c2, 0.0);

        const double scale = frobenius_norm(c1.matrix());
        for (std::size_t k = 0; k < n; ++k) {
            const std::vector<double> w = eig.eigenvectors.column(k);
            double resid_sq = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                double lhs = 0.0;
                double rhs = 0.0;
                for (std::size_t c = 0; c < n; ++c) {
                    lhs += c1.matrix()(r, c) * w[c];
                    rhs += c2.matrix()(r, c) * w[c];
                }
                const double d = lhs - eig.eigenvalues[k] * rhs;
                resid_sq += d * d;
            }
            worst_resid = std::max(worst_resid, std::sqrt(resid_sq) / scale);
        }

        const Matrix wtc2w =
            matmul_tn(eig.eigenvectors, matmul(c2.matrix(), eig.eigenvectors));
        Matrix dev = wtc2w;
        for (std::size_t i = 0; i < n; ++i)
            dev(i, i) -= 1.0;
        worst_orth = std::max(worst_orth, frobenius_norm(dev));
    }
    const double elapsed = seconds_since(t0);
    check.require(worst_resid <= 1e-8, "worst relative residual " + fmt(worst_resid));
    check.require(worst_orth <= 1e-8, "worst C2-orthonormality deviation " + fmt(worst_orth));
    check.require(elapsed < 10.0, "took " + fmt(elapsed) + " s, budget 10 s");
    check.note("100 pencils, max residual " + fmt(worst_resid) + ", max orthonormality " +
               fmt(worst_orth) + ", " + fmt(elapsed) + " s");
    return check;
}

// ---------------------------------------------------------------- 2 ----

Check kl_closed_forms() {
    Check check;
    const Matrix eye2 = [] {
        Matrix m(2, 2);
        m(0, 0) = m(1, 1) = 1.0;
        return m;
    }();
    Matrix twice = eye2;
    twice.scale(2.0);

    const linalg::Gaussian std2({0.0, 0.0}, linalg::CovMatrix(eye2));
    const linalg::Gaussian shifted({1.0, 0.0}, linalg::CovMatrix(eye2));
    const linalg::Gaussian wide({0.0, 0.0}, linalg::CovMatrix(twice));

    const double same = linalg::kl_gaussian(std2, std2);
    const double shift = linalg::kl_gaussian(shifted, std2);
    const double scalekl = linalg::kl_gaussian(std2, wide);
    const double expect_scale = 0.5 * (2.0 * std::log(2.0) - 1.0);

    check.require(std::abs(same) <= 1e-10, "identical Gaussians gave " + fmt(same));
    check.require(std::abs(shift - 0.5) <= 1e-10, "unit mean shift gave " + fmt(shift));
    check.require(std::abs(scalekl - expect_scale) <= 1e-10,
                  "doubled covariance gave " + fmt(scalekl) + ", want " + fmt(expect_scale));
    check.note("identical 0, shift 0.5, doubled covariance (2ln2-1)/2, all within 1e-10");
    return check;
}

// ---------------------------------------------------------------- 3 ----

Check filter_edge_gains() {
    Check check;
    const signal::BandpassFilter filt = signal::design_butterworth_bandpass(5, 8.0, 30.0, 100.0);
    const double edge = 1.0 / std::sqrt(2.0);
    const double low = filt.magnitude(8.0);
    const double high = filt.magnitude(30.0);
    const double dc = filt.magnitude(0.0);
    const double nyq = filt.magnitude(50.0);
    check.require(std::abs(low - edge) <= 1e-6, "|H(8)| = " + fmt(low));
    check.require(std::abs(high - edge) <= 1e-6, "|H(30)| = " + fmt(high));
    check.require(dc < 1e-6, "|H(0)| = " + fmt(dc));
    check.require(nyq < 1e-6, "|H(50)| = " + fmt(nyq));
    check.note("both edges at 1/sqrt(2) within 1e-6, DC/Nyquist below 1e-6");
    return check;
}

// ---------------------------------------------------------------- 4 ----

double dual_objective(const std::vector<double>& alphas, const Matrix& q) {
    const std::size_t n = alphas.size();
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        obj += alphas[i];
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row += q(i, j) * alphas[j];
        obj -= 0.5 * alphas[i] * row;
    }
    return obj;
}

// Progressively refined grid search over the dual box.  Seven alphas are
// free grid coordinates; the eighth is pinned by the equality constraint.
// Each level lays a 5-point grid per coordinate around the incumbent and
// halves the span, which converges on the concave dual's maximum.
double grid_dual_maximum(const Matrix& q, const std::vector<int>& labels, double c) {
    const std::size_t n = labels.size();
    const std::size_t free_dims = n - 1;
    std::vector<double> center(free_dims, c / 2.0);
    double span = c / 2.0;
    std::vector<double> alphas(n, 0.0);
    double best = 0.0; // alpha = 0 is always feasible

    std::size_t combos = 1;
    for (std::size_t d = 0; d < free_dims; ++d)
        combos *= 5;
    const double offsets[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};

    for (int level = 0; level < 26; ++level) {
        std::vector<double> best_center = center;
        for (std::size_t code = 0; code < combos; ++code) {
            std::size_t rest = code;
            double constraint = 0.0;
            for (std::size_t d = 0; d < free_dims; ++d) {
                const double v =
                    std::clamp(center[d] + offsets[rest % 5] * span, 0.0, c);
                rest /= 5;
                alphas[d] = v;
                constraint += labels[d] * v;
            }
            // sum_i y_i a_i = 0  =>  a_last = -y_last * sum_{i<last} y_i a_i
            const double pinned = -static_cast<double>(labels[n - 1]) * constraint;
            if (pinned < 0.0 || pinned > c)
                continue;
            alphas[n - 1] = pinned;
            const double obj = dual_objective(alphas, q);
            if (obj > best) {
                best = obj;
                best_center.assign(alphas.begin(), alphas.begin() + free_dims);
            }
        }
        center = best_center;
        span *= 0.55;
    }
    return best;
}

Check svm_grid_oracle() {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(404);
    double worst = 0.0;
    for (int problem = 0; problem < 20; ++problem) {
        const std::size_t n = 8;
        Matrix feats(n, 3);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = i < n / 2 ? +1 : -1;
            for (std::size_t d = 0; d < 3; ++d)
                feats(i, d) = rng.normal() + (labels[i] > 0 ? 0.7 : -0.7);
        }
        for (std::size_t i = n; i > 1; --i)
            std::swap(labels[i - 1], labels[rng.below(i)]);

        const double c_values[3] = {0.3, 1.0, 10.0};
        const double c = c_values[problem % 3];
        const kernels::KernelMatrix kernel =
            kernels::normalize_avg_diag(kernels::linear_kernel(feats));
        Matrix q(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                q(i, j) = labels[i] * labels[j] * kernel.k(i, j);

        const mkl::SvmSolution sol = mkl::svm_dual_solve(kernel, labels, c);
        const double solver_obj = dual_objective(sol.alphas, q);
        const double grid_obj = grid_dual_maximum(q, labels, c);
        worst = std::max(worst, std::abs(solver_obj - grid_obj));
    }
    const double elapsed = seconds_since(t0);
    check.require(worst <= 1e-4, "worst dual objective gap " + fmt(worst));
    check.require(elapsed < 60.0, "took " + fmt(elapsed) + " s, budget 60 s");
    check.note("20 problems, worst dual gap " + fmt(worst) + ", " + fmt(elapsed) + " s");
    return check;
}

// ---------------------------------------------------------------- 5 ----

// Two-class feature clouds split into train/test blocks per view.
struct MklFixture {
    std::vector<Matrix> train;
    std::vector<Matrix> test;
    std::vector<int> labels;
    std::vector<std::string> ids;
};

MklFixture mkl_fixture(Rng& rng, std::size_t n_train, std::size_t n_test,
                       const std::vector<std::size_t>& view_dims) {
    MklFixture fx;
    const std::size_t total = n_train + n_test;
    std::vector<int> all_labels(total);
    for (std::size_t i = 0; i < total; ++i)
        all_labels[i] = i % 2 == 0 ? +1 : -1;
    for (std::size_t v = 0; v < view_dims.size(); ++v) {
        Matrix block(total, view_dims[v]);
        for (std::size_t i = 0; i < total; ++i)
            for (std::size_t d = 0; d < view_dims[v]; ++d)
                block(i, d) = 0.4 * rng.normal() + (all_labels[i] > 0 ? 1.0 : -1.0);
        Matrix train(n_train, view_dims[v]);
        Matrix test(n_test, view_dims[v]);
        for (std::size_t i = 0; i < n_train; ++i)
            for (std::size_t d = 0; d < view_dims[v]; ++d)
                train(i, d) = block(i, d);
        for (std::size_t i = 0; i < n_test; ++i)
            for (std::size_t d = 0; d < view_dims[v]; ++d)
                test(i, d) = block(n_train + i, d);
        fx.train.push_back(std::move(train));
        fx.test.push_back(std::move(test));
        fx.ids.push_back("view" + std::to_string(v + 1));
    }
    fx.labels.assign(all_labels.begin(), all_labels.begin() + n_train);
    return fx;
}

std::vector<double> svm_decisions(const Matrix& train, const Matrix& test,
                                  const mkl::SvmSolution& sol,
                                  const std::vector<int>& labels, double norm_factor) {
    const Matrix cross = kernels::cross_kernel(train, test, norm_factor);
    std::vector<double> out(test.rows(), sol.bias);
    for (std::size_t t = 0; t < test.rows(); ++t)
        for (std::size_t i = 0; i < train.rows(); ++i)
            out[t] += sol.alphas[i] * labels[i] * cross(t, i);
    return out;
}

Check mkl_reductions() {
    Check check;
    Rng rng(505);

    { // (a) single view at p = 2 equals the plain SVM.
        const MklFixture fx = mkl_fixture(rng, 30, 12, {4});
        const mkl::MklModel model =
            mkl::mkl_train(fx.train, fx.ids, fx.labels, 1.0, 2.0);
        const kernels::KernelMatrix kernel =
            kernels::normalize_avg_diag(kernels::linear_kernel(fx.train[0]));
        const mkl::SvmSolution sol = mkl::svm_dual_solve(kernel, fx.labels, 1.0);
        const std::vector<double> mine = mkl::mkl_predict(model, fx.test);
        const std::vector<double> ref =
            svm_decisions(fx.train[0], fx.test[0], sol, fx.labels, kernel.norm_factor);
        double gap = 0.0;
        for (std::size_t i = 0; i < mine.size(); ++i)
            gap = std::max(gap, std::abs(mine[i] - ref[i]));
        check.require(gap <= 1e-10, "single-view decision gap " + fmt(gap));
    }

    { // (b) p = infinity equals the unweighted sum-kernel SVM.
        const MklFixture fx = mkl_fixture(rng, 30, 12, {3, 5});
        const double inf = std::numeric_limits<double>::infinity();
        const mkl::MklModel model = mkl::mkl_train(fx.train, fx.ids, fx.labels, 2.0, inf);

        kernels::KernelStack stack;
        stack.view_ids = fx.ids;
        for (const Matrix& block : fx.train)
            stack.kernels.push_back(kernels::normalize_avg_diag(kernels::linear_kernel(block)));
        const kernels::KernelMatrix summed = mkl::combine_kernels(stack, {1.0, 1.0});
        const mkl::SvmSolution sol = mkl::svm_dual_solve(summed, fx.labels, 2.0);

        const std::vector<double> mine = mkl::mkl_predict(model, fx.test);
        std::vector<double> ref(fx.test[0].rows(), sol.bias);
        for (std::size_t v = 0; v < 2; ++v) {
            const Matrix cross = kernels::cross_kernel(fx.train[v], fx.test[v],
                                                       stack.kernels[v].norm_factor);
            for (std::size_t t = 0; t < ref.size(); ++t)
                for (std::size_t i = 0; i < fx.labels.size(); ++i)
                    ref[t] += sol.alphas[i] * fx.labels[i] * cross(t, i);
        }
        double gap = 0.0;
        for (std::size_t i = 0; i < mine.size(); ++i)
            gap = std::max(gap, std::abs(mine[i] - ref[i]));
        check.require(gap <= 1e-4, "sum-kernel decision gap " + fmt(gap));
    }

    { // (c) two identical kernels at p = 2 split the weight evenly.
        const MklFixture fx = mkl_fixture(rng, 30, 4, {4});
        const std::vector<Matrix> twin = {fx.train[0], fx.train[0]};
        const mkl::MklModel model =
            mkl::mkl_train(twin, {"a", "b"}, fx.labels, 1.0, 2.0);
        const double want = 1.0 / std::sqrt(2.0);
        check.require(std::abs(model.betas[0] - want) <= 1e-6 &&
                          std::abs(model.betas[1] - want) <= 1e-6,
                      "identical-kernel betas " + fmt(model.betas[0]) + ", " +
                          fmt(model.betas[1]));
    }

    { // (d) finite p converges onto the unit lp sphere.
        MklFixture fx = mkl_fixture(rng, 40, 4, {4, 3});
        for (std::size_t i = 0; i < fx.train[1].size(); ++i)
            fx.train[1].data()[i] = rng.normal(); // second view pure noise
        const double p = 1.333;
        const mkl::MklModel model = mkl::mkl_train(fx.train, fx.ids, fx.labels, 1.0, p);
        double norm = 0.0;
        for (double b : model.betas)
            norm += std::pow(std::abs(b), p);
        norm = std::pow(norm, 1.0 / p);
        check.require(std::abs(norm - 1.0) <= 1e-6, "lp norm of beta " + fmt(norm));
        check.require(model.converged, "finite-p training did not converge");
    }

    check.note("single-view, sum-kernel, even-split and lp-norm reductions all hold");
    return check;
}

// ---------------------------------------------------------------- 6 ----

std::map<std::string, pipeline::SubjectInput> memory_cohort(const synth::CohortSpec& spec) {
    std::map<std::string, pipeline::SubjectInput> cohort;
    for (const auto& [id, data] : synth::generate_cohort(spec)) {
        pipeline::SubjectInput si;
        si.id = id;
        si.group = data.model.group;
        si.channel_names = data.calibration.channel_names;
        si.calibration = signal::epoch(data.calibration, 0.0, spec.trial_ms);
        si.test = signal::epoch(data.test, 0.0, spec.trial_ms);
        si.test_available = true;
        cohort.emplace(id, std::move(si));
    }
    return cohort;
}

void split_by_class(const std::vector<signal::Trial>& trials, std::vector<Matrix>& pos,
                    std::vector<Matrix>& neg) {
    for (const signal::Trial& t : trials)
        (t.label == +1 ? pos : neg).push_back(t.data);
}

Check ccsp_zero_lambda_reduction() {
    Check check;
    synth::CohortSpec spec;
    spec.subjects = 3;
    spec.channels = 8;
    spec.sources = 8;
    spec.trials_per_class = 15;
    spec.seed = 606;
    const auto cohort = memory_cohort(spec);

    // Filters: lambda = 0 composite equals plain CSP up to column sign.
    std::vector<Matrix> pos;
    std::vector<Matrix> neg;
    split_by_class(cohort.at("s01").calibration, pos, neg);
    std::map<std::string, linalg::CovMatrix> others1;
    std::map<std::string, linalg::CovMatrix> others2;
    for (const auto& [id, input] : cohort) {
        if (id == "s01")
            continue;
        std::vector<Matrix> opos;
        std::vector<Matrix> oneg;
        split_by_class(input.calibration, opos, oneg);
        others1.emplace(id, linalg::class_covariance(opos));
        others2.emplace(id, linalg::class_covariance(oneg));
    }
    const spatial::FilterBank plain =
        spatial::fit_csp(linalg::class_covariance(pos), linalg::class_covariance(neg), "s01");
    const spatial::FilterBank composite =
        spatial::fit_ccsp(pos, neg, others1, others2, 0.0, "s01");
    double worst_cos = 1.0;
    for (std::size_t k = 0; k < spatial::kFiltersPerBank; ++k) {
        double dot = 0.0;
        double na = 0.0;
        double nb = 0.0;
        for (std::size_t r = 0; r < plain.filters.rows(); ++r) {
            dot += plain.filters(r, k) * composite.filters(r, k);
            na += plain.filters(r, k) * plain.filters(r, k);
            nb += composite.filters(r, k) * composite.filters(r, k);
        }
        worst_cos = std::min(worst_cos, std::abs(dot) / std::sqrt(na * nb));
    }
    check.require(worst_cos >= 1.0 - 1e-12,
                  "filter cosine dropped to " + fmt(worst_cos) + " at lambda 0");

    // Cross-validated error: exact equality on the shared folds.
    pipeline::ExperimentConfig config = pipeline::default_config();
    config.lambda_grid = {0.0};
    config.c_grid = {0.5, 2.0};
    config.p_grid = {2.0};
    config.seed = 7;
    bool equal = true;
    for (const auto& [lhs, rhs] :
         {std::pair{pipeline::Method::ccsp_lda, pipeline::Method::csp_lda},
          std::pair{pipeline::Method::ccsp_svm, pipeline::Method::csp_svm}}) {
        for (const auto& [id, input] : cohort) {
            const pipeline::MethodResult ccsp = pipeline::run_subject(lhs, id, cohort, config);
            const pipeline::MethodResult csp = pipeline::run_subject(rhs, id, cohort, config);
            equal = equal && ccsp.ok && csp.ok && ccsp.cv_error == csp.cv_error &&
                    ccsp.test_error == csp.test_error;
        }
    }
    check.require(equal, "cross-validated or test errors diverged at lambda 0");
    check.note("filters match up to sign (min |cos| " + fmt(worst_cos) +
               "), CV errors exactly equal");
    return check;
}

// ---------------------------------------------------------------- 7 ----

Check planted_recovery() {
    Check check;
    synth::CohortSpec spec;
    spec.subjects = 2;
    spec.channels = 8;
    spec.sources = 8;
    spec.trials_per_class = 50;
    spec.noise_sigma = 0.0;
    spec.class_gain = 4.0;
    spec.seed = 707;
    const auto generated = synth::generate_cohort(spec);
    const synth::SubjectData& subject = generated.at("s01");

    std::vector<Matrix> pos;
    std::vector<Matrix> neg;
    const auto calib = signal::epoch(subject.calibration, 0.0, spec.trial_ms);
    split_by_class(calib, pos, neg);
    const spatial::FilterBank bank =
        spatial::fit_csp(linalg::class_covariance(pos), linalg::class_covariance(neg), "s01");

    const std::vector<double> truth =
        synth::unmixing_row(subject.model, subject.model.source_pos);
    const std::vector<double> top = bank.filters.column(0);
    double dot = 0.0;
    double nt = 0.0;
    double nw = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        dot += truth[i] * top[i];
        nt += truth[i] * truth[i];
        nw += top[i] * top[i];
    }
    const double cosine = std::abs(dot) / std::sqrt(nt * nw);
    check.require(cosine >= 0.95, "top filter |cosine| " + fmt(cosine));

    auto cohort = memory_cohort(spec);
    cohort.erase("s02");
    pipeline::ExperimentConfig config = pipeline::default_config();
    config.methods = {pipeline::Method::csp_lda};
    config.seed = 3;
    const pipeline::MethodResult result =
        pipeline::run_subject(pipeline::Method::csp_lda, "s01", cohort, config);
    const double bayes = synth::bayes_reference_error(
        subject.model, signal::epoch(subject.test, 0.0, spec.trial_ms));
    check.require(result.ok, "csp-lda arm failed: " + result.message);
    check.require(result.test_error <= bayes + 0.05,
                  "test error " + fmt(result.test_error) + " vs oracle " + fmt(bayes));
    check.note("top-filter |cosine| " + fmt(cosine) + ", test error " +
               fmt(result.test_error) + " vs oracle " + fmt(bayes));
    return check;
}

// ------------------------------------------------------------- 8, 9 ----

struct BenchArtifacts {
    bool ready = false;
    fs::path cohort_dir;
    fs::path out_dir;
    pipeline::ExperimentConfig config;
    pipeline::ExperimentReport report;
};

BenchArtifacts g_bench;

// The pinned benchmark: default desk-scale cohort, target calibration
// truncated to 20 trials, full default hyperparameter grids.
synth::CohortSpec pinned_cohort_spec() {
    synth::CohortSpec spec; // defaults: 10 subjects, 16 channels, 50/class
    spec.seed = 11;
    return spec;
}

Check transfer_benefit() {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();

    g_bench.cohort_dir = kWorkRoot / "benchmark_cohort";
    g_bench.out_dir = kWorkRoot / "benchmark_out";
    fs::create_directories(g_bench.cohort_dir);
    pipeline::write_cohort(g_bench.cohort_dir, pinned_cohort_spec());

    g_bench.config = pipeline::default_config();
    g_bench.config.seed = 11;
    g_bench.config.target_calib_trials = 20;

    g_bench.report = pipeline::run_benchmark_files(g_bench.cohort_dir, g_bench.config);
    pipeline::emit_reports(g_bench.report, g_bench.out_dir);
    g_bench.ready = true;

    std::map<std::string, std::vector<double>> errors;
    for (const pipeline::MethodResult& r : g_bench.report.results) {
        check.require(r.ok, r.subject + "/" + r.method + " failed: " + r.message);
        errors[r.method].push_back(r.test_error);
    }
    const auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    const double mkl_mean = mean(errors["mkl"]);
    const double svm_mean = mean(errors["csp-svm"]);
    check.require(mkl_mean <= svm_mean, "mean error mkl " + fmt(mkl_mean) + " vs csp-svm " +
                                            fmt(svm_mean));

    // Kernel weight mass by similarity group, averaged over targets.  The
    // target's own view sits on the diagonal and belongs to neither side.
    const auto& ids = g_bench.report.subject_ids;
    double similar_total = 0.0;
    double dissimilar_total = 0.0;
    double similar_count = 0.0;
    double dissimilar_count = 0.0;
    for (std::size_t t = 0; t < ids.size(); ++t) {
        for (std::size_t c = 0; c < ids.size(); ++c) {
            if (t == c)
                continue;
            const double w = g_bench.report.beta_matrix(t, c);
            if (g_bench.report.groups.at(ids[c]) == "similar") {
                similar_total += w;
                similar_count += 1.0;
            } else {
                dissimilar_total += w;
                dissimilar_count += 1.0;
            }
        }
    }
    similar_total /= static_cast<double>(ids.size());
    dissimilar_total /= static_cast<double>(ids.size());
    check.require(similar_total > dissimilar_total,
                  "similar-group beta mass " + fmt(similar_total) + " vs dissimilar " +
                      fmt(dissimilar_total));
    const double per_similar = similar_total * static_cast<double>(ids.size()) / similar_count;
    const double per_dissimilar =
        dissimilar_total * static_cast<double>(ids.size()) / dissimilar_count;
    check.require(per_similar > per_dissimilar,
                  "per-subject beta " + fmt(per_similar) + " vs " + fmt(per_dissimilar));

    const double elapsed = seconds_since(t0);
    check.require(elapsed < 900.0, "took " + fmt(elapsed) + " s, budget 900 s");
    check.note("mean error mkl " + fmt(mkl_mean) + " <= csp-svm " + fmt(svm_mean) +
               ", beta mass similar " + fmt(similar_total) + " > dissimilar " +
               fmt(dissimilar_total) + " (per subject " + fmt(per_similar) + " vs " +
               fmt(per_dissimilar) + "), " + fmt(elapsed) + " s");
    return check;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + p.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Check determinism_and_leakage() {
    Check check;
    if (!g_bench.ready) {
        check.require(false, "benchmark artifacts unavailable (criterion 8 failed early)");
        return check;
    }

    // Rerun: byte-identical errors.csv.
    const pipeline::ExperimentReport rerun =
        pipeline::run_benchmark_files(g_bench.cohort_dir, g_bench.config);
    const fs::path rerun_dir = kWorkRoot / "benchmark_rerun";
    pipeline::emit_reports(rerun, rerun_dir);
    const bool same_bytes =
        slurp(rerun_dir / "errors.csv") == slurp(g_bench.out_dir / "errors.csv");
    check.require(same_bytes, "rerun errors.csv differs byte-wise");

    // Blind run: no test sessions on disk, identical selection trace.
    for (const std::string& id : g_bench.report.subject_ids) {
        fs::remove(g_bench.cohort_dir / (id + "_test.eegdata"));
        fs::remove(g_bench.cohort_dir / (id + "_test.eegmeta.json"));
    }
    const pipeline::ExperimentReport blind =
        pipeline::run_benchmark_files(g_bench.cohort_dir, g_bench.config);
    check.require(blind.trace_hash == g_bench.report.trace_hash,
                  "selection trace hash changed after deleting test sessions");
    check.note("errors.csv byte-identical on rerun, trace hash stable without test data");
    return check;
}

// --------------------------------------------------------------- 10 ----

void put_u32(std::string& bytes, std::size_t offset, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        bytes[offset + i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_u64(std::string& bytes, std::size_t offset, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        bytes[offset + i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

void spew(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

enum class ErrKind { format, validation, io };

Check format_robustness() {
    Check check;
    const fs::path dir = kWorkRoot / "sessions";
    fs::create_directories(dir);

    signal::Recording rec;
    rec.fs = 100.0;
    rec.channel_names = {"C3", "Cz", "C4"};
    rec.data = Matrix(3, 400);
    Rng rng(808);
    for (std::size_t i = 0; i < rec.data.size(); ++i)
        rec.data.data()[i] = rng.normal();
    rec.markers = {{5, +1}, {200, -1}, {390, +1}};
    pipeline::save_session(dir / "session", rec);

    // Bit-exact round trip.
    const signal::Recording back = pipeline::load_session(dir / "session");
    bool identical = back.fs == rec.fs && back.channel_names == rec.channel_names &&
                     back.markers.size() == rec.markers.size() &&
                     back.data.rows() == rec.data.rows() && back.data.cols() == rec.data.cols();
    for (std::size_t i = 0; identical && i < rec.markers.size(); ++i)
        identical = back.markers[i].sample == rec.markers[i].sample &&
                    back.markers[i].label == rec.markers[i].label;
    for (std::size_t i = 0; identical && i < rec.data.size(); ++i)
        identical = std::bit_cast<std::uint64_t>(back.data.data()[i]) ==
                    std::bit_cast<std::uint64_t>(rec.data.data()[i]);
    check.require(identical, "round trip is not bit-exact");

    const std::string meta = slurp(dir / "session.eegmeta.json");
    const std::string data = slurp(dir / "session.eegdata");

    // One corruption per entry: mutated session bytes and the error class
    // the loader must produce.
    struct Case {
        std::string name;
        std::string meta;
        std::string data;
        ErrKind kind;
    };
    std::vector<Case> cases;
    const auto data_case = [&](const std::string& name, std::string bytes, ErrKind kind) {
        cases.push_back({name, meta, std::move(bytes), kind});
    };
    const auto meta_case = [&](const std::string& name, const std::string& text,
                               ErrKind kind) { cases.push_back({name, text, data, kind}); };

    data_case("truncated header", data.substr(0, 10), ErrKind::format);
    data_case("empty data file", "", ErrKind::format);
    data_case("short payload", data.substr(0, data.size() - 8), ErrKind::format);
    data_case("long payload", data + std::string(16, '\7'), ErrKind::format);
    std::string bytes = data;
    bytes[0] = 'X';
    data_case("bad magic", bytes, ErrKind::format);
    bytes = data;
    put_u32(bytes, 4, 3);
    data_case("bad version", bytes, ErrKind::format);
    bytes = data;
    put_u32(bytes, 8, 0);
    data_case("zero channels", bytes, ErrKind::validation);
    bytes = data;
    put_u64(bytes, 12, 0);
    data_case("zero samples", bytes, ErrKind::validation);
    bytes = data;
    put_u32(bytes, 8, 0xffffffffu);
    put_u64(bytes, 12, std::uint64_t{1} << 61);
    data_case("implausible shape", bytes, ErrKind::format);
    bytes = data;
    put_u32(bytes, 8, 4);
    put_u64(bytes, 12, 300);
    data_case("channel count mismatch", bytes, ErrKind::validation);
    bytes = data;
    put_u64(bytes, 20, 0x7ff8000000000000ull);
    data_case("non-finite sample", bytes, ErrKind::validation);

    meta_case("metadata not json", "{nope", ErrKind::format);
    meta_case("metadata array root", "[3]", ErrKind::format);
    meta_case("missing fs", R"({"channel_names":["a","b","c"],"markers":[],)"
                            R"("data_file":"session.eegdata"})",
              ErrKind::format);
    meta_case("fs wrong type", R"({"fs":"100","channel_names":["a","b","c"],"markers":[],)"
                               R"("data_file":"session.eegdata"})",
              ErrKind::format);
    meta_case("fs out of range", R"({"fs":0,"channel_names":["a","b","c"],"markers":[],)"
                                 R"("data_file":"session.eegdata"})",
              ErrKind::validation);
    meta_case("duplicate channel names",
              R"({"fs":100,"channel_names":["a","a","c"],"markers":[],)"
              R"("data_file":"session.eegdata"})",
              ErrKind::validation);
    meta_case("marker label out of set",
              R"({"fs":100,"channel_names":["a","b","c"],)"
              R"("markers":[{"sample":5,"label":3}],"data_file":"session.eegdata"})",
              ErrKind::validation);
    meta_case("marker beyond recording",
              R"({"fs":100,"channel_names":["a","b","c"],)"
              R"("markers":[{"sample":400,"label":1}],"data_file":"session.eegdata"})",
              ErrKind::validation);
    meta_case("negative marker sample",
              R"({"fs":100,"channel_names":["a","b","c"],)"
              R"("markers":[{"sample":-2,"label":1}],"data_file":"session.eegdata"})",
              ErrKind::validation);
    meta_case("dangling data_file",
              R"({"fs":100,"channel_names":["a","b","c"],"markers":[],)"
              R"("data_file":"gone.eegdata"})",
              ErrKind::io);

    check.require(cases.size() >= 20,
                  "only " + std::to_string(cases.size()) + " corruption cases");

    std::size_t ran = 0;
    for (const Case& c : cases) {
        const fs::path case_dir = dir / ("case_" + std::to_string(ran++));
        fs::create_directories(case_dir);
        spew(case_dir / "session.eegmeta.json", c.meta);
        spew(case_dir / "session.eegdata", c.data);
        bool as_designated = false;
        std::string unexpected;
        try {
            (void)pipeline::load_session(case_dir / "session");
            unexpected = "loaded without error";
        } catch (const FormatError&) {
            as_designated = c.kind == ErrKind::format;
            unexpected = "FormatError";
        } catch (const ValidationError&) {
            as_designated = c.kind == ErrKind::validation;
            unexpected = "ValidationError";
        } catch (const IoError&) {
            as_designated = c.kind == ErrKind::io;
            unexpected = "IoError";
        } catch (const std::exception& e) {
            unexpected = std::string("unexpected exception: ") + e.what();
        }
        check.require(as_designated, "case '" + c.name + "': got " + unexpected);
    }
    check.note("round trip bit-exact; " + std::to_string(cases.size()) +
               " corruption cases hit their designated error class");
    return check;
}

} // namespace

int main() {
    std::error_code ignored;
    fs::remove_all(kWorkRoot, ignored);
    fs::create_directories(kWorkRoot);

    struct Criterion {
        int number;
        std::string label;
        std::function<Check()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "generalized eigensolver residuals", eigensolver_residuals},
        {2, "Gaussian KL closed forms", kl_closed_forms},
        {3, "bandpass edge and stopband gains", filter_edge_gains},
        {4, "SVM dual against grid-search oracle", svm_grid_oracle},
        {5, "MKL reduction chain", mkl_reductions},
        {6, "composite CSP at lambda zero", ccsp_zero_lambda_reduction},
        {7, "planted-source recovery", planted_recovery},
        {8, "transfer benefit on the pinned benchmark", transfer_benefit},
        {9, "determinism and selection leakage", determinism_and_leakage},
        {10, "session format robustness", format_robustness},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        Check check;
        try {
            check = criterion.run();
        } catch (const std::exception& e) {
            check.pass = false;
            check.detail = std::string("exception: ") + e.what();
        }
        if (check.pass) {
            std::cout << "PASS criterion " << criterion.number << ": " << criterion.label
                      << " (" << check.detail << ")\n";
        } else {
            ++failures;
            std::cout << "FAIL criterion " << criterion.number << ": " << criterion.label
                      << ": " << check.detail << "\n";
        }
        std::cout.flush();
    }
    return failures;
}
