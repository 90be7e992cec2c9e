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

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mklcsp/linalg/core.hpp"
#include "mklcsp/pipeline/config.hpp"
#include "mklcsp/signal/recording.hpp"
#include "mklcsp/spatial/csp.hpp"
#include "mklcsp/synth/cohort.hpp"

namespace mklcsp::pipeline {

/// FNV-1a 64-bit hash; used for the hyperparameter selection trace.
std::uint64_t fnv1a64(std::string_view bytes);

/// k disjoint index sets covering 0..labels.size()-1, class proportions
/// per fold within one trial of the global proportions, deterministic per
/// seed.  Any class with fewer than k members is an error.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, int k,
                                                       std::uint64_t seed);

/// One subject's preprocessed data as the benchmark consumes it: epoched
/// band-passed calibration and test trials.  `test_available` is false
/// when the test session could not be loaded (the benchmark still runs
/// model selection and records the failure).
struct SubjectInput {
    std::string id;
    std::string group;
    std::vector<std::string> channel_names;
    std::vector<signal::Trial> calibration;
    std::vector<signal::Trial> test;
    bool test_available = false;
    std::string test_failure;
};

/// Per-subject quantities that act as fixed prior knowledge for every
/// other target: class covariances and the CSP bank, estimated once from
/// the subject's full calibration session.
struct PreparedCohort {
    std::map<std::string, linalg::CovMatrix> cov1;
    std::map<std::string, linalg::CovMatrix> cov2;
    std::map<std::string, spatial::FilterBank> banks;
};

PreparedCohort prepare_cohort(const std::map<std::string, SubjectInput>& cohort);

/// Outcome of one (subject, method) cell.  `ok` means a test error was
/// produced; selection results (chosen grid point, CV error) are filled
/// whenever selection itself succeeded.  Hyperparameters that do not
/// apply to the method stay NaN.
struct MethodResult {
    std::string subject;
    std::string method;
    bool ok = false;
    std::string message;
    double test_error = std::numeric_limits<double>::quiet_NaN();
    double cv_error = std::numeric_limits<double>::quiet_NaN();
    long cv_misses = -1;
    double chosen_c = std::numeric_limits<double>::quiet_NaN();
    double chosen_p = std::numeric_limits<double>::quiet_NaN();
    double chosen_lambda = std::numeric_limits<double>::quiet_NaN();
    /// Kernel weights of the final model (mkl only), one per view in
    /// `view_ids` order; the target's own view is included.
    std::vector<std::string> view_ids;
    std::vector<double> betas;
};

/// Full benchmark output.  beta_matrix row t holds the final mkl kernel
/// weights of target t over all subjects (own view on the diagonal);
/// alpha_matrix row t holds the class-averaged similarity weights over
/// the other subjects (structurally zero diagonal).  Matrices are stored
/// raw; report emission zeroes the diagonals.
struct ExperimentReport {
    ExperimentConfig config;
    std::vector<std::string> subject_ids;
    std::map<std::string, std::string> groups;
    std::vector<MethodResult> results;
    Matrix beta_matrix;
    Matrix alpha_matrix;
    /// Activity patterns (channels x 6) of selected subjects, keyed by id.
    std::map<std::string, Matrix> patterns;
    std::map<std::string, std::vector<std::string>> pattern_channels;
    std::string selection_trace;
    std::uint64_t trace_hash = 0;
    double wall_seconds = 0.0;
};

/// Runs one method arm for one target: stratified CV grid search on the
/// (possibly truncated) calibration trials, final refit on all of them,
/// evaluation on the test trials.  Within each fold the target's filters
/// and kernel normalizations come from that fold's training portion only;
/// other subjects contribute their full-calibration banks and covariances
/// via `prepared` (computed on the fly when null).  Selection decisions
/// are appended to `trace` when given.
MethodResult run_subject(Method method, const std::string& target_id,
                         const std::map<std::string, SubjectInput>& cohort,
                         const ExperimentConfig& config,
                         const PreparedCohort* prepared = nullptr,
                         std::string* trace = nullptr);

/// Every target x every configured method.  Per-cell failures are
/// recorded and the benchmark continues.
ExperimentReport run_benchmark(const std::map<std::string, SubjectInput>& cohort,
                               const ExperimentConfig& config);

/// Cohort manifest entry (cohort.json in a cohort directory).
struct CohortEntry {
    std::string id;
    std::string group;
    std::filesystem::path calibration;
    std::filesystem::path test;
};

std::vector<CohortEntry> load_cohort_index(const std::filesystem::path& dir);

/// Loads and preprocesses every subject per the config: channel
/// selection, band-pass, epoching.  A missing or corrupt test session is
/// recorded on the SubjectInput instead of failing the load.
std::map<std::string, SubjectInput> load_cohort(const std::filesystem::path& dir,
                                                const ExperimentConfig& config);

ExperimentReport run_benchmark_files(const std::filesystem::path& cohort_dir,
                                     const ExperimentConfig& config);

/// Parses a synthetic cohort spec from JSON (all fields optional, unknown
/// keys rejected): subjects, channels, sources, fs, trials_per_class,
/// trial_ms, seed, similar_fraction, class_gain, noise_sigma.
synth::CohortSpec parse_cohort_spec(const std::string& text, const std::string& context);

std::string cohort_spec_to_json(const synth::CohortSpec& spec);

/// Generates the cohort and writes one calibration and one test session
/// per subject plus the cohort.json manifest; returns the manifest path.
std::filesystem::path write_cohort(const std::filesystem::path& dir,
                                   const synth::CohortSpec& spec);

} // namespace mklcsp::pipeline
