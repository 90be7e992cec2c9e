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
#include <string>
#include <vector>

namespace mklcsp::pipeline {

/// The five benchmark arms.  csp-* train on the target alone, ccsp-*
/// regularize the target's covariances toward similarity-weighted other
/// subjects, and mkl learns per-subject kernel weights inside the SVM.
enum class Method { csp_lda, csp_svm, ccsp_lda, ccsp_svm, mkl };

std::string method_name(Method m);
Method parse_method(const std::string& name);

/// Benchmark configuration.  config.json mirrors these fields one to one
/// (snake_case keys); unknown keys are rejected.  In JSON, the p grid
/// accepts the string "inf" for the unweighted sum-kernel limit.
struct ExperimentConfig {
    double band_low_hz = 8.0;
    double band_high_hz = 30.0;
    int filter_order = 5;
    double epoch_start_ms = 750.0;
    double epoch_end_ms = 3500.0;
    /// Channel names to keep; empty keeps all channels.
    std::vector<std::string> channels;
    int folds = 5;
    std::vector<double> c_grid;
    std::vector<double> p_grid;
    std::vector<double> lambda_grid;
    double lda_gamma = 0.05;
    std::uint64_t seed = 1;
    std::vector<Method> methods;
    /// When positive, the target's calibration session is truncated to
    /// this many trials (stratified, in temporal order) before model
    /// selection; other subjects always contribute their full sessions.
    int target_calib_trials = 0;
};

/// All defaults filled in: 8-30 Hz order 5, 750-3500 ms epochs, 5 folds,
/// C in 10^{-2..2} (half-decade steps), p in {1, 1.125, 1.333, 2, inf},
/// lambda in {0, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.2, ..., 1}, all methods.
ExperimentConfig default_config();

/// Parses JSON text; missing fields keep their defaults.  FormatError on
/// malformed JSON, wrong types, or unknown keys; ValidationError on
/// out-of-range values.  `context` names the source in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& context);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Range checks (grids non-empty and in range, folds >= 2, valid epoch
/// window and band); throws ValidationError.
void validate_config(const ExperimentConfig& config);

/// Full echo of the configuration as pretty-printed JSON.
std::string config_to_json(const ExperimentConfig& config);

} // namespace mklcsp::pipeline
