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

#include <filesystem>

#include "mklcsp/pipeline/experiment.hpp"

namespace mklcsp::pipeline {

/// Writes the derived artifacts into out_dir:
///   errors.csv    subject, method, error, chosen_C, chosen_p, chosen_lambda
///   betas.csv     dense target x source kernel-weight matrix (subject-id
///                 header row and column; diagonal zeroed, |v| < 1e-12 -> 0)
///   alphas.csv    dense similarity matrix, same layout
///   patterns.csv  activity patterns (6 per channel row) of the selected
///                 subjects
///   scatter.svg   one panel per baseline arm: baseline error on x, mkl
///                 error on y, identity line, one circle per subject
///   config.json   configuration echo
/// Doubles are printed with 17 significant digits.
void emit_figures(const ExperimentReport& report, const std::filesystem::path& out_dir);

/// emit_figures plus results.json (the full machine-readable report) and
/// selection_trace.txt (the hashed hyperparameter selection log).
void emit_reports(const ExperimentReport& report, const std::filesystem::path& out_dir);

/// Reads results.json back; enough to re-emit the figures.  The selection
/// trace text is not stored there, only its hash.
ExperimentReport load_report(const std::filesystem::path& results_json);

} // namespace mklcsp::pipeline
