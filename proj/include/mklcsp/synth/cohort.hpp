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
#include <map>
#include <string>
#include <vector>

#include "mklcsp/linalg/matrix.hpp"
#include "mklcsp/signal/recording.hpp"

namespace mklcsp::synth {

/// Ground truth of one synthetic subject.  Band-limited sources are mixed
/// by `mixing` (unit-norm columns); during a trial the class's
/// discriminative source has its power multiplied by the class gain.
/// Sensor noise is spatially correlated white noise, shaped by the lower
/// triangular `noise_shaper` and scaled by `sigma`.
struct SubjectModel {
    std::string id;
    Matrix mixing; // channels x sources
    std::size_t source_pos = 0;
    std::size_t source_neg = 1;
    double gain_pos = 4.0;
    double gain_neg = 4.0;
    double sigma = 0.0;
    Matrix noise_shaper;
    /// "similar" when the subject shares the cohort's planted
    /// discriminative subspace, otherwise "dissimilar".
    std::string group;
};

/// Parameters of a synthetic cohort.  The first subject is the reference
/// whose discriminative mixing columns define the similar group; a
/// round(similar_fraction * (subjects - 1)) sized set of other subjects
/// shares them up to a small perturbation, the rest draw independent
/// mixing matrices.
struct CohortSpec {
    int subjects = 10;
    int channels = 16;
    /// 0 means one source per channel.  More sources than channels is an
    /// error.
    int sources = 0;
    double fs = 100.0;
    int trials_per_class = 50;
    double trial_ms = 3000.0;
    std::uint64_t seed = 1;
    double similar_fraction = 1.0 / 3.0;
    double class_gain = 4.0;
    /// Default picked so the stock benchmark neither saturates at zero
    /// error nor drowns the planted structure.
    double noise_sigma = 0.7;
};

/// One subject's generated sessions plus ground truth.
struct SubjectData {
    SubjectModel model;
    signal::Recording calibration;
    signal::Recording test;
};

/// Deterministic synthetic cohort: same spec and seed, same bytes.
/// Each subject gets a calibration and a test session with balanced,
/// shuffled class markers.  Within every trial window the source block is
/// orthonormalized and rescaled, so at sigma = 0 the class covariances
/// carry exactly the planted structure.
std::map<std::string, SubjectData> generate_cohort(const CohortSpec& spec);

/// Reference error of the oracle that projects trials onto the true
/// unmixing rows of the two discriminative sources and thresholds the
/// log-variance difference at the midpoint of the class-conditional means.
double bayes_reference_error(const SubjectModel& model,
                             const std::vector<signal::Trial>& trials);

/// True unmixing row of source `index`: row of the mixing pseudo-inverse.
std::vector<double> unmixing_row(const SubjectModel& model, std::size_t index);

} // namespace mklcsp::synth
