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
#include <string>
#include <vector>

#include "mklcsp/linalg/matrix.hpp"
#include "mklcsp/signal/filter.hpp"

namespace mklcsp::signal {

/// Stimulus cue: sample index plus class label (+1 or -1).
struct Marker {
    std::int64_t sample = 0;
    int label = 0;
};

/// Continuous multi-channel recording: data is channels x samples.
struct Recording {
    Matrix data;
    double fs = 0.0;
    std::vector<std::string> channel_names;
    std::vector<Marker> markers;
};

/// One epoched trial: channels x samples plus its class label.
struct Trial {
    Matrix data;
    int label = 0;
};

/// Band-pass every channel independently (causal, forward only, zero
/// initial state).  The filter's sample rate must match the recording's.
Recording apply_filter(const Recording& rec, const BandpassFilter& filter);

/// Subset and reorder channels by name.  Unknown names, names requested
/// twice, and names that appear more than once in the recording are
/// reported together in one error.
Recording select_channels(const Recording& rec, const std::vector<std::string>& names);

/// Cut one trial per marker over the half-open window
///   [cue + round(start_ms*fs/1000), cue + round(end_ms*fs/1000)).
/// Zero-length windows are a parameter error; a window that leaves the
/// recording is an error naming the offending marker.
std::vector<Trial> epoch(const Recording& rec, double start_ms, double end_ms);

} // namespace mklcsp::signal
