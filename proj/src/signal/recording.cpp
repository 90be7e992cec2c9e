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

#include "mklcsp/signal/recording.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "mklcsp/errors.hpp"

namespace mklcsp::signal {

Recording apply_filter(const Recording& rec, const BandpassFilter& filter) {
    if (filter.fs() != rec.fs)
        throw ParameterError("apply_filter: filter designed for fs=" +
                             std::to_string(filter.fs()) + " but recording has fs=" +
                             std::to_string(rec.fs));
    Recording out = rec;
    for (std::size_t ch = 0; ch < out.data.rows(); ++ch)
        filter.apply_in_place(out.data.row(ch), out.data.cols());
    return out;
}

Recording select_channels(const Recording& rec, const std::vector<std::string>& names) {
    std::string offenders;
    auto complain = [&offenders](const std::string& what, const std::string& name) {
        if (!offenders.empty())
            offenders += ", ";
        offenders += what + " '" + name + "'";
    };

    std::vector<std::size_t> picks;
    std::vector<std::string> seen;
    for (const std::string& name : names) {
        if (std::find(seen.begin(), seen.end(), name) != seen.end()) {
            complain("duplicate request", name);
            continue;
        }
        seen.push_back(name);
        std::size_t count = 0;
        std::size_t idx = 0;
        for (std::size_t i = 0; i < rec.channel_names.size(); ++i) {
            if (rec.channel_names[i] == name) {
                ++count;
                idx = i;
            }
        }
        if (count == 0)
            complain("unknown channel", name);
        else if (count > 1)
            complain("ambiguous channel", name);
        else
            picks.push_back(idx);
    }
    if (!offenders.empty())
        throw ParameterError("select_channels: " + offenders);

    Recording out;
    out.fs = rec.fs;
    out.markers = rec.markers;
    out.channel_names = names;
    out.data = Matrix(picks.size(), rec.data.cols());
    for (std::size_t r = 0; r < picks.size(); ++r)
        std::memcpy(out.data.row(r), rec.data.row(picks[r]),
                    rec.data.cols() * sizeof(double));
    return out;
}

std::vector<Trial> epoch(const Recording& rec, double start_ms, double end_ms) {
    const std::int64_t off0 = std::llround(start_ms * rec.fs / 1000.0);
    const std::int64_t off1 = std::llround(end_ms * rec.fs / 1000.0);
    if (off1 <= off0)
        throw ParameterError("epoch: window [" + std::to_string(start_ms) + ", " +
                             std::to_string(end_ms) + ") ms is empty at fs=" +
                             std::to_string(rec.fs));

    const std::int64_t total = static_cast<std::int64_t>(rec.data.cols());
    std::vector<Trial> trials;
    trials.reserve(rec.markers.size());
    for (std::size_t m = 0; m < rec.markers.size(); ++m) {
        const Marker& mk = rec.markers[m];
        if (mk.label != 1 && mk.label != -1)
            throw ValidationError("epoch: marker " + std::to_string(m) +
                                  " has label " + std::to_string(mk.label));
        const std::int64_t a = mk.sample + off0;
        const std::int64_t b = mk.sample + off1;
        if (a < 0 || b > total)
            throw ParameterError("epoch: marker " + std::to_string(m) + " at sample " +
                                 std::to_string(mk.sample) + " needs samples [" +
                                 std::to_string(a) + ", " + std::to_string(b) +
                                 ") but the recording has " + std::to_string(total));
        Trial t;
        t.label = mk.label;
        t.data = Matrix(rec.data.rows(), static_cast<std::size_t>(b - a));
        for (std::size_t ch = 0; ch < rec.data.rows(); ++ch)
            std::memcpy(t.data.row(ch), rec.data.row(ch) + a,
                        static_cast<std::size_t>(b - a) * sizeof(double));
        trials.push_back(std::move(t));
    }
    return trials;
}

} // namespace mklcsp::signal
