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

#include "mklcsp/signal/filter.hpp"

#include <cmath>
#include <numbers>

#include "mklcsp/errors.hpp"

namespace mklcsp::signal {
namespace {

using cd = std::complex<double>;

// Bilinear map s -> z with the tangent pre-warp convention (T = 1):
//   s = 2 (z - 1)/(z + 1)  <=>  z = (2 + s)/(2 - s)
cd bilinear(cd s) {
    return (2.0 + s) / (2.0 - s);
}

// Denominator coefficients of one section from a pair of digital poles
// that is either a conjugate pair or two reals: (1 - p1 z^-1)(1 - p2 z^-1).
Biquad section_from_pole_pair(cd p1, cd p2) {
    Biquad s;
    s.a1 = -(p1 + p2).real();
    s.a2 = (p1 * p2).real();
    return s;
}

} // namespace

BandpassFilter::BandpassFilter(std::vector<Biquad> sections, int order, double low_hz,
                               double high_hz, double fs)
    : sections_(std::move(sections)), order_(order), low_hz_(low_hz),
      high_hz_(high_hz), fs_(fs) {}

std::complex<double> BandpassFilter::response(double f_hz) const {
    const double w = 2.0 * std::numbers::pi * f_hz / fs_;
    const cd z1 = std::exp(cd(0.0, -w)); // z^-1
    const cd z2 = z1 * z1;
    cd h(1.0, 0.0);
    for (const Biquad& s : sections_)
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
}

double BandpassFilter::magnitude(double f_hz) const {
    return std::abs(response(f_hz));
}

std::vector<std::complex<double>> BandpassFilter::poles() const {
    std::vector<cd> out;
    for (const Biquad& s : sections_) {
        const cd disc = std::sqrt(cd(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
        out.push_back((-s.a1 + disc) / 2.0);
        out.push_back((-s.a1 - disc) / 2.0);
    }
    return out;
}

void BandpassFilter::apply_in_place(double* x, std::size_t n) const {
    // Direct form II transposed, one pass per section, zero initial state.
    for (const Biquad& s : sections_) {
        double z1 = 0.0, z2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double in = x[i];
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            x[i] = out;
        }
    }
}

BandpassFilter design_butterworth_bandpass(int order, double low_hz, double high_hz,
                                           double fs) {
    if (order < 1)
        throw ParameterError("butterworth design: order must be >= 1");
    if (!(fs > 0.0))
        throw ParameterError("butterworth design: fs must be positive");
    if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs / 2.0))
        throw ParameterError("butterworth design: need 0 < low < high < fs/2");

    const double pi = std::numbers::pi;
    // Pre-warped analog edges; the bilinear map sends the digital edge
    // frequencies exactly onto them.
    const double w1 = 2.0 * std::tan(pi * low_hz / fs);
    const double w2 = 2.0 * std::tan(pi * high_hz / fs);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;

    // Prototype low-pass poles on the unit circle, left half plane.
    // Each prototype pole maps to two band-pass poles; the bilinear
    // transform turns the prototype's n zeros at infinity plus the
    // transform's n zeros at s=0 into n digital zeros at z=-1 and n at
    // z=+1, so every section numerator is proportional to 1 - z^-2.
    std::vector<Biquad> sections;
    for (int k = 0; 2 * k < order; ++k) {
        const double theta = pi * (2.0 * k + 1.0) / (2.0 * order);
        const cd p(-std::sin(theta), std::cos(theta));
        const bool real_pole = std::fabs(p.imag()) < 1e-12;

        const cd pb = p * bw;
        const cd disc = std::sqrt(pb * pb - 4.0 * w0sq);
        const cd splus = (pb + disc) / 2.0;
        const cd sminus = (pb - disc) / 2.0;

        if (real_pole) {
            // The two images are a conjugate pair or two reals: one section.
            sections.push_back(section_from_pole_pair(bilinear(splus), bilinear(sminus)));
        } else {
            // Complex prototype pole: its conjugate contributes the mirror
            // images, giving two conjugate-closed sections.
            const cd zp = bilinear(splus);
            const cd zm = bilinear(sminus);
            sections.push_back(section_from_pole_pair(zp, std::conj(zp)));
            sections.push_back(section_from_pole_pair(zm, std::conj(zm)));
        }
    }

    // Normalize so the analog center (magnitude exactly 1 on the prototype)
    // maps to unit digital gain, and spread the gain over the sections.
    const double wc = 2.0 * std::atan(std::sqrt(w0sq) / 2.0);
    const cd z1 = std::exp(cd(0.0, -wc));
    const cd z2 = z1 * z1;
    cd h(1.0, 0.0);
    for (const Biquad& s : sections)
        h *= (1.0 - z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    const double gain = 1.0 / std::abs(h);
    const double g = std::pow(gain, 1.0 / static_cast<double>(sections.size()));
    for (Biquad& s : sections) {
        s.b0 = g;
        s.b1 = 0.0;
        s.b2 = -g;
    }

    return BandpassFilter(std::move(sections), order, low_hz, high_hz, fs);
}

} // namespace mklcsp::signal
