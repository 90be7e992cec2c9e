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

#include <complex>
#include <vector>

namespace mklcsp::signal {

/// One second-order section, coefficients in the usual z^-1 convention:
///   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

/// Causal IIR band-pass filter as a cascade of second-order sections.
class BandpassFilter {
public:
    BandpassFilter() = default;
    BandpassFilter(std::vector<Biquad> sections, int order, double low_hz,
                   double high_hz, double fs);

    [[nodiscard]] const std::vector<Biquad>& sections() const { return sections_; }
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] double low_hz() const { return low_hz_; }
    [[nodiscard]] double high_hz() const { return high_hz_; }
    [[nodiscard]] double fs() const { return fs_; }

    /// Complex frequency response at f hertz.
    [[nodiscard]] std::complex<double> response(double f_hz) const;

    /// |response(f_hz)|.
    [[nodiscard]] double magnitude(double f_hz) const;

    /// Poles of every section (roots of the denominators).
    [[nodiscard]] std::vector<std::complex<double>> poles() const;

    /// Filter one channel in place, forward only, zero initial state.
    void apply_in_place(double* x, std::size_t n) const;

private:
    std::vector<Biquad> sections_;
    int order_ = 0;
    double low_hz_ = 0.0;
    double high_hz_ = 0.0;
    double fs_ = 0.0;
};

/// Butterworth band-pass design: analog low-pass prototype, low-pass to
/// band-pass transform on pre-warped edge frequencies, bilinear transform,
/// assembled as `order` second-order sections.  By construction the
/// magnitude is exactly 1/sqrt(2) at both edges and zero at DC and at the
/// Nyquist frequency.  Requires 0 < low_hz < high_hz < fs/2 and order >= 1.
BandpassFilter design_butterworth_bandpass(int order, double low_hz, double high_hz,
                                           double fs);

} // namespace mklcsp::signal
