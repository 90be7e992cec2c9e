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
#include <random>

namespace mklcsp {

/// Deterministic random source.  The engine is the standard-specified
/// mt19937_64 stream; uniform and normal mappings are implemented here
/// rather than with std distributions, whose algorithms vary between
/// standard libraries.  Identical seeds therefore give identical draws on
/// any conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (pairs cached).
    double normal();

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    std::uint64_t raw() { return engine_(); }

    /// Mix a seed with stream indices (splitmix64 finalizer), so that one
    /// master seed can fan out into independent deterministic substreams.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace mklcsp
