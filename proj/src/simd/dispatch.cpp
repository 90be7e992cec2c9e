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

#include "mklcsp/simd/ops.hpp"

#include <cstdlib>
#include <string>

#include "mklcsp/errors.hpp"

namespace mklcsp::simd {
namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

struct State {
    Backend backend;
    const OpsTable* table;
};

State initial_state() {
    Backend pick = backend_available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
    if (const char* env = std::getenv("MKLCSP_SIMD")) {
        const std::string_view v(env);
        if (v == "scalar") {
            pick = Backend::scalar;
        } else if (v == "avx2" && backend_available(Backend::avx2)) {
            pick = Backend::avx2;
        }
        // Anything else (including "auto") keeps the detected default.
    }
    const OpsTable* t =
        pick == Backend::avx2 ? detail::avx2_table() : &detail::scalar_table;
    return {pick, t};
}

State& state() {
    static State s = initial_state();
    return s;
}

} // namespace

const OpsTable& ops() {
    return *state().table;
}

Backend active_backend() {
    return state().backend;
}

bool backend_available(Backend b) {
    switch (b) {
    case Backend::scalar:
        return true;
    case Backend::avx2:
        return detail::avx2_table() != nullptr && cpu_has_avx2_fma();
    }
    return false;
}

void select_backend(Backend b) {
    if (!backend_available(b))
        throw ParameterError(std::string("simd backend unavailable: ") + backend_name(b));
    state().backend = b;
    state().table = b == Backend::avx2 ? detail::avx2_table() : &detail::scalar_table;
}

void select_backend(std::string_view name) {
    if (name == "scalar") {
        select_backend(Backend::scalar);
    } else if (name == "avx2") {
        select_backend(Backend::avx2);
    } else if (name == "auto") {
        select_backend(backend_available(Backend::avx2) ? Backend::avx2 : Backend::scalar);
    } else {
        throw ParameterError("unknown simd backend: " + std::string(name));
    }
}

const char* backend_name(Backend b) {
    switch (b) {
    case Backend::scalar:
        return "scalar";
    case Backend::avx2:
        return "avx2";
    }
    return "?";
}

} // namespace mklcsp::simd
