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

#include <stdexcept>
#include <string>

namespace mklcsp {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or configuration value (maps to CLI exit code 1).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// File-format violation: bad magic, version, or truncation (exit code 2).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Semantically invalid data: markers out of range, bad labels, shape
/// mismatches between metadata and payload (exit code 2).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure while reading or writing (exit code 2).
class IoError : public Error {
public:
    using Error::Error;
};

/// Incompatible matrix/vector dimensions (exit code 3).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A matrix required to be positive definite is not (exit code 3).
class DefinitenessError : public Error {
public:
    using Error::Error;
};

/// Degenerate numerical input, e.g. an all-zero trial (exit code 3).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Generic numerical failure (exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace mklcsp
