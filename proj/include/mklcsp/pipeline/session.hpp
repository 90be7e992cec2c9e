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

#include "mklcsp/signal/recording.hpp"

namespace mklcsp::pipeline {

/// One session on disk is a pair of files:
///   `<name>.eegmeta.json`  UTF-8 JSON: fs, channel_names, markers
///                          ({sample, label in {-1, +1}}), data_file.
///   `<name>.eegdata`       little-endian binary: magic "EEGS", u32
///                          version = 1, u32 n_channels, u64 n_samples,
///                          then n_channels * n_samples float64 values,
///                          row-major in channel order.
/// Sample payloads round-trip bit-exactly.

/// Writes `<base>.eegmeta.json` and `<base>.eegdata`; returns the meta
/// file path.  The recording must be well formed (matching channel-name
/// count, unique names, in-range markers, finite data).
std::filesystem::path save_session(const std::filesystem::path& base,
                                   const signal::Recording& rec);

/// Accepts either the meta file path or the extension-free base path.
/// Malformed bytes raise FormatError (with the byte offset where the
/// check failed), out-of-range values raise ValidationError, and missing
/// files raise IoError; a corrupt session never produces a Recording.
signal::Recording load_session(const std::filesystem::path& path);

} // namespace mklcsp::pipeline
