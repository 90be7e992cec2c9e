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

#include "mklcsp/pipeline/session.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <vector>

#include <json.hpp>

#include "mklcsp/errors.hpp"

namespace mklcsp::pipeline {
namespace {

using json = nlohmann::json;

constexpr char kMagic[4] = {'E', 'E', 'G', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 20; // magic + version + n_channels + n_samples
constexpr const char* kMetaSuffix = ".eegmeta.json";
constexpr const char* kDataSuffix = ".eegdata";

void put_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put_u64le(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

std::uint64_t read_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

void check_recording(const signal::Recording& rec) {
    if (rec.data.rows() == 0 || rec.data.cols() == 0)
        throw ValidationError("save_session: empty recording");
    if (!(rec.fs > 0.0) || !std::isfinite(rec.fs))
        throw ValidationError("save_session: fs must be positive and finite");
    if (rec.channel_names.size() != rec.data.rows())
        throw ValidationError("save_session: " + std::to_string(rec.channel_names.size()) +
                              " channel names for " + std::to_string(rec.data.rows()) +
                              " channels");
    std::set<std::string> seen;
    for (const std::string& name : rec.channel_names)
        if (!seen.insert(name).second)
            throw ValidationError("save_session: duplicate channel name '" + name + "'");
    for (const signal::Marker& m : rec.markers) {
        if (m.label != 1 && m.label != -1)
            throw ValidationError("save_session: marker label must be -1 or +1, got " +
                                  std::to_string(m.label));
        if (m.sample < 0 || static_cast<std::uint64_t>(m.sample) >= rec.data.cols())
            throw ValidationError("save_session: marker sample " + std::to_string(m.sample) +
                                  " outside recording of " + std::to_string(rec.data.cols()) +
                                  " samples");
    }
    if (!rec.data.all_finite())
        throw ValidationError("save_session: non-finite sample value");
}

std::filesystem::path resolve_meta_path(const std::filesystem::path& path) {
    const std::string s = path.string();
    const std::string suffix = kMetaSuffix;
    if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
        return path;
    return std::filesystem::path(s + suffix);
}

const json& require_field(const json& j, const char* key, const std::filesystem::path& meta) {
    auto it = j.find(key);
    if (it == j.end())
        throw FormatError("session metadata " + meta.string() + ": missing field '" + key + "'");
    return *it;
}

} // namespace

std::filesystem::path save_session(const std::filesystem::path& base,
                                   const signal::Recording& rec) {
    check_recording(rec);

    const std::filesystem::path meta_path(base.string() + kMetaSuffix);
    const std::filesystem::path data_path(base.string() + kDataSuffix);

    std::vector<unsigned char> blob;
    blob.reserve(kHeaderBytes + rec.data.size() * sizeof(double));
    blob.insert(blob.end(), kMagic, kMagic + 4);
    put_u32le(blob, kVersion);
    put_u32le(blob, static_cast<std::uint32_t>(rec.data.rows()));
    put_u64le(blob, static_cast<std::uint64_t>(rec.data.cols()));
    for (std::size_t i = 0; i < rec.data.size(); ++i)
        put_u64le(blob, std::bit_cast<std::uint64_t>(rec.data.data()[i]));

    {
        std::ofstream out(data_path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open for writing: " + data_path.string());
        out.write(reinterpret_cast<const char*>(blob.data()),
                  static_cast<std::streamsize>(blob.size()));
        if (!out)
            throw IoError("write failed: " + data_path.string());
    }

    json meta;
    meta["fs"] = rec.fs;
    meta["channel_names"] = rec.channel_names;
    meta["markers"] = json::array();
    for (const signal::Marker& m : rec.markers)
        meta["markers"].push_back({{"sample", m.sample}, {"label", m.label}});
    meta["data_file"] = data_path.filename().string();

    std::ofstream out(meta_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open for writing: " + meta_path.string());
    out << meta.dump(2) << "\n";
    if (!out)
        throw IoError("write failed: " + meta_path.string());
    return meta_path;
}

signal::Recording load_session(const std::filesystem::path& path) {
    const std::filesystem::path meta_path = resolve_meta_path(path);
    std::ifstream meta_in(meta_path, std::ios::binary);
    if (!meta_in)
        throw IoError("cannot open session metadata: " + meta_path.string());

    json meta;
    try {
        meta = json::parse(meta_in);
    } catch (const json::parse_error& e) {
        throw FormatError("session metadata " + meta_path.string() + ": " + e.what());
    }
    if (!meta.is_object())
        throw FormatError("session metadata " + meta_path.string() + ": not a JSON object");

    signal::Recording rec;

    const json& fs = require_field(meta, "fs", meta_path);
    if (!fs.is_number())
        throw FormatError("session metadata " + meta_path.string() + ": fs must be a number");
    rec.fs = fs.get<double>();
    if (!(rec.fs > 0.0) || !std::isfinite(rec.fs))
        throw ValidationError("session metadata " + meta_path.string() +
                              ": fs must be positive, got " + std::to_string(rec.fs));

    const json& names = require_field(meta, "channel_names", meta_path);
    if (!names.is_array())
        throw FormatError("session metadata " + meta_path.string() +
                          ": channel_names must be an array");
    for (const json& n : names) {
        if (!n.is_string())
            throw FormatError("session metadata " + meta_path.string() +
                              ": channel_names entries must be strings");
        rec.channel_names.push_back(n.get<std::string>());
    }
    {
        std::set<std::string> seen;
        for (const std::string& name : rec.channel_names)
            if (!seen.insert(name).second)
                throw ValidationError("session metadata " + meta_path.string() +
                                      ": duplicate channel name '" + name + "'");
    }

    const json& markers = require_field(meta, "markers", meta_path);
    if (!markers.is_array())
        throw FormatError("session metadata " + meta_path.string() + ": markers must be an array");
    for (std::size_t i = 0; i < markers.size(); ++i) {
        const json& m = markers[i];
        if (!m.is_object())
            throw FormatError("session metadata " + meta_path.string() + ": marker " +
                              std::to_string(i) + " must be an object");
        const json& sample = require_field(m, "sample", meta_path);
        const json& label = require_field(m, "label", meta_path);
        if (!sample.is_number_integer())
            throw FormatError("session metadata " + meta_path.string() + ": marker " +
                              std::to_string(i) + " sample must be an integer");
        if (!label.is_number_integer())
            throw FormatError("session metadata " + meta_path.string() + ": marker " +
                              std::to_string(i) + " label must be an integer");
        rec.markers.push_back({sample.get<std::int64_t>(), label.get<int>()});
    }

    const json& data_file = require_field(meta, "data_file", meta_path);
    if (!data_file.is_string())
        throw FormatError("session metadata " + meta_path.string() +
                          ": data_file must be a string");
    const std::filesystem::path data_path =
        meta_path.parent_path() / data_file.get<std::string>();

    std::ifstream data_in(data_path, std::ios::binary);
    if (!data_in)
        throw IoError("cannot open session data: " + data_path.string());
    std::vector<unsigned char> blob((std::istreambuf_iterator<char>(data_in)),
                                    std::istreambuf_iterator<char>());
    if (data_in.bad())
        throw IoError("read failed: " + data_path.string());

    if (blob.size() < kHeaderBytes)
        throw FormatError(data_path.string() + ": header truncated at byte offset " +
                          std::to_string(blob.size()) + ", expected " +
                          std::to_string(kHeaderBytes) + " header bytes");
    if (std::memcmp(blob.data(), kMagic, 4) != 0)
        throw FormatError(data_path.string() + ": bad magic at byte offset 0");
    const std::uint32_t version = read_u32le(blob.data() + 4);
    if (version != kVersion)
        throw FormatError(data_path.string() + ": unsupported version " +
                          std::to_string(version) + " at byte offset 4");
    const std::uint64_t n_channels = read_u32le(blob.data() + 8);
    const std::uint64_t n_samples = read_u64le(blob.data() + 12);
    if (n_channels == 0 || n_samples == 0)
        throw ValidationError(data_path.string() + ": empty recording (" +
                              std::to_string(n_channels) + " channels, " +
                              std::to_string(n_samples) + " samples)");

    const std::uint64_t values = n_channels * n_samples;
    if (values / n_channels != n_samples || values > (std::uint64_t{1} << 60))
        throw FormatError(data_path.string() + ": implausible shape " +
                          std::to_string(n_channels) + " x " + std::to_string(n_samples));
    const std::uint64_t want = kHeaderBytes + values * sizeof(double);
    if (blob.size() != want)
        throw FormatError(data_path.string() + ": expected " + std::to_string(want) +
                          " bytes, got " + std::to_string(blob.size()));

    if (rec.channel_names.size() != n_channels)
        throw ValidationError(data_path.string() + ": " + std::to_string(n_channels) +
                              " channels but " + std::to_string(rec.channel_names.size()) +
                              " channel names in metadata");

    rec.data = Matrix(n_channels, n_samples);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(rec.data.data(), blob.data() + kHeaderBytes, values * sizeof(double));
    } else {
        for (std::uint64_t i = 0; i < values; ++i)
            rec.data.data()[i] = std::bit_cast<double>(
                read_u64le(blob.data() + kHeaderBytes + i * sizeof(double)));
    }
    if (!rec.data.all_finite())
        throw ValidationError(data_path.string() + ": non-finite sample value");

    for (std::size_t i = 0; i < rec.markers.size(); ++i) {
        const signal::Marker& m = rec.markers[i];
        if (m.label != 1 && m.label != -1)
            throw ValidationError("session metadata " + meta_path.string() + ": marker " +
                                  std::to_string(i) + " label must be -1 or +1, got " +
                                  std::to_string(m.label));
        if (m.sample < 0 || static_cast<std::uint64_t>(m.sample) >= n_samples)
            throw ValidationError("session metadata " + meta_path.string() + ": marker " +
                                  std::to_string(i) + " sample " + std::to_string(m.sample) +
                                  " outside recording of " + std::to_string(n_samples) +
                                  " samples");
    }
    return rec;
}

} // namespace mklcsp::pipeline
