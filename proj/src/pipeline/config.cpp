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

#include "mklcsp/pipeline/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mklcsp/errors.hpp"

namespace mklcsp::pipeline {
namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* const kKnownKeys[] = {
    "band_low_hz",  "band_high_hz", "filter_order", "epoch_start_ms",
    "epoch_end_ms", "channels",     "folds",        "c_grid",
    "p_grid",       "lambda_grid",  "lda_gamma",    "seed",
    "methods",      "target_calib_trials",
};

double number_field(const json& j, const std::string& context, const char* key) {
    if (!j.is_number())
        throw FormatError(context + ": '" + std::string(key) + "' must be a number");
    return j.get<double>();
}

int int_field(const json& j, const std::string& context, const char* key) {
    if (!j.is_number_integer())
        throw FormatError(context + ": '" + std::string(key) + "' must be an integer");
    return j.get<int>();
}

std::vector<double> grid_field(const json& j, const std::string& context, const char* key,
                               bool allow_inf) {
    if (!j.is_array())
        throw FormatError(context + ": '" + std::string(key) + "' must be an array");
    std::vector<double> grid;
    for (const json& v : j) {
        if (v.is_number()) {
            grid.push_back(v.get<double>());
        } else if (allow_inf && v.is_string() && v.get<std::string>() == "inf") {
            grid.push_back(kInf);
        } else {
            throw FormatError(context + ": '" + std::string(key) + "' entries must be numbers" +
                              (allow_inf ? " or the string \"inf\"" : ""));
        }
    }
    return grid;
}

} // namespace

std::string method_name(Method m) {
    switch (m) {
    case Method::csp_lda:
        return "csp-lda";
    case Method::csp_svm:
        return "csp-svm";
    case Method::ccsp_lda:
        return "ccsp-lda";
    case Method::ccsp_svm:
        return "ccsp-svm";
    case Method::mkl:
        return "mkl";
    }
    throw ParameterError("method_name: unknown method");
}

Method parse_method(const std::string& name) {
    if (name == "csp-lda")
        return Method::csp_lda;
    if (name == "csp-svm")
        return Method::csp_svm;
    if (name == "ccsp-lda")
        return Method::ccsp_lda;
    if (name == "ccsp-svm")
        return Method::ccsp_svm;
    if (name == "mkl")
        return Method::mkl;
    throw ParameterError("unknown method '" + name +
                         "' (expected csp-lda, csp-svm, ccsp-lda, ccsp-svm, or mkl)");
}

ExperimentConfig default_config() {
    ExperimentConfig config;
    for (int i = -4; i <= 4; ++i)
        config.c_grid.push_back(std::pow(10.0, 0.5 * i));
    config.p_grid = {1.0, 1.125, 1.333, 2.0, kInf};
    config.lambda_grid = {0.0, 1e-5, 1e-4, 1e-3, 1e-2};
    for (int i = 1; i <= 10; ++i)
        config.lambda_grid.push_back(0.1 * i);
    config.methods = {Method::csp_lda, Method::csp_svm, Method::ccsp_lda, Method::ccsp_svm,
                      Method::mkl};
    return config;
}

ExperimentConfig parse_config(const std::string& text, const std::string& context) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(context + ": " + e.what());
    }
    if (!j.is_object())
        throw FormatError(context + ": configuration must be a JSON object");

    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : kKnownKeys)
            known = known || it.key() == key;
        if (!known)
            throw FormatError(context + ": unknown key '" + it.key() + "'");
    }

    ExperimentConfig config = default_config();
    if (j.contains("band_low_hz"))
        config.band_low_hz = number_field(j["band_low_hz"], context, "band_low_hz");
    if (j.contains("band_high_hz"))
        config.band_high_hz = number_field(j["band_high_hz"], context, "band_high_hz");
    if (j.contains("filter_order"))
        config.filter_order = int_field(j["filter_order"], context, "filter_order");
    if (j.contains("epoch_start_ms"))
        config.epoch_start_ms = number_field(j["epoch_start_ms"], context, "epoch_start_ms");
    if (j.contains("epoch_end_ms"))
        config.epoch_end_ms = number_field(j["epoch_end_ms"], context, "epoch_end_ms");
    if (j.contains("channels")) {
        const json& ch = j["channels"];
        if (!ch.is_array())
            throw FormatError(context + ": 'channels' must be an array");
        config.channels.clear();
        for (const json& c : ch) {
            if (!c.is_string())
                throw FormatError(context + ": 'channels' entries must be strings");
            config.channels.push_back(c.get<std::string>());
        }
    }
    if (j.contains("folds"))
        config.folds = int_field(j["folds"], context, "folds");
    if (j.contains("c_grid"))
        config.c_grid = grid_field(j["c_grid"], context, "c_grid", false);
    if (j.contains("p_grid"))
        config.p_grid = grid_field(j["p_grid"], context, "p_grid", true);
    if (j.contains("lambda_grid"))
        config.lambda_grid = grid_field(j["lambda_grid"], context, "lambda_grid", false);
    if (j.contains("lda_gamma"))
        config.lda_gamma = number_field(j["lda_gamma"], context, "lda_gamma");
    if (j.contains("seed")) {
        const json& s = j["seed"];
        if (!s.is_number_unsigned() && !s.is_number_integer())
            throw FormatError(context + ": 'seed' must be a non-negative integer");
        if (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)
            throw ValidationError(context + ": 'seed' must be non-negative");
        config.seed = s.get<std::uint64_t>();
    }
    if (j.contains("methods")) {
        const json& ms = j["methods"];
        if (!ms.is_array())
            throw FormatError(context + ": 'methods' must be an array");
        config.methods.clear();
        for (const json& m : ms) {
            if (!m.is_string())
                throw FormatError(context + ": 'methods' entries must be strings");
            try {
                config.methods.push_back(parse_method(m.get<std::string>()));
            } catch (const ParameterError& e) {
                throw ValidationError(context + ": " + e.what());
            }
        }
    }
    if (j.contains("target_calib_trials"))
        config.target_calib_trials =
            int_field(j["target_calib_trials"], context, "target_calib_trials");

    try {
        validate_config(config);
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

void validate_config(const ExperimentConfig& config) {
    if (!(config.band_low_hz > 0.0) || !(config.band_high_hz > config.band_low_hz))
        throw ValidationError("band edges must satisfy 0 < low < high");
    if (config.filter_order < 1)
        throw ValidationError("filter_order must be at least 1");
    if (!(config.epoch_end_ms > config.epoch_start_ms))
        throw ValidationError("epoch window must satisfy start < end");
    if (config.folds < 2)
        throw ValidationError("folds must be at least 2");
    if (config.c_grid.empty())
        throw ValidationError("c_grid must be non-empty");
    for (double c : config.c_grid)
        if (!(c > 0.0) || !std::isfinite(c))
            throw ValidationError("c_grid entries must be positive and finite");
    if (config.p_grid.empty())
        throw ValidationError("p_grid must be non-empty");
    for (double p : config.p_grid)
        if (!(p >= 1.0))
            throw ValidationError("p_grid entries must be at least 1");
    if (config.lambda_grid.empty())
        throw ValidationError("lambda_grid must be non-empty");
    for (double l : config.lambda_grid)
        if (!(l >= 0.0 && l <= 1.0))
            throw ValidationError("lambda_grid entries must be in [0, 1]");
    if (!(config.lda_gamma >= 0.0 && config.lda_gamma <= 1.0))
        throw ValidationError("lda_gamma must be in [0, 1]");
    if (config.methods.empty())
        throw ValidationError("methods must be non-empty");
    std::set<std::string> seen;
    for (Method m : config.methods)
        if (!seen.insert(method_name(m)).second)
            throw ValidationError("duplicate method '" + method_name(m) + "'");
    if (config.target_calib_trials < 0)
        throw ValidationError("target_calib_trials must be non-negative");
}

std::string config_to_json(const ExperimentConfig& config) {
    json j;
    j["band_low_hz"] = config.band_low_hz;
    j["band_high_hz"] = config.band_high_hz;
    j["filter_order"] = config.filter_order;
    j["epoch_start_ms"] = config.epoch_start_ms;
    j["epoch_end_ms"] = config.epoch_end_ms;
    j["channels"] = config.channels;
    j["folds"] = config.folds;
    j["c_grid"] = config.c_grid;
    j["p_grid"] = json::array();
    for (double p : config.p_grid) {
        if (std::isinf(p))
            j["p_grid"].push_back("inf");
        else
            j["p_grid"].push_back(p);
    }
    j["lambda_grid"] = config.lambda_grid;
    j["lda_gamma"] = config.lda_gamma;
    j["seed"] = config.seed;
    j["methods"] = json::array();
    for (Method m : config.methods)
        j["methods"].push_back(method_name(m));
    j["target_calib_trials"] = config.target_calib_trials;
    return j.dump(2) + "\n";
}

} // namespace mklcsp::pipeline
