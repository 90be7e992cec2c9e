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

#include "mklcsp/pipeline/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mklcsp/errors.hpp"

namespace mklcsp::pipeline {
namespace {

using json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

std::string opt(double v) {
    return std::isnan(v) ? std::string() : fmt(v);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out)
        throw IoError("write failed: " + path.string());
}

std::string errors_csv(const ExperimentReport& report) {
    std::string csv = "subject,method,error,chosen_C,chosen_p,chosen_lambda\n";
    for (const MethodResult& r : report.results) {
        csv += r.subject + "," + r.method + "," + fmt(r.test_error) + "," + opt(r.chosen_c) +
               "," + opt(r.chosen_p) + "," + opt(r.chosen_lambda) + "\n";
    }
    return csv;
}

std::string matrix_csv(const std::vector<std::string>& ids, const Matrix& m,
                       bool zero_diagonal) {
    std::string csv = "target";
    for (const std::string& id : ids)
        csv += "," + id;
    csv += "\n";
    for (std::size_t r = 0; r < ids.size(); ++r) {
        csv += ids[r];
        for (std::size_t c = 0; c < ids.size(); ++c) {
            double v = m(r, c);
            if ((zero_diagonal && r == c) || std::fabs(v) < 1e-12)
                v = 0.0;
            csv += "," + fmt(v);
        }
        csv += "\n";
    }
    return csv;
}

std::string patterns_csv(const ExperimentReport& report) {
    std::string csv = "subject,channel,f1,f2,f3,f4,f5,f6\n";
    for (const auto& [id, pattern] : report.patterns) {
        const auto names_it = report.pattern_channels.find(id);
        for (std::size_t ch = 0; ch < pattern.rows(); ++ch) {
            std::string name;
            if (names_it != report.pattern_channels.end() && ch < names_it->second.size())
                name = names_it->second[ch];
            else
                name = "ch" + std::to_string(ch + 1);
            csv += id + "," + name;
            for (std::size_t f = 0; f < pattern.cols(); ++f)
                csv += "," + fmt(pattern(ch, f));
            csv += "\n";
        }
    }
    return csv;
}

std::string scatter_svg(const ExperimentReport& report) {
    // One panel per baseline arm: baseline test error against mkl test
    // error, with the identity line separating wins from losses.
    std::vector<std::string> baselines;
    bool have_mkl = false;
    for (Method m : report.config.methods) {
        if (m == Method::mkl)
            have_mkl = true;
        else
            baselines.push_back(method_name(m));
    }

    std::map<std::string, std::map<std::string, double>> errors; // method -> subject -> error
    for (const MethodResult& r : report.results)
        if (r.ok && !std::isnan(r.test_error))
            errors[r.method][r.subject] = r.test_error;

    constexpr int kPanel = 300;
    constexpr int kMarginLeft = 60;
    constexpr int kMarginTop = 40;
    constexpr int kMarginBottom = 60;
    constexpr int kGap = 50;

    if (!have_mkl || baselines.empty() || !errors.count("mkl")) {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"80\">"
               "<text x=\"20\" y=\"45\" font-family=\"sans-serif\">"
               "no mkl/baseline pair to plot</text></svg>\n";
    }

    const int width =
        kMarginLeft + static_cast<int>(baselines.size()) * (kPanel + kGap) - kGap + 20;
    const int height = kMarginTop + kPanel + kMarginBottom;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";

    const std::map<std::string, double>& mkl_err = errors.at("mkl");
    for (std::size_t b = 0; b < baselines.size(); ++b) {
        const auto base_it = errors.find(baselines[b]);
        const int x0 = kMarginLeft + static_cast<int>(b) * (kPanel + kGap);
        const int y0 = kMarginTop;

        double top = 0.05;
        if (base_it != errors.end()) {
            for (const auto& [subject, e] : base_it->second) {
                const auto my = mkl_err.find(subject);
                if (my == mkl_err.end())
                    continue;
                top = std::max({top, e, my->second});
            }
        }
        top *= 1.15;
        auto px = [&](double e) { return x0 + e / top * kPanel; };
        auto py = [&](double e) { return y0 + kPanel - e / top * kPanel; };

        svg << "  <rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << kPanel
            << "\" height=\"" << kPanel << "\" fill=\"none\" stroke=\"#444\"/>\n";
        svg << "  <line x1=\"" << px(0.0) << "\" y1=\"" << py(0.0) << "\" x2=\"" << px(top)
            << "\" y2=\"" << py(top) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
        svg << "  <text x=\"" << x0 + kPanel / 2 << "\" y=\"" << y0 + kPanel + 35
            << "\" text-anchor=\"middle\">" << baselines[b] << " error</text>\n";
        svg << "  <text x=\"" << x0 - 40 << "\" y=\"" << y0 + kPanel / 2
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << x0 - 40 << " "
            << y0 + kPanel / 2 << ")\">mkl error</text>\n";
        svg << "  <text x=\"" << x0 - 5 << "\" y=\"" << y0 + kPanel + 15
            << "\" text-anchor=\"middle\">0</text>\n";
        svg << "  <text x=\"" << x0 + kPanel << "\" y=\"" << y0 + kPanel + 15
            << "\" text-anchor=\"middle\">" << fmt_short(top) << "</text>\n";

        if (base_it == errors.end())
            continue;
        for (const auto& [subject, e] : base_it->second) {
            const auto my = mkl_err.find(subject);
            if (my == mkl_err.end())
                continue;
            svg << "  <circle cx=\"" << px(e) << "\" cy=\"" << py(my->second)
                << "\" r=\"5\" fill=\"#1f77b4\" fill-opacity=\"0.75\"><title>" << subject
                << "</title></circle>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows, const std::string& what) {
    if (!rows.is_array())
        throw FormatError("results.json: " + what + " must be an array of rows");
    const std::size_t n_rows = rows.size();
    std::size_t n_cols = 0;
    if (n_rows > 0) {
        if (!rows[0].is_array())
            throw FormatError("results.json: " + what + " rows must be arrays");
        n_cols = rows[0].size();
    }
    Matrix m(n_rows, n_cols);
    for (std::size_t r = 0; r < n_rows; ++r) {
        if (!rows[r].is_array() || rows[r].size() != n_cols)
            throw FormatError("results.json: " + what + " rows must be equal-length arrays");
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (!rows[r][c].is_number())
                throw FormatError("results.json: " + what + " entries must be numbers");
            m(r, c) = rows[r][c].get<double>();
        }
    }
    return m;
}

json opt_json(double v) {
    if (std::isnan(v))
        return nullptr;
    if (std::isinf(v))
        return "inf";
    return v;
}

double opt_from_json(const json& j, const std::string& what) {
    if (j.is_null())
        return kNaN;
    if (j.is_string() && j.get<std::string>() == "inf")
        return std::numeric_limits<double>::infinity();
    if (!j.is_number())
        throw FormatError("results.json: " + what + " must be a number, null, or \"inf\"");
    return j.get<double>();
}

} // namespace

void emit_figures(const ExperimentReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "errors.csv", errors_csv(report));
    write_text(out_dir / "betas.csv", matrix_csv(report.subject_ids, report.beta_matrix, true));
    write_text(out_dir / "alphas.csv",
               matrix_csv(report.subject_ids, report.alpha_matrix, true));
    write_text(out_dir / "patterns.csv", patterns_csv(report));
    write_text(out_dir / "scatter.svg", scatter_svg(report));
    write_text(out_dir / "config.json", config_to_json(report.config));
}

void emit_reports(const ExperimentReport& report, const std::filesystem::path& out_dir) {
    emit_figures(report, out_dir);

    json j;
    j["config"] = json::parse(config_to_json(report.config));
    j["wall_seconds"] = report.wall_seconds;
    j["trace_hash"] = hash_hex(report.trace_hash);
    j["subjects"] = report.subject_ids;
    j["groups"] = report.groups;
    j["results"] = json::array();
    for (const MethodResult& r : report.results) {
        json jr;
        jr["subject"] = r.subject;
        jr["method"] = r.method;
        jr["ok"] = r.ok;
        jr["message"] = r.message;
        jr["test_error"] = opt_json(r.test_error);
        jr["cv_error"] = opt_json(r.cv_error);
        jr["cv_misses"] = r.cv_misses;
        jr["chosen_c"] = opt_json(r.chosen_c);
        jr["chosen_p"] = opt_json(r.chosen_p);
        jr["chosen_lambda"] = opt_json(r.chosen_lambda);
        jr["view_ids"] = r.view_ids;
        jr["betas"] = r.betas;
        j["results"].push_back(std::move(jr));
    }
    j["beta_matrix"] = matrix_to_json(report.beta_matrix);
    j["alpha_matrix"] = matrix_to_json(report.alpha_matrix);
    j["patterns"] = json::object();
    for (const auto& [id, pattern] : report.patterns) {
        json jp;
        const auto names_it = report.pattern_channels.find(id);
        jp["channels"] = names_it != report.pattern_channels.end()
                             ? json(names_it->second)
                             : json(json::array());
        jp["values"] = matrix_to_json(pattern);
        j["patterns"][id] = std::move(jp);
    }

    write_text(out_dir / "results.json", j.dump(2) + "\n");
    write_text(out_dir / "selection_trace.txt", report.selection_trace);
}

ExperimentReport load_report(const std::filesystem::path& results_json) {
    std::ifstream in(results_json, std::ios::binary);
    if (!in)
        throw IoError("cannot open report: " + results_json.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("results " + results_json.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("config") || !j.contains("results"))
        throw FormatError("results " + results_json.string() +
                          ": expected an object with 'config' and 'results'");

    ExperimentReport report;
    report.config = parse_config(j["config"].dump(), results_json.string() + "#config");
    if (j.contains("wall_seconds") && j["wall_seconds"].is_number())
        report.wall_seconds = j["wall_seconds"].get<double>();
    if (j.contains("trace_hash") && j["trace_hash"].is_string())
        report.trace_hash =
            std::stoull(j["trace_hash"].get<std::string>(), nullptr, 16);
    if (j.contains("subjects") && j["subjects"].is_array())
        for (const json& s : j["subjects"])
            report.subject_ids.push_back(s.get<std::string>());
    if (j.contains("groups") && j["groups"].is_object())
        for (auto it = j["groups"].begin(); it != j["groups"].end(); ++it)
            report.groups[it.key()] = it.value().get<std::string>();

    for (const json& jr : j["results"]) {
        MethodResult r;
        r.subject = jr.at("subject").get<std::string>();
        r.method = jr.at("method").get<std::string>();
        r.ok = jr.at("ok").get<bool>();
        if (jr.contains("message") && jr["message"].is_string())
            r.message = jr["message"].get<std::string>();
        r.test_error = opt_from_json(jr.at("test_error"), "test_error");
        r.cv_error = opt_from_json(jr.at("cv_error"), "cv_error");
        if (jr.contains("cv_misses") && jr["cv_misses"].is_number_integer())
            r.cv_misses = jr["cv_misses"].get<long>();
        r.chosen_c = opt_from_json(jr.at("chosen_c"), "chosen_c");
        r.chosen_p = opt_from_json(jr.at("chosen_p"), "chosen_p");
        r.chosen_lambda = opt_from_json(jr.at("chosen_lambda"), "chosen_lambda");
        if (jr.contains("view_ids"))
            for (const json& v : jr["view_ids"])
                r.view_ids.push_back(v.get<std::string>());
        if (jr.contains("betas"))
            for (const json& v : jr["betas"])
                r.betas.push_back(v.get<double>());
        report.results.push_back(std::move(r));
    }

    if (j.contains("beta_matrix"))
        report.beta_matrix = matrix_from_json(j["beta_matrix"], "beta_matrix");
    if (j.contains("alpha_matrix"))
        report.alpha_matrix = matrix_from_json(j["alpha_matrix"], "alpha_matrix");
    if (j.contains("patterns") && j["patterns"].is_object()) {
        for (auto it = j["patterns"].begin(); it != j["patterns"].end(); ++it) {
            const json& jp = it.value();
            report.patterns[it.key()] = matrix_from_json(jp.at("values"), "patterns");
            if (jp.contains("channels"))
                for (const json& c : jp["channels"])
                    report.pattern_channels[it.key()].push_back(c.get<std::string>());
        }
    }
    return report;
}

} // namespace mklcsp::pipeline
