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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mklcsp/errors.hpp"
#include "mklcsp/pipeline/config.hpp"
#include "mklcsp/pipeline/experiment.hpp"
#include "mklcsp/pipeline/reports.hpp"
#include "mklcsp/pipeline/session.hpp"
#include "mklcsp/simd/ops.hpp"

namespace {

using namespace mklcsp;

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, bool have_seed,
              std::uint64_t seed) {
    synth::CohortSpec spec;
    if (!spec_path.empty())
        spec = pipeline::parse_cohort_spec(slurp(spec_path), spec_path);
    if (have_seed)
        spec.seed = seed;
    const std::filesystem::path manifest = pipeline::write_cohort(out_dir, spec);
    std::cout << "wrote cohort of " << spec.subjects << " subjects to " << out_dir << " ("
              << manifest.filename().string() << ")\n";
    return 0;
}

int cmd_run(const std::string& cohort_dir, const std::string& config_path,
            const std::string& methods_csv, const std::string& out_dir) {
    pipeline::ExperimentConfig config = config_path.empty()
                                            ? pipeline::default_config()
                                            : pipeline::load_config(config_path);
    if (!methods_csv.empty()) {
        config.methods.clear();
        std::stringstream ss(methods_csv);
        std::string name;
        while (std::getline(ss, name, ','))
            if (!name.empty())
                config.methods.push_back(pipeline::parse_method(name));
        pipeline::validate_config(config);
    }
    const pipeline::ExperimentReport report =
        pipeline::run_benchmark_files(cohort_dir, config);
    pipeline::emit_reports(report, out_dir);

    std::size_t failures = 0;
    for (const pipeline::MethodResult& r : report.results)
        failures += r.ok ? 0 : 1;
    std::printf("benchmark: %zu subjects x %zu methods in %.1f s (%zu failures), reports in %s\n",
                report.subject_ids.size(), config.methods.size(), report.wall_seconds, failures,
                out_dir.c_str());
    return 0;
}

int cmd_report(const std::string& in_dir) {
    const std::filesystem::path dir(in_dir);
    const pipeline::ExperimentReport report = pipeline::load_report(dir / "results.json");
    pipeline::emit_figures(report, dir);
    std::cout << "re-emitted figures in " << in_dir << "\n";
    return 0;
}

int cmd_validate(const std::string& session_path) {
    const signal::Recording rec = pipeline::load_session(session_path);
    std::printf("ok: %zu channels, %zu samples at %g Hz, %zu markers\n", rec.data.rows(),
                rec.data.cols(), rec.fs, rec.markers.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-subject motor-imagery decoding benchmark: CSP, composite-CSP, "
                 "and multi-kernel CSP arms over a synthetic EEG cohort"};
    app.require_subcommand(1);
    app.footer("exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical failure\n"
               "SIMD backend: auto-detected; override with MKLCSP_SIMD=scalar|avx2 (active: " +
               std::string(simd::backend_name(simd::active_backend())) + ")");

    std::string spec_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort");
    synth_cmd->add_option("--spec", spec_path, "Cohort spec JSON (defaults when omitted)");
    synth_cmd->add_option("--out", out_dir, "Output directory")->required();
    CLI::Option* seed_opt = synth_cmd->add_option("--seed", seed, "Override the spec seed");

    std::string cohort_dir;
    std::string config_path;
    std::string methods_csv;
    std::string run_out;
    CLI::App* run_cmd = app.add_subcommand("run", "Run the benchmark on a cohort");
    run_cmd->add_option("--cohort", cohort_dir, "Cohort directory (with cohort.json)")
        ->required();
    run_cmd->add_option("--config", config_path, "Experiment config JSON (defaults when omitted)");
    run_cmd->add_option("--methods", methods_csv,
                        "Comma-separated subset: csp-lda,csp-svm,ccsp-lda,ccsp-svm,mkl");
    run_cmd->add_option("--out", run_out, "Report output directory")->required();

    std::string report_dir;
    CLI::App* report_cmd =
        app.add_subcommand("report", "Re-emit figures from a stored results.json");
    report_cmd->add_option("--in", report_dir, "Directory holding results.json")->required();

    std::string session_path;
    CLI::App* validate_cmd = app.add_subcommand("validate", "Check a session file pair");
    validate_cmd->add_option("--session", session_path, "Session meta path or base path")
        ->required();

    try {
        app.parse(argc, argv);
        if (synth_cmd->parsed())
            return cmd_synth(spec_path, out_dir, seed_opt->count() > 0, seed);
        if (run_cmd->parsed())
            return cmd_run(cohort_dir, config_path, methods_csv, run_out);
        if (report_cmd->parsed())
            return cmd_report(report_dir);
        if (validate_cmd->parsed())
            return cmd_validate(session_path);
        return 1;
    } catch (const CLI::ParseError& e) {
        // CLI11 prints usage or help text; fold its error codes into the
        // documented contract (help 0, any usage error 1).
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        // Dimension, definiteness, degeneracy, and numerical failures.
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
