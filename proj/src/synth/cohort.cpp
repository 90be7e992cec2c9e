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

#include "mklcsp/synth/cohort.hpp"

#include <cmath>
#include <cstdio>

#include "mklcsp/baselines/lda.hpp"
#include "mklcsp/errors.hpp"
#include "mklcsp/linalg/core.hpp"
#include "mklcsp/linalg/rng.hpp"
#include "mklcsp/signal/filter.hpp"
#include "mklcsp/simd/ops.hpp"

namespace mklcsp::synth {
namespace {

// Sources live in the canonical sensorimotor band.
constexpr double kBandLowHz = 8.0;
constexpr double kBandHighHz = 30.0;
constexpr int kBandOrder = 5;

constexpr double kRestMs = 1500.0;
constexpr double kLeadMs = 2000.0;

// Perturbation applied to shared discriminative columns; keeps principal
// angles of the planted subspace well under 15 degrees.
constexpr double kSimilarJog = 0.1;

// Trial-to-trial log-power jitter grows with the noise level so that the
// sigma = 0 cohort stays an exact planted model.
double jitter_logstd(double sigma) {
    return 0.6 * std::min(sigma, 1.0);
}

std::string subject_name(int index, int total) {
    std::size_t width = 2;
    for (int v = total; v >= 100; v /= 10)
        ++width;
    std::string digits = std::to_string(index + 1);
    if (digits.size() < width)
        digits.insert(0, width - digits.size(), '0');
    return "s" + digits;
}

std::vector<double> random_unit_column(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    double norm = 0.0;
    do {
        for (double& x : v)
            x = rng.normal();
        norm = std::sqrt(simd::dot(v.data(), v.data(), n));
    } while (norm < 1e-8);
    simd::scale(v.data(), n, 1.0 / norm);
    return v;
}

// Smallest eigenvalue of A^T A; zero-ish means rank-deficient columns.
double min_gram_eig(const Matrix& a) {
    const Matrix g = matmul_tn(a, a);
    const linalg::SymEigResult se = linalg::sym_eig(g);
    return se.eigenvalues.back();
}

Matrix draw_mixing(Rng& rng, const CohortSpec& spec, int sources, const Matrix* reference,
                   std::size_t src_pos, std::size_t src_neg) {
    const std::size_t ch = static_cast<std::size_t>(spec.channels);
    for (int attempt = 0; attempt < 100; ++attempt) {
        Matrix a(ch, static_cast<std::size_t>(sources));
        for (std::size_t c = 0; c < a.cols(); ++c)
            a.set_column(c, random_unit_column(rng, ch));
        if (reference != nullptr) {
            // Tilt each shared column by atan(kSimilarJog) ~ 5.7 degrees along
            // a random orthogonal direction; the subspace angle stays well
            // under the 15 degree similarity budget for any channel count.
            for (std::size_t c : {src_pos, src_neg}) {
                std::vector<double> col = reference->column(c);
                std::vector<double> dir(ch);
                for (double& x : dir)
                    x = rng.normal();
                const double along = simd::dot(dir.data(), col.data(), ch);
                simd::axpy(-along, col.data(), dir.data(), ch);
                const double dir_norm = std::sqrt(simd::dot(dir.data(), dir.data(), ch));
                if (dir_norm > 1e-8)
                    simd::axpy(kSimilarJog / dir_norm, dir.data(), col.data(), ch);
                const double norm = std::sqrt(simd::dot(col.data(), col.data(), ch));
                simd::scale(col.data(), ch, 1.0 / norm);
                a.set_column(c, col);
            }
        }
        if (min_gram_eig(a) > 1e-6)
            return a;
    }
    throw NumericalError("generate_cohort: could not draw a full-column-rank mixing matrix");
}

Matrix draw_noise_shaper(Rng& rng, std::size_t ch) {
    Matrix g(ch, ch);
    for (std::size_t i = 0; i < g.size(); ++i)
        g.data()[i] = rng.normal() / std::sqrt(static_cast<double>(ch));
    Matrix r = matmul_nt(g, g);
    for (std::size_t i = 0; i < ch; ++i)
        r(i, i) += 0.1;
    double md = 0.0;
    for (std::size_t i = 0; i < ch; ++i)
        md += r(i, i);
    md /= static_cast<double>(ch);
    r.scale(1.0 / md);
    return linalg::cholesky(r);
}

// Orthonormalize the rows of block (two MGS passes) and scale row i to
// norm sqrt(n * power[i]), so the block's sample covariance is exactly
// n * diag(power).
void shape_window(Matrix& block, const std::vector<double>& power) {
    const std::size_t rows = block.rows();
    const std::size_t n = block.cols();
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < rows; ++i) {
            double* ri = block.row(i);
            for (std::size_t j = 0; j < i; ++j) {
                const double* rj = block.row(j);
                const double proj = simd::dot(ri, rj, n) / simd::dot(rj, rj, n);
                simd::axpy(-proj, rj, ri, n);
            }
        }
    }
    for (std::size_t i = 0; i < rows; ++i) {
        double* ri = block.row(i);
        const double norm = std::sqrt(simd::dot(ri, ri, n));
        if (norm < 1e-12)
            throw NumericalError("generate_cohort: degenerate source window");
        simd::scale(ri, n, std::sqrt(static_cast<double>(n) * power[i]) / norm);
    }
}

signal::Recording render_session(const SubjectModel& model, const CohortSpec& spec,
                                 const signal::BandpassFilter& band, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t ch = model.mixing.rows();
    const std::size_t srcs = model.mixing.cols();
    const std::size_t trial_len =
        static_cast<std::size_t>(std::llround(spec.trial_ms * spec.fs / 1000.0));
    const std::size_t spacing =
        trial_len + static_cast<std::size_t>(std::llround(kRestMs * spec.fs / 1000.0));
    const std::size_t lead =
        static_cast<std::size_t>(std::llround(kLeadMs * spec.fs / 1000.0));
    const std::size_t n_trials = 2 * static_cast<std::size_t>(spec.trials_per_class);
    const std::size_t total = 2 * lead + (n_trials - 1) * spacing + trial_len;

    // Balanced, shuffled label sequence.
    std::vector<int> labels;
    labels.insert(labels.end(), spec.trials_per_class, 1);
    labels.insert(labels.end(), spec.trials_per_class, -1);
    for (std::size_t i = labels.size(); i > 1; --i)
        std::swap(labels[i - 1], labels[rng.below(i)]);

    signal::Recording rec;
    rec.fs = spec.fs;
    for (std::size_t c = 0; c < ch; ++c) {
        std::string digits = std::to_string(c + 1);
        if (digits.size() < 2)
            digits.insert(0, 1, '0');
        rec.channel_names.push_back("ch" + digits);
    }

    // Band-limited unit sources.
    Matrix sources(srcs, total);
    for (std::size_t i = 0; i < sources.size(); ++i)
        sources.data()[i] = rng.normal();
    for (std::size_t s = 0; s < srcs; ++s)
        band.apply_in_place(sources.row(s), total);

    const double jstd = jitter_logstd(model.sigma);
    for (std::size_t t = 0; t < n_trials; ++t) {
        const std::size_t cue = lead + t * spacing;
        rec.markers.push_back({static_cast<std::int64_t>(cue), labels[t]});

        Matrix window(srcs, trial_len);
        for (std::size_t s = 0; s < srcs; ++s)
            for (std::size_t i = 0; i < trial_len; ++i)
                window(s, i) = sources(s, cue + i);

        std::vector<double> power(srcs);
        for (std::size_t s = 0; s < srcs; ++s)
            power[s] = jstd > 0.0 ? std::exp(jstd * rng.normal()) : 1.0;
        if (labels[t] == 1)
            power[model.source_pos] *= model.gain_pos;
        else
            power[model.source_neg] *= model.gain_neg;

        shape_window(window, power);
        for (std::size_t s = 0; s < srcs; ++s)
            for (std::size_t i = 0; i < trial_len; ++i)
                sources(s, cue + i) = window(s, i);
    }

    rec.data = matmul(model.mixing, sources);

    if (model.sigma > 0.0) {
        Matrix white(ch, total);
        for (std::size_t i = 0; i < white.size(); ++i)
            white.data()[i] = rng.normal();
        const Matrix shaped = matmul(model.noise_shaper, white);
        rec.data.add_scaled(shaped, model.sigma);
    }
    return rec;
}

} // namespace

std::map<std::string, SubjectData> generate_cohort(const CohortSpec& spec) {
    if (spec.subjects < 2)
        throw ParameterError("generate_cohort: need at least 2 subjects");
    const int sources = spec.sources == 0 ? spec.channels : spec.sources;
    if (sources > spec.channels)
        throw ParameterError("generate_cohort: more sources (" + std::to_string(sources) +
                             ") than channels (" + std::to_string(spec.channels) + ")");
    if (sources < 2)
        throw ParameterError("generate_cohort: need at least 2 sources");
    if (spec.trials_per_class < 1)
        throw ParameterError("generate_cohort: trials_per_class must be positive");
    if (!(spec.trial_ms > 0.0))
        throw ParameterError("generate_cohort: trial_ms must be positive");
    if (!(spec.fs > 2.0 * kBandHighHz))
        throw ParameterError("generate_cohort: fs must exceed twice the source band edge");
    if (!(spec.class_gain > 0.0))
        throw ParameterError("generate_cohort: class_gain must be positive");
    if (!(spec.noise_sigma >= 0.0))
        throw ParameterError("generate_cohort: noise_sigma must be non-negative");
    if (!(spec.similar_fraction >= 0.0 && spec.similar_fraction <= 1.0))
        throw ParameterError("generate_cohort: similar_fraction must be in [0, 1]");

    const int n_similar_others =
        static_cast<int>(std::lround(spec.similar_fraction * (spec.subjects - 1)));

    const signal::BandpassFilter band =
        signal::design_butterworth_bandpass(kBandOrder, kBandLowHz, kBandHighHz, spec.fs);

    std::map<std::string, SubjectData> cohort;
    Matrix reference_mixing;
    for (int j = 0; j < spec.subjects; ++j) {
        SubjectModel model;
        model.id = subject_name(j, spec.subjects);
        model.source_pos = 0;
        model.source_neg = 1;
        model.gain_pos = spec.class_gain;
        model.gain_neg = spec.class_gain;
        model.sigma = spec.noise_sigma;
        model.group = j <= n_similar_others ? "similar" : "dissimilar";

        Rng rng_mix(Rng::mix(spec.seed, static_cast<std::uint64_t>(j), 1));
        const bool shares = j > 0 && j <= n_similar_others;
        model.mixing = draw_mixing(rng_mix, spec, sources,
                                   shares ? &reference_mixing : nullptr,
                                   model.source_pos, model.source_neg);
        if (j == 0)
            reference_mixing = model.mixing;

        Rng rng_noise(Rng::mix(spec.seed, static_cast<std::uint64_t>(j), 2));
        model.noise_shaper = draw_noise_shaper(rng_noise, static_cast<std::size_t>(spec.channels));

        SubjectData data;
        data.model = model;
        data.calibration = render_session(model, spec, band,
                                          Rng::mix(spec.seed, static_cast<std::uint64_t>(j), 3));
        data.test = render_session(model, spec, band,
                                   Rng::mix(spec.seed, static_cast<std::uint64_t>(j), 4));
        cohort.emplace(model.id, std::move(data));
    }
    return cohort;
}

std::vector<double> unmixing_row(const SubjectModel& model, std::size_t index) {
    const std::size_t srcs = model.mixing.cols();
    if (index >= srcs)
        throw ParameterError("unmixing_row: source index out of range");
    // Row `index` of pinv(A) = (A^T A)^-1 A^T, i.e. A (A^T A)^-1 e_index.
    const Matrix gram = matmul_tn(model.mixing, model.mixing);
    std::vector<double> e(srcs, 0.0);
    e[index] = 1.0;
    const std::vector<double> w = linalg::spd_solve(gram, e);
    std::vector<double> u(model.mixing.rows(), 0.0);
    for (std::size_t r = 0; r < model.mixing.rows(); ++r)
        u[r] = simd::dot(model.mixing.row(r), w.data(), srcs);
    // u = A w has channel length; (A w)^T X picks out source `index`.
    return u;
}

double bayes_reference_error(const SubjectModel& model,
                             const std::vector<signal::Trial>& trials) {
    if (trials.empty())
        throw ParameterError("bayes_reference_error: no trials");
    const std::vector<double> u_pos = unmixing_row(model, model.source_pos);
    const std::vector<double> u_neg = unmixing_row(model, model.source_neg);
    const double tau = 0.5 * (std::log(model.gain_pos) - std::log(model.gain_neg));

    auto logvar = [](const std::vector<double>& u, const Matrix& x) {
        const std::size_t n = x.cols();
        std::vector<double> y(n, 0.0);
        for (std::size_t ch = 0; ch < x.rows(); ++ch)
            simd::axpy(u[ch], x.row(ch), y.data(), n);
        const double mean = simd::sum(y.data(), n) / static_cast<double>(n);
        const double var = simd::sumsq_centered(y.data(), n, mean) / static_cast<double>(n);
        return std::log(std::max(var, 1e-300));
    };

    std::vector<int> pred(trials.size());
    std::vector<int> truth(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].data.rows() != model.mixing.rows())
            throw DimensionError("bayes_reference_error: trial channels do not match model");
        const double t = logvar(u_pos, trials[i].data) - logvar(u_neg, trials[i].data);
        pred[i] = t >= tau ? 1 : -1;
        truth[i] = trials[i].label;
    }
    return baselines::error_rate(pred, truth);
}

} // namespace mklcsp::synth
