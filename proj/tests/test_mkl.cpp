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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mklcsp/errors.hpp"
#include "mklcsp/kernels/gram.hpp"
#include "mklcsp/linalg/rng.hpp"
#include "mklcsp/mkl/mkl.hpp"
#include "mklcsp/mkl/svm.hpp"

using namespace mklcsp;
using kernels::KernelMatrix;
using kernels::KernelStack;
using mkl::MklModel;
using mkl::SvmSolution;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = rng.normal();
    return m;
}

double dual_objective(const Matrix& k, const std::vector<int>& y,
                      const std::vector<double>& a) {
    const std::size_t n = y.size();
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        obj += a[i];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < n; ++l)
            obj -= 0.5 * a[i] * a[l] * y[i] * y[l] * k(i, l);
    return obj;
}

void check_feasible(const SvmSolution& sol, const std::vector<int>& y, double c) {
    double eq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        eq += sol.alphas[i] * y[i];
        CHECK(sol.alphas[i] >= -1e-9);
        CHECK(sol.alphas[i] <= c + 1e-9);
    }
    CHECK(std::abs(eq) <= 1e-8);
}

// Exact dual optimum by enumerating active sets via the KKT conditions.
// For each assignment of every point to {lower bound, free, upper bound}
// the free alphas solve a linear system; the best feasible candidate is
// the optimum.  Exponential, so only usable for n <= 6.
double exact_dual_optimum(const Matrix& k, const std::vector<int>& y, double c) {
    const std::size_t n = y.size();
    double best = -kInf;
    std::vector<int> state(n, 0); // 0 = at 0, 1 = free, 2 = at C

    const std::size_t total = static_cast<std::size_t>(std::pow(3.0, static_cast<double>(n)));
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t rem = code;
        for (std::size_t i = 0; i < n; ++i) {
            state[i] = static_cast<int>(rem % 3);
            rem /= 3;
        }
        std::vector<std::size_t> free;
        for (std::size_t i = 0; i < n; ++i)
            if (state[i] == 1)
                free.push_back(i);

        // Stationarity for free points: sum_l a_l y_i y_l K(i,l) + mu y_i = 1.
        // Unknowns: free alphas and the multiplier mu.
        const std::size_t m = free.size();
        std::vector<double> a(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (state[i] == 2)
                a[i] = c;

        if (m == 0) {
            double eq = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                eq += a[i] * y[i];
            if (std::abs(eq) > 1e-9)
                continue;
            best = std::max(best, dual_objective(k, y, a));
            continue;
        }

        // Dense (m+1) x (m+1) system solved by Gaussian elimination.
        const std::size_t dim = m + 1;
        std::vector<std::vector<double>> mat(dim, std::vector<double>(dim + 1, 0.0));
        for (std::size_t r = 0; r < m; ++r) {
            const std::size_t i = free[r];
            for (std::size_t s = 0; s < m; ++s)
                mat[r][s] = y[i] * y[free[s]] * k(i, free[s]);
            mat[r][m] = y[i];
            double rhs = 1.0;
            for (std::size_t l = 0; l < n; ++l)
                if (state[l] == 2)
                    rhs -= a[l] * y[i] * y[l] * k(i, l);
            mat[r][dim] = rhs;
        }
        for (std::size_t s = 0; s < m; ++s)
            mat[m][s] = y[free[s]];
        double rhs_eq = 0.0;
        for (std::size_t l = 0; l < n; ++l)
            if (state[l] == 2)
                rhs_eq -= a[l] * y[l];
        mat[m][dim] = rhs_eq;

        bool singular = false;
        for (std::size_t col = 0; col < dim; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < dim; ++r)
                if (std::abs(mat[r][col]) > std::abs(mat[piv][col]))
                    piv = r;
            if (std::abs(mat[piv][col]) < 1e-12) {
                singular = true;
                break;
            }
            std::swap(mat[col], mat[piv]);
            for (std::size_t r = 0; r < dim; ++r) {
                if (r == col)
                    continue;
                const double f = mat[r][col] / mat[col][col];
                for (std::size_t s = col; s <= dim; ++s)
                    mat[r][s] -= f * mat[col][s];
            }
        }
        if (singular)
            continue;

        bool feasible = true;
        for (std::size_t r = 0; r < m; ++r) {
            const double v = mat[r][dim] / mat[r][r];
            if (v < -1e-9 || v > c + 1e-9) {
                feasible = false;
                break;
            }
            a[free[r]] = std::min(std::max(v, 0.0), c);
        }
        if (!feasible)
            continue;
        best = std::max(best, dual_objective(k, y, a));
    }
    return best;
}

KernelStack stack_of(const std::vector<Matrix>& kernels,
                     const std::vector<std::string>& ids) {
    KernelStack stack;
    stack.view_ids = ids;
    for (const Matrix& k : kernels)
        stack.kernels.push_back(KernelMatrix{k, 1.0});
    return stack;
}

// Linearly separable two-view toy problem.
std::vector<Matrix> toy_blocks(Rng& rng, std::size_t n, std::vector<int>& labels) {
    labels.resize(n);
    Matrix a(n, 2);
    Matrix b(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = (i % 2 == 0) ? +1 : -1;
        const double center = labels[i] * 2.0;
        a(i, 0) = center + 0.3 * rng.normal();
        a(i, 1) = rng.normal();
        b(i, 0) = center + 0.3 * rng.normal();
        b(i, 1) = rng.normal();
        b(i, 2) = rng.normal();
    }
    return {a, b};
}

} // namespace

TEST_CASE("svm solves the two-point max-margin problem analytically") {
    Matrix k(2, 2);
    k(0, 0) = 1.0; k(0, 1) = -1.0;
    k(1, 0) = -1.0; k(1, 1) = 1.0; // linear kernel of x = +1, -1
    const std::vector<int> y{+1, -1};
    const SvmSolution sol = mkl::svm_dual_solve(KernelMatrix{k, 1.0}, y, 10.0);

    CHECK(sol.converged);
    CHECK(sol.alphas[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sol.alphas[1] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sol.bias == doctest::Approx(0.0).epsilon(1e-6));
    // Decision at the training points: f(+1) = 1, f(-1) = -1.
    CHECK(sol.decision_raw[0] + sol.bias == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(sol.decision_raw[1] + sol.bias == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(sol.support.size() == 2);
}

TEST_CASE("svm solutions are always dual feasible") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 6 + rep;
        const Matrix f = random_matrix(rng, n, 3);
        const KernelMatrix k = kernels::linear_kernel(f);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = (i % 2 == 0) ? +1 : -1;
        const double c = 0.1 * std::pow(10.0, rep % 4);
        const SvmSolution sol = mkl::svm_dual_solve(k, y, c);
        check_feasible(sol, y, c);
        CHECK(std::isfinite(sol.objective));
    }
}

TEST_CASE("svm matches the exact active-set oracle on small problems") {
    Rng rng(5);
    for (int rep = 0; rep < 8; ++rep) {
        const std::size_t n = 4 + rep % 3; // 4..6
        const Matrix f = random_matrix(rng, n, 2);
        const KernelMatrix k = kernels::linear_kernel(f);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = (i < n / 2) ? +1 : -1;
        const double c = (rep % 2 == 0) ? 1.0 : 10.0;

        const SvmSolution sol = mkl::svm_dual_solve(k, y, c);
        const double exact = exact_dual_optimum(k.k, y, c);
        CHECK(sol.objective == doctest::Approx(exact).epsilon(1e-6));
        CHECK(dual_objective(k.k, y, sol.alphas) ==
              doctest::Approx(sol.objective).epsilon(1e-12));
    }
}

TEST_CASE("svm warm starts reach the same solution faster") {
    Rng rng(7);
    const std::size_t n = 40;
    const Matrix f = random_matrix(rng, n, 4);
    const KernelMatrix k = kernels::linear_kernel(f);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = (i % 2 == 0) ? +1 : -1;

    const SvmSolution cold = mkl::svm_dual_solve(k, y, 1.0);
    mkl::SvmOptions opts;
    opts.warm_start = cold.alphas;
    const SvmSolution warm = mkl::svm_dual_solve(k, y, 1.0, opts);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-8));
    CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("svm validates labels and parameters") {
    Matrix k(2, 2);
    k(0, 0) = 1.0;
    k(1, 1) = 1.0;
    CHECK_THROWS_AS(mkl::svm_dual_solve(KernelMatrix{k, 1.0}, {+1, +1}, 1.0),
                    DegenerateInputError);
    CHECK_THROWS_AS(mkl::svm_dual_solve(KernelMatrix{k, 1.0}, {+1, -1}, 0.0),
                    ParameterError);
    CHECK_THROWS_AS(mkl::svm_dual_solve(KernelMatrix{k, 1.0}, {+1, 2}, 1.0),
                    ParameterError);
    CHECK_THROWS_AS(mkl::svm_dual_solve(KernelMatrix{k, 1.0}, {+1}, 1.0),
                    DimensionError);
}

TEST_CASE("combine_kernels selects, zeroes and sums") {
    Rng rng(9);
    std::vector<Matrix> ks;
    for (int j = 0; j < 3; ++j) {
        const Matrix f = random_matrix(rng, 5, 3);
        ks.push_back(kernels::linear_kernel(f).k);
    }
    const KernelStack stack = stack_of(ks, {"a", "b", "c"});

    const KernelMatrix first = mkl::combine_kernels(stack, {1.0, 0.0, 0.0});
    CHECK(max_abs_diff(first.k, ks[0]) == 0.0);

    const KernelMatrix zero = mkl::combine_kernels(stack, {0.0, 0.0, 0.0});
    CHECK(frobenius_norm(zero.k) == 0.0);

    const std::vector<double> beta{0.2, 1.3, 0.5};
    const KernelMatrix mix = mkl::combine_kernels(stack, beta);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t l = 0; l < 5; ++l) {
            const double oracle =
                beta[0] * ks[0](i, l) + beta[1] * ks[1](i, l) + beta[2] * ks[2](i, l);
            CHECK(std::abs(mix.k(i, l) - oracle) <= 1e-12);
        }

    CHECK_THROWS_AS(mkl::combine_kernels(stack, {1.0, -0.1, 0.0}), ParameterError);
    CHECK_THROWS_AS(mkl::combine_kernels(stack, {1.0, 0.0}), DimensionError);
}

TEST_CASE("beta_update distributes weight by the closed lp form") {
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
        for (std::size_t m : {2u, 3u, 7u}) {
            const std::vector<double> beta =
                mkl::beta_update(std::vector<double>(m, 0.4), p);
            const double pe = (p == 1.0) ? 1.0001 : p;
            for (double b : beta)
                CHECK(b == doctest::Approx(std::pow(static_cast<double>(m), -1.0 / pe))
                               .epsilon(1e-12));
        }
    }
}

TEST_CASE("beta_update at p near 1 concentrates on the strong view") {
    const std::vector<double> beta = mkl::beta_update({1.0, 0.01}, 1.0);
    CHECK(beta[1] / beta[0] <= 0.11);
    CHECK(beta[0] > beta[1]);
}

TEST_CASE("beta_update outputs have unit p-norm") {
    Rng rng(11);
    for (double p : {1.0, 1.125, 1.333, 2.0, 8.0}) {
        std::vector<double> s(5);
        for (double& v : s)
            v = std::abs(rng.normal()) + 1e-3;
        const std::vector<double> beta = mkl::beta_update(s, p);
        const double pe = (p == 1.0) ? 1.0001 : p;
        double norm = 0.0;
        for (double b : beta) {
            CHECK(b >= 0.0);
            norm += std::pow(b, pe);
        }
        CHECK(std::pow(norm, 1.0 / pe) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("beta_update handles the degenerate and infinite cases") {
    const std::vector<double> ones = mkl::beta_update({0.3, 0.9, 0.1}, kInf);
    for (double b : ones)
        CHECK(b == 1.0);
    CHECK_THROWS_AS(mkl::beta_update({0.0, 0.0}, 2.0), DegenerateInputError);
    CHECK_THROWS_AS(mkl::beta_update({}, 2.0), ParameterError);
    CHECK_THROWS_AS(mkl::beta_update({1.0, 1.0}, 0.5), ParameterError);
    CHECK_THROWS_AS(mkl::beta_update({-1.0, 1.0}, 2.0), ParameterError);
}

TEST_CASE("single-view MKL reduces to the plain SVM") {
    Rng rng(13);
    std::vector<int> y;
    const std::vector<Matrix> blocks = toy_blocks(rng, 20, y);

    for (double p : {1.0, 2.0, kInf}) {
        const MklModel model = mkl::mkl_train({blocks[0]}, {"only"}, y, 1.0, p);
        REQUIRE(model.betas.size() == 1);
        CHECK(model.betas[0] == doctest::Approx(1.0).epsilon(1e-9));

        const KernelMatrix k =
            kernels::normalize_avg_diag(kernels::linear_kernel(blocks[0]));
        const SvmSolution direct = mkl::svm_dual_solve(k, y, 1.0);
        const std::vector<double> pred = mkl::mkl_predict(model, {blocks[0]});
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(pred[i] ==
                  doctest::Approx(direct.decision_raw[i] + direct.bias).epsilon(1e-10));
    }
}

TEST_CASE("two identical kernels at p = 2 share the weight as 2^-1/2") {
    Rng rng(17);
    std::vector<int> y;
    const std::vector<Matrix> blocks = toy_blocks(rng, 16, y);
    const MklModel model =
        mkl::mkl_train({blocks[0], blocks[0]}, {"a", "b"}, y, 1.0, 2.0);
    REQUIRE(model.betas.size() == 2);
    const double expected = std::pow(2.0, -0.5);
    CHECK(model.betas[0] == doctest::Approx(expected).epsilon(1e-6));
    CHECK(model.betas[1] == doctest::Approx(expected).epsilon(1e-6));
    CHECK(model.converged);
}

TEST_CASE("p = infinity equals the sum-kernel SVM") {
    Rng rng(19);
    std::vector<int> y;
    const std::vector<Matrix> blocks = toy_blocks(rng, 18, y);
    const MklModel model = mkl::mkl_train(blocks, {"a", "b"}, y, 2.0, kInf);
    for (double b : model.betas)
        CHECK(b == 1.0);

    // Oracle: SVM on the sum of the normalized kernels.
    const KernelMatrix ka = kernels::normalize_avg_diag(kernels::linear_kernel(blocks[0]));
    const KernelMatrix kb = kernels::normalize_avg_diag(kernels::linear_kernel(blocks[1]));
    Matrix sum = ka.k;
    sum.add_scaled(kb.k, 1.0);
    const SvmSolution direct = mkl::svm_dual_solve(KernelMatrix{sum, 1.0}, y, 2.0);

    const std::vector<double> pred = mkl::mkl_predict(model, blocks);
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(pred[i] ==
              doctest::Approx(direct.decision_raw[i] + direct.bias).epsilon(1e-4));
}

TEST_CASE("finite-p weights satisfy the norm constraint") {
    Rng rng(23);
    std::vector<int> y;
    std::vector<Matrix> blocks = toy_blocks(rng, 20, y);
    blocks.push_back(random_matrix(rng, 20, 2)); // one uninformative view

    for (double p : {1.0, 1.125, 1.333, 2.0}) {
        const MklModel model = mkl::mkl_train(blocks, {"a", "b", "junk"}, y, 1.0, p);
        const double pe = (p == 1.0) ? 1.0001 : p;
        double norm = 0.0;
        for (double b : model.betas) {
            CHECK(b >= 0.0);
            norm += std::pow(b, pe);
        }
        CHECK(std::pow(norm, 1.0 / pe) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("the MKL objective trace is non-increasing with tight inner solves") {
    Rng rng(29);
    std::vector<int> y;
    std::vector<Matrix> blocks = toy_blocks(rng, 24, y);
    blocks.push_back(random_matrix(rng, 24, 4));

    mkl::MklOptions opts;
    opts.inner_tol = 1e-10;
    const MklModel model = mkl::mkl_train(blocks, {"a", "b", "c"}, y, 1.0, 1.333, opts);
    REQUIRE(model.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < model.objective_trace.size(); ++i)
        CHECK(model.objective_trace[i] <= model.objective_trace[i - 1] + 1e-8);
}

TEST_CASE("flipping all labels negates the decision function") {
    Rng rng(31);
    std::vector<int> y;
    const std::vector<Matrix> blocks = toy_blocks(rng, 16, y);
    std::vector<int> flipped(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        flipped[i] = -y[i];

    const MklModel pos = mkl::mkl_train(blocks, {"a", "b"}, y, 1.0, 2.0);
    const MklModel neg = mkl::mkl_train(blocks, {"a", "b"}, flipped, 1.0, 2.0);
    const std::vector<double> fp = mkl::mkl_predict(pos, blocks);
    const std::vector<double> fn = mkl::mkl_predict(neg, blocks);
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(fp[i] == doctest::Approx(-fn[i]).epsilon(1e-8));
}

TEST_CASE("per-view normalization makes training scale invariant") {
    Rng rng(37);
    std::vector<int> y;
    const std::vector<Matrix> blocks = toy_blocks(rng, 16, y);
    Matrix scaled = blocks[0];
    scaled.scale(37.0);

    const MklModel base = mkl::mkl_train({blocks[0]}, {"v"}, y, 1.0, 2.0);
    const MklModel big = mkl::mkl_train({scaled}, {"v"}, y, 1.0, 2.0);
    const std::vector<double> fb = mkl::mkl_predict(base, {blocks[0]});
    const std::vector<double> fs = mkl::mkl_predict(big, {scaled});
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(fb[i] == doctest::Approx(fs[i]).epsilon(1e-8));
}

TEST_CASE("training-set margins satisfy the KKT bound on a separable toy") {
    Rng rng(41);
    std::vector<int> y;
    const std::vector<Matrix> blocks = toy_blocks(rng, 20, y);
    const double c = 100.0; // effectively hard margin on separable data
    const MklModel model = mkl::mkl_train(blocks, {"a", "b"}, y, c, 2.0);
    const std::vector<double> f = mkl::mkl_predict(model, blocks);
    for (std::size_t i = 0; i < y.size(); ++i) {
        // Interior support vectors sit on the margin; everything else is
        // outside it.
        const double alpha = model.solution.alphas[i];
        if (alpha > 1e-8 && alpha < c - 1e-8)
            CHECK(y[i] * f[i] >= 1.0 - 1e-5);
    }
}

TEST_CASE("zero test features with zero bias predict the positive class") {
    Rng rng(43);
    std::vector<int> y;
    const std::vector<Matrix> blocks = toy_blocks(rng, 12, y);
    MklModel model = mkl::mkl_train(blocks, {"a", "b"}, y, 1.0, 2.0);
    model.solution.bias = 0.0;

    const std::vector<Matrix> zeros{Matrix(1, blocks[0].cols()),
                                    Matrix(1, blocks[1].cols())};
    const std::vector<double> f = mkl::mkl_predict(model, zeros);
    REQUIRE(f.size() == 1);
    CHECK(f[0] == 0.0);
    CHECK(mkl::predict_labels(f) == std::vector<int>{+1});
}

TEST_CASE("mkl_predict validates the view count") {
    Rng rng(47);
    std::vector<int> y;
    const std::vector<Matrix> blocks = toy_blocks(rng, 12, y);
    const MklModel model = mkl::mkl_train(blocks, {"a", "b"}, y, 1.0, 2.0);
    CHECK_THROWS_AS(mkl::mkl_predict(model, {blocks[0]}), DimensionError);
}

TEST_CASE("mkl_train validates parameters") {
    Rng rng(53);
    std::vector<int> y;
    const std::vector<Matrix> blocks = toy_blocks(rng, 10, y);
    CHECK_THROWS_AS(mkl::mkl_train(blocks, {"a"}, y, 1.0, 2.0), DimensionError);
    CHECK_THROWS_AS(mkl::mkl_train(blocks, {"a", "b"}, y, -1.0, 2.0), ParameterError);
    CHECK_THROWS_AS(mkl::mkl_train(blocks, {"a", "b"}, y, 1.0, 0.25), ParameterError);
    CHECK_THROWS_AS(mkl::mkl_train(std::vector<Matrix>{}, {}, y, 1.0, 2.0),
                    ParameterError);
}

TEST_CASE("predict_labels maps signs with ties to +1") {
    CHECK(mkl::predict_labels({0.3, -0.2, 0.0, -0.0}) ==
          std::vector<int>{+1, -1, +1, +1});
}
