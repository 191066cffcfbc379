#include <cmath>

#include "doctest.h"
#include "mmfm/metrics.hpp"
#include "mmfm/numerics.hpp"
#include "mmfm/rng.hpp"
#include "oracles.hpp"

using mmfm::GroupedPanel;
using mmfm::Matrix;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("subspace distance axioms") {
    mmfm::Rng rng(201);
    const Matrix frame = mmfm::thin_qr(oracles::random_gaussian(rng, 8, 8)).q;
    const Matrix o1 = frame.leftCols(3), o2 = frame.rightCols(3);

    CHECK(mmfm::subspace_distance(o1, o1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mmfm::subspace_distance(o1, o2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mmfm::subspace_distance(o1, o2) == mmfm::subspace_distance(o2, o1));

    // Rotation invariance of the span.
    const Matrix rot = mmfm::thin_qr(oracles::random_gaussian(rng, 3, 3)).q;
    CHECK(mmfm::subspace_distance(o1, o1 * rot) < 1e-12);
}

TEST_CASE("subspace distance equals |sin theta| for unit vectors") {
    mmfm::Rng rng(203);
    for (int trial = 0; trial < 20; ++trial) {
        const double theta = rng.uniform(0.0, 3.14159265358979323846);
        Matrix o1(2, 1), o2(2, 1);
        o1 << 1.0, 0.0;
        o2 << std::cos(theta), std::sin(theta);
        CHECK(mmfm::subspace_distance(o1, o2) ==
              doctest::Approx(std::abs(std::sin(theta))).epsilon(1e-10));
    }
}

TEST_CASE("subspace distance supports different dimensions and stays in range") {
    mmfm::Rng rng(205);
    const Matrix frame = mmfm::thin_qr(oracles::random_gaussian(rng, 7, 5)).q;
    const Matrix o1 = frame.leftCols(2), o2 = frame.leftCols(4);
    const double d = mmfm::subspace_distance(o1, o2);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    // Nested spans with q1 < q2: overlap is q1, so D = sqrt(1 - q1/q2).
    CHECK(d == doctest::Approx(std::sqrt(1.0 - 2.0 / 4.0)).epsilon(1e-10));
}

TEST_CASE("subspace distance rejects non-orthonormal input") {
    Matrix bad = Matrix::Ones(4, 2);
    const Matrix ok = Matrix::Identity(4, 2);
    CHECK_THROWS_AS(mmfm::subspace_distance(bad, ok), std::invalid_argument);
}

TEST_CASE("rss_tss on perfect, mean, and constant predictors") {
    mmfm::Rng rng(207);
    std::vector<Matrix> x;
    for (int t = 0; t < 10; ++t) x.push_back(oracles::random_matrix(rng, 3, 2));

    CHECK(mmfm::rss_tss(x, x) == doctest::Approx(1.0));

    Matrix mean = Matrix::Zero(3, 2);
    for (const Matrix& xt : x) mean += xt;
    mean /= 10.0;
    const std::vector<Matrix> mean_hat(10, mean);
    CHECK(mmfm::rss_tss(x, mean_hat) == doctest::Approx(0.0).epsilon(1e-12));

    const std::vector<Matrix> constant(10, Matrix::Ones(3, 2));
    CHECK_THROWS_WITH_AS(mmfm::rss_tss(constant, constant), "degenerate series",
                         std::runtime_error);
}

TEST_CASE("rss_tss is invariant to a common constant shift") {
    mmfm::Rng rng(209);
    std::vector<Matrix> x, x_hat, x_s, x_hat_s;
    const Matrix shift = Matrix::Constant(3, 2, 4.2);
    for (int t = 0; t < 8; ++t) {
        x.push_back(oracles::random_matrix(rng, 3, 2));
        x_hat.push_back(oracles::random_matrix(rng, 3, 2));
        x_s.push_back(x.back() + shift);
        x_hat_s.push_back(x_hat.back() + shift);
    }
    CHECK(mmfm::rss_tss(x, x_hat) == doctest::Approx(mmfm::rss_tss(x_s, x_hat_s)).epsilon(1e-12));
}

TEST_CASE("correlation summary is near zero for independent noise") {
    mmfm::Rng rng(211);
    const int T = 400;
    GroupedPanel panel;
    panel.groups.resize(3);
    for (auto& g : panel.groups)
        for (int t = 0; t < T; ++t) g.obs.push_back(oracles::random_gaussian(rng, 6, 4));
    const Matrix summary = mmfm::correlation_summary(panel);
    CHECK(summary.cwiseAbs().maxCoeff() < 3.0 / std::sqrt(static_cast<double>(T)));
    CHECK((summary - summary.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a shared factor with positive loadings lifts within and between alike") {
    mmfm::Rng rng(213);
    const int T = 400, n = 6, p = 3;
    std::vector<double> factor(T);
    for (int t = 0; t < T; ++t) factor[t] = rng.gaussian();

    GroupedPanel panel;
    panel.groups.resize(2);
    std::vector<Matrix> loading(2);
    for (int m = 0; m < 2; ++m) loading[m] = oracles::random_matrix(rng, n, p, 0.5, 1.5);
    for (int t = 0; t < T; ++t)
        for (int m = 0; m < 2; ++m)
            panel.groups[m].obs.push_back(factor[t] * loading[m] +
                                          0.1 * oracles::random_gaussian(rng, n, p));

    const Matrix summary = mmfm::correlation_summary(panel);
    CHECK(summary(0, 0) > 0.8);
    CHECK(summary(0, 1) > 0.8);
    CHECK(std::abs(summary(0, 0) - summary(0, 1)) < 0.1);
}

TEST_CASE("a group-specific factor raises within above between") {
    mmfm::Rng rng(215);
    const int T = 500, n = 6, p = 3;
    GroupedPanel panel;
    panel.groups.resize(2);
    const Matrix shared0 = oracles::random_matrix(rng, n, p, 0.5, 1.5);
    const Matrix shared1 = oracles::random_matrix(rng, n, p, 0.5, 1.5);
    const Matrix local0 = oracles::random_matrix(rng, n, p, 0.5, 1.5);
    for (int t = 0; t < T; ++t) {
        const double g = rng.gaussian(), l = rng.gaussian();
        panel.groups[0].obs.push_back(g * shared0 + 1.5 * l * local0 +
                                      0.2 * oracles::random_gaussian(rng, n, p));
        panel.groups[1].obs.push_back(g * shared1 + 0.2 * oracles::random_gaussian(rng, n, p));
    }
    const Matrix summary = mmfm::correlation_summary(panel);
    CHECK(summary(0, 0) > summary(0, 1) + 0.1);
}

TEST_CASE("correlation summary needs enough time points") {
    GroupedPanel panel;
    panel.groups.resize(2);
    for (auto& g : panel.groups) g.obs.assign(2, Matrix::Ones(2, 2));
    CHECK_THROWS_AS(mmfm::correlation_summary(panel), std::invalid_argument);
}

TEST_CASE("parameter counts reproduce the reference arithmetic") {
    const mmfm::ParameterCount c = mmfm::parameter_count(2, 2, 1, 1, 20, 8);
    CHECK(c.loading_params == 84);
    CHECK(c.factors == 5);
    CHECK(c.vectorized_loading_params == 800);

    const mmfm::ParameterCount big = mmfm::parameter_count(3, 2, 2, 2, 40, 40);
    CHECK(big.loading_params == 40 * 5 + 40 * 4);
    CHECK(big.factors == 10);
}

TEST_SUITE_END();
