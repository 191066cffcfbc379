#include <cmath>

#include "doctest.h"
#include "mmfm/simulate.hpp"

using mmfm::Matrix;
using mmfm::SimConfig;

TEST_SUITE_BEGIN("simulate");

TEST_CASE("baseline three-group design has the right shapes and reconstructs") {
    SimConfig cfg = SimConfig::defaults(10, 8, 60);
    cfg.seed = 42;
    const auto [panel, truth] = mmfm::simulate(cfg);

    REQUIRE(panel.group_count() == 3);
    REQUIRE(panel.time_len() == 60);
    CHECK(panel.groups[0].rows() == 10);
    CHECK(panel.groups[0].cols() == 8);
    CHECK(truth.G.front().rows() == 3);
    CHECK(truth.G.front().cols() == 2);
    CHECK(mmfm::validate_panel(panel).ok());

    // The emitted panel equals R G C' + Gamma F Lambda' + E with the stored
    // pieces; check the signal identities and that noise is what remains.
    for (int m = 0; m < 3; ++m)
        for (int t = 0; t < 60; t += 17) {
            const Matrix psi = truth.R[m] * truth.G[t] * truth.C[m].transpose();
            const Matrix phi = truth.Gamma[m] * truth.F[m][t] * truth.Lambda[m].transpose();
            CHECK((psi - truth.Psi[m][t]).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((phi - truth.Phi[m][t]).cwiseAbs().maxCoeff() < 1e-12);
            const Matrix noise = panel.groups[m].obs[t] - psi - phi;
            CHECK(noise.allFinite());
        }
}

TEST_CASE("zero noise scale gives an exact signal decomposition") {
    SimConfig cfg = SimConfig::defaults(8, 6, 40);
    cfg.noise_scale = 0.0;
    cfg.seed = 7;
    const auto [panel, truth] = mmfm::simulate(cfg);
    for (int m = 0; m < 3; ++m)
        for (int t = 0; t < 40; ++t)
            CHECK((panel.groups[m].obs[t] - truth.Psi[m][t] - truth.Phi[m][t]).cwiseAbs().maxCoeff() <
                  1e-14);
}

TEST_CASE("zero AR coefficients leave factors serially uncorrelated") {
    SimConfig cfg = SimConfig::defaults(6, 6, 2000);
    cfg.global_ar.setZero();
    for (auto& m : cfg.local_ar) m.setZero();
    cfg.seed = 3;
    const auto [panel, truth] = mmfm::simulate(cfg);

    const int T = cfg.time_len;
    double num = 0.0, den = 0.0;
    for (int t = 0; t + 1 < T; ++t) num += truth.G[t](0, 0) * truth.G[t + 1](0, 0);
    for (int t = 0; t < T; ++t) den += truth.G[t](0, 0) * truth.G[t](0, 0);
    CHECK(std::abs(num / den) < 3.0 / std::sqrt(static_cast<double>(T)));
}

TEST_CASE("same seed reproduces the panel bit for bit") {
    SimConfig cfg = SimConfig::defaults(7, 5, 30);
    cfg.seed = 1234;
    const auto [a, ta] = mmfm::simulate(cfg);
    const auto [b, tb] = mmfm::simulate(cfg);
    for (int m = 0; m < 3; ++m)
        for (int t = 0; t < 30; ++t)
            CHECK((a.groups[m].obs[t].array() == b.groups[m].obs[t].array()).all());

    cfg.seed = 1235;
    const auto [c, tc] = mmfm::simulate(cfg);
    CHECK((a.groups[0].obs[0].array() != c.groups[0].obs[0].array()).any());
}

TEST_CASE("loading norms scale like the uniform-variance prediction") {
    SimConfig cfg = SimConfig::defaults(200, 20, 2);
    cfg.deltas = {0.0, 0.0, 0.0, 0.0};
    cfg.seed = 99;
    const auto [panel, truth] = mmfm::simulate(cfg);
    // ||R||_F^2 approx k1 * n * Var(U(-1,1)) = k1 * n / 3 at delta = 0.
    const double expected = 3.0 * 200.0 / 3.0;
    const double got = truth.R[0].squaredNorm();
    CHECK(std::abs(got - expected) / expected < 0.3);
}

TEST_CASE("noise covariance matches the Kronecker target entrywise") {
    SimConfig cfg = SimConfig::defaults(3, 2, 5000);
    cfg.dims.k1 = 1;
    cfg.dims.k2 = 1;
    cfg.dims.local.assign(3, {1, 1});
    cfg.global_ar = Matrix::Constant(1, 1, 0.5);
    cfg.local_ar.assign(3, Matrix::Constant(1, 1, 0.5));
    cfg.deltas = {1.0, 1.0, 1.0, 1.0};  // weakest loadings; noise dominates anyway
    cfg.noise_offdiag = 0.2;
    cfg.seed = 5;
    const auto [panel, truth] = mmfm::simulate(cfg);

    const int n = 3, p = 2, T = cfg.time_len;
    Matrix cov = Matrix::Zero(n * p, n * p);
    for (int t = 0; t < T; ++t) {
        const Matrix noise = panel.groups[0].obs[t] - truth.Psi[0][t] - truth.Phi[0][t];
        const Eigen::Map<const mmfm::Vector> v(noise.data(), n * p);
        cov += v * v.transpose();
    }
    cov /= static_cast<double>(T);

    Matrix sig1 = Matrix::Constant(n, n, 0.2), sig2 = Matrix::Constant(p, p, 0.2);
    sig1.diagonal().setOnes();
    sig2.diagonal().setOnes();
    Matrix target(n * p, n * p);
    for (int j1 = 0; j1 < p; ++j1)
        for (int j2 = 0; j2 < p; ++j2)
            target.block(j1 * n, j2 * n, n, n) = sig2(j1, j2) * sig1;
    CHECK((cov - target).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("extreme negative correlation is rejected as non-PSD") {
    SimConfig cfg = SimConfig::defaults(8, 8, 10);
    cfg.noise_offdiag = -0.5;  // equicorrelation needs rho >= -1/(d-1)
    CHECK_THROWS_WITH_AS(mmfm::simulate(cfg), "noise covariance not PSD", std::runtime_error);
}

TEST_CASE("stationary_check tracks the AR(1) variance") {
    auto scalar_factor_path = [](double phi, int t_len, std::uint64_t seed) {
        SimConfig cfg = SimConfig::defaults(4, 4, t_len);
        cfg.dims.k1 = 1;
        cfg.dims.k2 = 1;
        cfg.dims.local.assign(3, {1, 1});
        cfg.global_ar = Matrix::Constant(1, 1, phi);
        cfg.local_ar.assign(3, Matrix::Constant(1, 1, 0.0));
        cfg.seed = seed;
        const auto [panel, truth] = mmfm::simulate(cfg);
        std::vector<double> path(t_len);
        for (int t = 0; t < t_len; ++t) path[t] = truth.G[t](0, 0);
        return path;
    };
    SUBCASE("white noise at T=500") {
        const mmfm::StationaryCheck check = mmfm::stationary_check(scalar_factor_path(0.0, 500, 21), 0.0);
        CHECK(check.theoretical_var == doctest::Approx(1.0));
        CHECK(check.rel_deviation < 0.2);
    }
    SUBCASE("phi = 0.8 at T=2000") {
        const mmfm::StationaryCheck check =
            mmfm::stationary_check(scalar_factor_path(0.8, 2000, 22), 0.8);
        CHECK(check.theoretical_var == doctest::Approx(1.0 / 0.36));
        CHECK(check.rel_deviation < 0.25);
    }
    SUBCASE("constant zero series is degenerate") {
        const std::vector<double> path(300, 0.0);
        CHECK(mmfm::stationary_check(path, 0.5).degenerate);
    }
}

TEST_SUITE_END();
