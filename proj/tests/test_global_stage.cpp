#include <cmath>

#include "doctest.h"
#include "mmfm/global_stage.hpp"
#include "mmfm/metrics.hpp"
#include "mmfm/numerics.hpp"
#include "mmfm/simulate.hpp"
#include "oracles.hpp"

using mmfm::GroupedPanel;
using mmfm::Matrix;
using mmfm::Vector;

TEST_SUITE_BEGIN("global");

TEST_CASE("compute_w1 of an all-zero panel is zero") {
    GroupedPanel panel;
    panel.groups.resize(2);
    for (auto& g : panel.groups) g.obs.assign(4, Matrix::Zero(3, 2));
    CHECK(mmfm::compute_w1(panel, 0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("compute_w1 and compute_w2 match the quadruple-loop oracle") {
    mmfm::Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const GroupedPanel panel = oracles::random_panel(rng, 2, 2, 2, 3);
        for (int m = 0; m < 2; ++m) {
            const Matrix w1 = mmfm::compute_w1(panel, m);
            CHECK((w1 - oracles::naive_w1(panel, m)).cwiseAbs().maxCoeff() < 1e-12);
            const Matrix w2 = mmfm::compute_w2(panel, m);
            CHECK((w2 - oracles::naive_w2(panel, m)).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("W statistics stay PSD on arbitrary panels") {
    mmfm::Rng rng(103);
    for (int trial = 0; trial < 5; ++trial) {
        const GroupedPanel panel = oracles::random_panel(rng, 3, 5, 4, 6);
        const Matrix w = mmfm::compute_w1(panel, 1);
        const mmfm::EigenResult eig = mmfm::sym_eig(w);
        CHECK(eig.values.minCoeff() > -1e-10 * w.norm());
    }
}

TEST_CASE("compute_w1 requires two groups") {
    GroupedPanel panel;
    panel.groups.resize(1);
    panel.groups[0].obs.assign(4, Matrix::Zero(3, 2));
    CHECK_THROWS_WITH_AS(mmfm::compute_w1(panel, 0), "requires >=2 groups", std::invalid_argument);
}

TEST_CASE("signed column permutation applied to every group leaves W1 unchanged") {
    mmfm::Rng rng(107);
    const GroupedPanel panel = oracles::random_panel(rng, 3, 4, 5, 8);
    Matrix perm = Matrix::Zero(5, 5);  // signed permutation of columns
    const int order[5] = {3, 0, 4, 1, 2};
    const double sign[5] = {1, -1, 1, -1, -1};
    for (int j = 0; j < 5; ++j) perm(order[j], j) = sign[j];

    GroupedPanel mapped = panel;
    for (auto& g : mapped.groups)
        for (auto& x : g.obs) x = x * perm;

    for (int m = 0; m < 3; ++m) {
        const Matrix a = mmfm::compute_w1(panel, m);
        const Matrix b = mmfm::compute_w1(mapped, m);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, a.norm()));
    }
}

TEST_CASE("left rotation of one group conjugates its W1 and preserves distances") {
    mmfm::Rng rng(109);
    const GroupedPanel panel = oracles::random_panel(rng, 2, 5, 4, 10);
    const Matrix u = mmfm::thin_qr(oracles::random_gaussian(rng, 5, 5)).q;

    GroupedPanel mapped = panel;
    for (auto& x : mapped.groups[0].obs) x = u * x;

    const Matrix w = mmfm::compute_w1(panel, 0);
    const Matrix w_mapped = mmfm::compute_w1(mapped, 0);
    CHECK((w_mapped - u * w * u.transpose()).cwiseAbs().maxCoeff() < 1e-10 * w.norm());

    const Matrix q = mmfm::sym_eig(w).vectors.leftCols(2);
    const Matrix q_mapped = mmfm::sym_eig(w_mapped).vectors.leftCols(2);
    CHECK(mmfm::subspace_distance(q_mapped, u * q) < 1e-8);
}

TEST_CASE("estimate_rank follows the ratio rule") {
    SUBCASE("clear spectral gap") {
        Vector ladder(5);
        ladder << 100, 90, 0.001, 0.0008, 0.0007;
        CHECK(mmfm::estimate_rank(ladder, 15) == 2);
    }
    SUBCASE("flat ladder ties to the smallest index") {
        Vector ladder = Vector::Constant(6, 5.0);
        CHECK(mmfm::estimate_rank(ladder, 6) == 1);
    }
    SUBCASE("geometric ladder ties to the smallest index") {
        Vector ladder(4);
        ladder << 8, 4, 2, 1;
        CHECK(mmfm::estimate_rank(ladder, 4) == 1);
    }
    SUBCASE("zero spectrum is degenerate") {
        Vector ladder = Vector::Zero(4);
        CHECK_THROWS_WITH_AS(mmfm::estimate_rank(ladder, 4), "degenerate spectrum",
                             std::runtime_error);
    }
    SUBCASE("search range end stays clamped to one") {
        Vector ladder(3);
        ladder << 10, 1, 0.5;  // cap/3 < 1 still searches i = 1
        CHECK(mmfm::estimate_rank(ladder, 2) == 1);
    }
}

TEST_CASE("fit_global recovers the global space exactly on a noiseless local-free panel") {
    mmfm::SimConfig cfg = mmfm::SimConfig::defaults(10, 8, 50);
    cfg.noise_scale = 0.0;
    cfg.seed = 13;
    auto [panel, truth] = mmfm::simulate(cfg);
    // Strip the local part so X = R G C' exactly.
    for (int m = 0; m < 3; ++m)
        for (int t = 0; t < cfg.time_len; ++t) panel.groups[m].obs[t] -= truth.Phi[m][t];

    const mmfm::GlobalFit fit = mmfm::fit_global(panel, 3, 2);
    for (int m = 0; m < 3; ++m) {
        CHECK(mmfm::subspace_distance(fit.Q1[m], truth.Q1[m]) < 1e-6);
        CHECK(mmfm::subspace_distance(fit.Q2[m], truth.Q2[m]) < 1e-6);
        // Complements are orthogonal to the estimates by construction.
        CHECK((fit.B1[m].transpose() * fit.Q1[m]).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("global loading error shrinks with T at the theoretical rate") {
    // Strong factors: error ~ T^{-1/2}, so quadrupling T should at least
    // clearly beat a 0.7 factor on Monte Carlo average.
    const int reps = 12;
    double err_short = 0.0, err_long = 0.0;
    for (int r = 0; r < reps; ++r) {
        for (const int t_len : {300, 1200}) {
            mmfm::SimConfig cfg = mmfm::SimConfig::defaults(10, 10, t_len);
            cfg.seed = mmfm::derive_seed(777, {static_cast<std::uint64_t>(r),
                                               static_cast<std::uint64_t>(t_len)});
            const auto [panel, truth] = mmfm::simulate(cfg);
            const mmfm::GlobalFit fit = mmfm::fit_global(panel, 3, 2);
            const double d = mmfm::subspace_distance(fit.Q1[0], truth.Q1[0]);
            (t_len == 300 ? err_short : err_long) += d / reps;
        }
    }
    CHECK(err_long <= 0.7 * err_short);
}

TEST_CASE("per-group selections are reconciled by majority vote") {
    mmfm::SimConfig cfg = mmfm::SimConfig::defaults(20, 20, 800);
    cfg.seed = 2024;
    const auto [panel, truth] = mmfm::simulate(cfg);
    const mmfm::GlobalFit fit = mmfm::fit_global(panel);
    // The vote must equal one of the per-group selections.
    bool seen = false;
    for (const auto& d : fit.row_diag) seen |= d.selected == fit.k1_auto;
    CHECK(seen);
    CHECK(fit.k1 == fit.k1_auto);
    for (int m = 0; m < 3; ++m) CHECK(fit.row_diag[m].selected >= 1);
}

TEST_SUITE_END();
