#pragma once

// Brute-force reference implementations, kept deliberately independent of the
// library's optimized statistic constructions. Test code only.

#include "mmfm/rng.hpp"
#include "mmfm/types.hpp"

namespace oracles {

// W statistic for the row direction, straight from the definition: the full
// quadruple loop over paired groups and column pairs.
inline mmfm::Matrix naive_w1(const mmfm::GroupedPanel& panel, int m) {
    const mmfm::GroupSeries& gm = panel.groups.at(m);
    const int n = gm.rows(), T = gm.time_len();
    mmfm::Matrix w = mmfm::Matrix::Zero(n, n);
    for (int i = 0; i < panel.group_count(); ++i) {
        if (i == m) continue;
        const mmfm::GroupSeries& gi = panel.groups[i];
        // j1 runs over group m's columns, j2 over group i's; the counts agree
        // for the row-direction statistic but differ on transposed data.
        for (int j1 = 0; j1 < gm.cols(); ++j1)
            for (int j2 = 0; j2 < gi.cols(); ++j2) {
                mmfm::Matrix omega = mmfm::Matrix::Zero(n, gi.rows());
                for (int t = 0; t < T; ++t)
                    omega += gm.obs[t].col(j1) * gi.obs[t].col(j2).transpose();
                omega /= static_cast<double>(T);
                w += omega * omega.transpose();
            }
    }
    return w;
}

// Column-direction analogue on transposed observations.
inline mmfm::Matrix naive_w2(const mmfm::GroupedPanel& panel, int m) {
    mmfm::GroupedPanel transposed = panel;
    for (auto& g : transposed.groups)
        for (auto& x : g.obs) x = x.transpose().eval();
    return naive_w1(transposed, m);
}

// Lag-autocovariance statistic from the definition: rows of Y_t as column
// vectors, explicit triple loop over lag and row pairs.
inline mmfm::Matrix naive_m(const std::vector<mmfm::Matrix>& y, int h0) {
    const int T = static_cast<int>(y.size());
    const auto rows = y.front().rows();
    const auto cols = y.front().cols();
    mmfm::Matrix m = mmfm::Matrix::Zero(cols, cols);
    for (int h = 1; h <= h0; ++h)
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < rows; ++j) {
                mmfm::Matrix pi = mmfm::Matrix::Zero(cols, cols);
                for (int t = 0; t + h < T; ++t)
                    pi += y[t].row(i).transpose() * y[t + h].row(j);
                pi /= static_cast<double>(T - h);
                m += pi * pi.transpose();
            }
    return m;
}

inline mmfm::Matrix random_matrix(mmfm::Rng& rng, int rows, int cols, double lo = -1.0,
                                  double hi = 1.0) {
    mmfm::Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
    return m;
}

inline mmfm::Matrix random_gaussian(mmfm::Rng& rng, int rows, int cols) {
    mmfm::Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
    return m;
}

inline mmfm::GroupedPanel random_panel(mmfm::Rng& rng, int groups, int rows, int cols, int t_len) {
    mmfm::GroupedPanel panel;
    panel.groups.resize(groups);
    for (int g = 0; g < groups; ++g) {
        panel.groups[g].name = "g" + std::to_string(g + 1);
        panel.groups[g].obs.resize(t_len);
        for (int t = 0; t < t_len; ++t) panel.groups[g].obs[t] = random_matrix(rng, rows, cols);
    }
    return panel;
}

}  // namespace oracles
