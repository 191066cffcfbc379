#include "mmfm/global_stage.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

namespace mmfm {

namespace {

// T x (N*p) matrix whose row t is vec(X_t), column-major.
Matrix stack_vec(const GroupSeries& g) {
    const int T = g.time_len();
    const Eigen::Index d = static_cast<Eigen::Index>(g.rows()) * g.cols();
    Matrix u(T, d);
    for (int t = 0; t < T; ++t)
        u.row(t) = Eigen::Map<const Vector>(g.obs[t].data(), d).transpose();
    return u;
}

// Cross-moment matrix Theta(a + N_a*j1, b + N_b*j2) = (1/T) sum_t X_at(a, j1) X_bt(b, j2).
// Every Omega block of the pair, in both directions, is a slice of it.
Matrix cross_moments(const Matrix& ua, const Matrix& ub) {
    return (ua.transpose() * ub) / static_cast<double>(ua.rows());
}

// Row-direction contribution of one ordered pair (m, i) given Theta_{mi}:
// sum over m's columns j1 of the Gram of the j1-th contiguous row block.
void add_w1_from_theta(const Matrix& theta, int n_m, int p, Matrix& w) {
    for (int j1 = 0; j1 < p; ++j1) {
        const auto block = theta.middleRows(static_cast<Eigen::Index>(j1) * n_m, n_m);
        w.noalias() += block * block.transpose();
    }
}

// Column-direction contribution: rows of group m play the role of columns,
// picked out of Theta with stride N_m. Column order inside the slice is
// irrelevant because only the Gram of the slice enters.
void add_w2_from_theta(const Matrix& theta, int n_m, int p, Matrix& w) {
    Matrix slice(p, theta.cols());
    for (int j1 = 0; j1 < n_m; ++j1) {
        for (int c = 0; c < p; ++c) slice.row(c) = theta.row(j1 + static_cast<Eigen::Index>(c) * n_m);
        w.noalias() += slice * slice.transpose();
    }
}

void require_pairable(const GroupedPanel& panel) {
    if (panel.group_count() < 2) throw std::invalid_argument("requires >=2 groups");
    if (panel.time_len() < 2) throw std::invalid_argument("requires T >= 2");
}

int majority_vote(const std::vector<int>& votes) {
    std::map<int, int> counts;
    for (int v : votes) ++counts[v];
    int best = votes.front(), best_count = 0;
    for (const auto& [value, count] : counts)  // ascending keys: ties go to the smallest
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    return best;
}

}  // namespace

Matrix compute_w1(const GroupedPanel& panel, int group) {
    require_pairable(panel);
    const GroupSeries& gm = panel.groups.at(group);
    const int n_m = gm.rows(), p = gm.cols();
    const Matrix um = stack_vec(gm);

    Matrix w = Matrix::Zero(n_m, n_m);
    for (int i = 0; i < panel.group_count(); ++i) {
        if (i == group) continue;
        const Matrix theta = cross_moments(um, stack_vec(panel.groups[i]));
        add_w1_from_theta(theta, n_m, p, w);
    }
    return 0.5 * (w + w.transpose());
}

Matrix compute_w2(const GroupedPanel& panel, int group) {
    require_pairable(panel);
    const GroupSeries& gm = panel.groups.at(group);
    const int n_m = gm.rows(), p = gm.cols();
    const Matrix um = stack_vec(gm);

    Matrix w = Matrix::Zero(p, p);
    for (int i = 0; i < panel.group_count(); ++i) {
        if (i == group) continue;
        const Matrix theta = cross_moments(um, stack_vec(panel.groups[i]));
        add_w2_from_theta(theta, n_m, p, w);
    }
    return 0.5 * (w + w.transpose());
}

int estimate_rank(const Vector& ladder, int dim_cap) {
    const int len = static_cast<int>(ladder.size());
    if (len < 2) throw std::invalid_argument("estimate_rank: ladder needs >= 2 values");
    const double lead = ladder(0);
    if (!(lead > 0.0)) throw std::runtime_error("degenerate spectrum");

    const double floor = 1e-12 * lead;
    const int end = std::min(std::max(1, dim_cap / 3), len - 1);
    int best = 1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= end; ++i) {
        const double hi = std::max(ladder(i - 1), floor);
        const double lo = std::max(ladder(i), floor);
        const double ratio = lo / hi;
        if (ratio < best_ratio) {
            best_ratio = ratio;
            best = i;
        }
    }
    return best;
}

RankDiagnostics make_rank_diagnostics(const Vector& ladder, int dim_cap) {
    RankDiagnostics diag;
    diag.eigenvalues = ladder;
    const int len = static_cast<int>(ladder.size());
    diag.ratios = Vector::Zero(std::max(0, len - 1));
    if (len >= 1 && ladder(0) > 0.0) {
        const double floor = 1e-12 * ladder(0);
        for (int i = 1; i < len; ++i)
            diag.ratios(i - 1) = std::max(ladder(i), floor) / std::max(ladder(i - 1), floor);
    }
    diag.selected = estimate_rank(ladder, dim_cap);
    return diag;
}

std::pair<Matrix, Matrix> split_loading(const Matrix& vectors, int k) {
    if (k < 1 || k > vectors.cols()) throw std::invalid_argument("split_loading: bad rank");
    return {vectors.leftCols(k), vectors.rightCols(vectors.cols() - k)};
}

GlobalFit fit_global(const GroupedPanel& panel, std::optional<int> k1, std::optional<int> k2) {
    ValidationReport report = validate_panel(panel);
    if (!report.ok()) throw std::invalid_argument("fit_global: " + report.violations.front());

    const int M = panel.group_count();
    const int p = panel.cols();

    std::vector<Matrix> stacked(M);
    for (int m = 0; m < M; ++m) stacked[m] = stack_vec(panel.groups[m]);

    // One GEMM per unordered pair; both directions and both members of the
    // pair reuse the same cross-moment matrix.
    std::vector<std::vector<Matrix>> theta(M);
    for (int a = 0; a < M; ++a) theta[a].resize(M);
    for (int a = 0; a < M; ++a)
        for (int b = a + 1; b < M; ++b) theta[a][b] = cross_moments(stacked[a], stacked[b]);
    stacked.clear();

    GlobalFit fit;
    fit.Q1.resize(M);
    fit.B1.resize(M);
    fit.Q2.resize(M);
    fit.B2.resize(M);
    fit.row_eig.resize(M);
    fit.col_eig.resize(M);
    fit.row_diag.resize(M);
    fit.col_diag.resize(M);

    for (int m = 0; m < M; ++m) {
        const int n_m = panel.groups[m].rows();
        Matrix w1 = Matrix::Zero(n_m, n_m);
        Matrix w2 = Matrix::Zero(p, p);
        for (int i = 0; i < M; ++i) {
            if (i == m) continue;
            if (m < i) {
                add_w1_from_theta(theta[m][i], n_m, p, w1);
                add_w2_from_theta(theta[m][i], n_m, p, w2);
            } else {
                // Theta_{mi} = Theta_{im}' : row slices become column slices.
                const Matrix& t_im = theta[i][m];
                for (int j1 = 0; j1 < p; ++j1) {
                    const auto block = t_im.middleCols(static_cast<Eigen::Index>(j1) * n_m, n_m);
                    w1.noalias() += block.transpose() * block;
                }
                Matrix slice(p, t_im.rows());
                for (int j1 = 0; j1 < n_m; ++j1) {
                    for (int c = 0; c < p; ++c)
                        slice.row(c) = t_im.col(j1 + static_cast<Eigen::Index>(c) * n_m).transpose();
                    w2.noalias() += slice * slice.transpose();
                }
            }
        }
        w1 = 0.5 * (w1 + w1.transpose());
        w2 = 0.5 * (w2 + w2.transpose());
        fit.row_eig[m] = sym_eig(w1);
        fit.col_eig[m] = sym_eig(w2);
        fit.row_diag[m] = make_rank_diagnostics(fit.row_eig[m].values, n_m);
        fit.col_diag[m] = make_rank_diagnostics(fit.col_eig[m].values, p);
    }

    std::vector<int> row_votes(M), col_votes(M);
    for (int m = 0; m < M; ++m) {
        row_votes[m] = fit.row_diag[m].selected;
        col_votes[m] = fit.col_diag[m].selected;
    }
    fit.k1_auto = majority_vote(row_votes);
    fit.k2_auto = majority_vote(col_votes);
    fit.k1 = k1.value_or(fit.k1_auto);
    fit.k2 = k2.value_or(fit.k2_auto);

    for (int m = 0; m < M; ++m) {
        if (fit.k1 > panel.groups[m].rows())
            throw std::invalid_argument("fit_global: k1 exceeds rows of group " + std::to_string(m + 1));
        if (fit.k2 > p) throw std::invalid_argument("fit_global: k2 exceeds column count");
        std::tie(fit.Q1[m], fit.B1[m]) = split_loading(fit.row_eig[m].vectors, fit.k1);
        std::tie(fit.Q2[m], fit.B2[m]) = split_loading(fit.col_eig[m].vectors, fit.k2);
    }
    return fit;
}

}  // namespace mmfm
