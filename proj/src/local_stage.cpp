#include "mmfm/local_stage.hpp"

#include <Eigen/SVD>
#include <stdexcept>

#include "mmfm/global_stage.hpp"
#include "mmfm/numerics.hpp"

namespace mmfm {

ProjectedSeries project(const GroupSeries& group, const Matrix& b1, const Matrix& b2) {
    if (b1.rows() != group.rows()) throw std::invalid_argument("project: B1 row mismatch");
    if (b2.rows() != group.cols()) throw std::invalid_argument("project: B2 row mismatch");

    const int T = group.time_len();
    ProjectedSeries proj;
    proj.y1.resize(T);
    proj.y2.resize(T);
    for (int t = 0; t < T; ++t) {
        proj.y1[t].noalias() = b1.transpose() * group.obs[t];
        proj.y2[t].noalias() = b2.transpose() * group.obs[t].transpose();
    }
    return proj;
}

Matrix compute_m(const std::vector<Matrix>& y, int h0) {
    if (y.empty()) throw std::invalid_argument("compute_m: empty series");
    const int T = static_cast<int>(y.size());
    if (h0 < 1) throw std::invalid_argument("compute_m: h0 must be >= 1");
    if (h0 >= T) throw std::invalid_argument("insufficient length for lag");

    const Eigen::Index rows = y.front().rows(), cols = y.front().cols();
    // Row t holds the rows of Y_t laid out back to back, so the i-th
    // contiguous block of cols entries is y_{t,i.}.
    Matrix stacked(T, rows * cols);
    for (int t = 0; t < T; ++t) {
        if (y[t].rows() != rows || y[t].cols() != cols)
            throw std::invalid_argument("compute_m: inconsistent shapes");
        stacked.row(t) = Eigen::Map<const Vector>(Matrix(y[t].transpose()).data(), rows * cols).transpose();
    }

    Matrix m = Matrix::Zero(cols, cols);
    for (int h = 1; h <= h0; ++h) {
        const Eigen::Index len = T - h;
        const Matrix xi =
            (stacked.topRows(len).transpose() * stacked.middleRows(h, len)) / static_cast<double>(len);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto block = xi.middleRows(i * cols, cols);
            m.noalias() += block * block.transpose();
        }
    }
    return 0.5 * (m + m.transpose());
}

LocalFit fit_local(const ProjectedSeries& proj, const Matrix& b1, std::optional<int> r1,
                   std::optional<int> r2, int h0) {
    if (proj.y1.empty() || proj.y2.empty()) throw std::invalid_argument("fit_local: empty projection");

    const Matrix m_col = compute_m(proj.y1, h0);  // p x p, estimates the Q4 direction
    const Matrix m_row = compute_m(proj.y2, h0);  // N x N, estimates the Q3 direction

    LocalFit fit;
    const EigenResult col_eig = sym_eig(m_col);
    const EigenResult row_eig = sym_eig(m_row);
    fit.col_diag = make_rank_diagnostics(col_eig.values, static_cast<int>(m_col.rows()));
    fit.row_diag = make_rank_diagnostics(row_eig.values, static_cast<int>(m_row.rows()));

    const int rank_row = r1.value_or(fit.row_diag.selected);
    const int rank_col = r2.value_or(fit.col_diag.selected);
    if (rank_row < 1 || rank_row > row_eig.vectors.cols())
        throw std::invalid_argument("fit_local: bad row rank");
    if (rank_col < 1 || rank_col > col_eig.vectors.cols())
        throw std::invalid_argument("fit_local: bad column rank");
    fit.Q3 = row_eig.vectors.leftCols(rank_row);
    fit.Q4 = col_eig.vectors.leftCols(rank_col);

    const Matrix a = b1.transpose() * fit.Q3;
    Eigen::JacobiSVD<Matrix> svd(a);
    fit.a_min_singular = svd.singularValues().size() ? svd.singularValues().minCoeff() : 0.0;
    fit.a_flagged = fit.a_min_singular < 1e-6;
    return fit;
}

LocalFit fit_local(const GroupSeries& group, const Matrix& b1, const Matrix& b2,
                   std::optional<int> r1, std::optional<int> r2, int h0) {
    return fit_local(project(group, b1, b2), b1, r1, r2, h0);
}

}  // namespace mmfm
