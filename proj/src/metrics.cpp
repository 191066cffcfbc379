#include "mmfm/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmfm {

namespace {

void require_orthonormal(const Matrix& o, const char* which) {
    Matrix gram = o.transpose() * o;
    gram.diagonal().array() -= 1.0;
    if (gram.cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument(std::string("subspace_distance: ") + which +
                                    " does not have orthonormal columns");
}

// Spectral norm via the Gram matrix; inputs here are small per-time slices.
double spectral_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    const Matrix gram = (a.rows() <= a.cols()) ? Matrix(a * a.transpose()) : Matrix(a.transpose() * a);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

}  // namespace

double subspace_distance(const Matrix& o1, const Matrix& o2) {
    if (o1.rows() != o2.rows()) throw std::invalid_argument("subspace_distance: row mismatch");
    require_orthonormal(o1, "first argument");
    require_orthonormal(o2, "second argument");

    const double q = static_cast<double>(std::max(o1.cols(), o2.cols()));
    double gap;  // 1 - tr(O1 O1' O2 O2') / q
    if (o1.cols() == o2.cols()) {
        // Equal ranks: the projector identity ||P1 - P2||_F^2 = 2q - 2 tr(P1 P2)
        // evaluates the gap without cancellation, so equal spans come out at
        // machine scale instead of sqrt(machine) scale.
        const Matrix diff = o1 * o1.transpose() - o2 * o2.transpose();
        gap = diff.squaredNorm() / (2.0 * q);
    } else {
        gap = 1.0 - (o1.transpose() * o2).squaredNorm() / q;
    }
    return std::sqrt(std::clamp(gap, 0.0, 1.0));
}

double rss_tss(const std::vector<Matrix>& x, const std::vector<Matrix>& x_hat) {
    if (x.size() != x_hat.size()) throw std::invalid_argument("rss_tss: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("rss_tss: need T >= 2");

    Matrix mean = Matrix::Zero(x.front().rows(), x.front().cols());
    for (const Matrix& xt : x) {
        if (xt.rows() != mean.rows() || xt.cols() != mean.cols())
            throw std::invalid_argument("rss_tss: shape mismatch");
        mean += xt;
    }
    mean /= static_cast<double>(x.size());

    double rss = 0.0, tss = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (x_hat[t].rows() != mean.rows() || x_hat[t].cols() != mean.cols())
            throw std::invalid_argument("rss_tss: shape mismatch");
        rss += (x[t] - x_hat[t]).squaredNorm();
        tss += (x[t] - mean).squaredNorm();
    }
    if (tss == 0.0) throw std::runtime_error("degenerate series");
    return 1.0 - rss / tss;
}

Matrix correlation_summary(const GroupedPanel& panel) {
    const int M = panel.group_count();
    const int T = panel.time_len();
    const int p = panel.cols();
    if (T < 3) throw std::invalid_argument("correlation_summary: need T >= 3");

    // Per (group, indicator): T x N_m matrix of centered, unit-norm series.
    // Correlations then reduce to inner products; series with zero variance
    // are dropped from the averages.
    std::vector<std::vector<Matrix>> unit(M);
    std::vector<std::vector<std::vector<bool>>> valid(M);
    for (int m = 0; m < M; ++m) {
        const GroupSeries& g = panel.groups[m];
        const int n = g.rows();
        unit[m].assign(p, Matrix(T, n));
        valid[m].assign(p, std::vector<bool>(n, true));
        for (int j = 0; j < p; ++j) {
            Matrix& series = unit[m][j];
            for (int t = 0; t < T; ++t)
                for (int a = 0; a < n; ++a) series(t, a) = g.obs[t](a, j);
            for (int a = 0; a < n; ++a) {
                series.col(a).array() -= series.col(a).mean();
                const double norm = series.col(a).norm();
                if (norm > 0.0)
                    series.col(a) /= norm;
                else
                    valid[m][j][a] = false;
            }
        }
    }

    Matrix summary = Matrix::Zero(M, M);
    for (int m = 0; m < M; ++m) {
        for (int n = m; n < M; ++n) {
            double total = 0.0;
            long count = 0;
            for (int j = 0; j < p; ++j) {
                const Matrix cross = unit[m][j].transpose() * unit[n][j];
                const int rows_m = static_cast<int>(cross.rows());
                const int rows_n = static_cast<int>(cross.cols());
                for (int a = 0; a < rows_m; ++a) {
                    if (!valid[m][j][a]) continue;
                    const int b_start = (m == n) ? a + 1 : 0;
                    for (int b = b_start; b < rows_n; ++b) {
                        if (!valid[n][j][b]) continue;
                        total += cross(a, b);
                        ++count;
                    }
                }
            }
            const double avg = count > 0 ? total / static_cast<double>(count)
                                         : std::numeric_limits<double>::quiet_NaN();
            summary(m, n) = avg;
            summary(n, m) = avg;
        }
    }
    return summary;
}

ParameterCount parameter_count(int k1, int k2, int r1, int r2, int n_rows, int p_cols) {
    ParameterCount out;
    out.factors = static_cast<long>(k1) * k2 + static_cast<long>(r1) * r2;
    out.loading_params =
        static_cast<long>(n_rows) * (k1 + r1) + static_cast<long>(p_cols) * (k2 + r2);
    out.vectorized_loading_params = static_cast<long>(n_rows) * p_cols * out.factors;
    return out;
}

double signal_distance(const std::vector<Matrix>& estimated, const std::vector<Matrix>& truth) {
    if (estimated.size() != truth.size() || estimated.empty())
        throw std::invalid_argument("signal_distance: length mismatch");
    const double n = static_cast<double>(truth.front().rows());
    const double p = static_cast<double>(truth.front().cols());

    double total = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t)
        total += spectral_norm(estimated[t] - truth[t]);
    return total / (static_cast<double>(truth.size()) * std::sqrt(n) * std::sqrt(p));
}

}  // namespace mmfm
