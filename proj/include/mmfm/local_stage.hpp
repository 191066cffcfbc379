#pragma once

#include <optional>

#include "mmfm/types.hpp"

namespace mmfm {

/// Observations with the estimated global spaces projected out.
/// y1[t] = B1' X_t ((N_m - k1) x p), y2[t] = B2' X_t' ((p - k2) x N_m).
struct ProjectedSeries {
    std::vector<Matrix> y1;
    std::vector<Matrix> y2;
};

ProjectedSeries project(const GroupSeries& group, const Matrix& b1, const Matrix& b2);

/// Lag-autocovariance statistic over the rows of a projected series:
/// sum over lags h = 1..h0 and row pairs (i, j) of Pi Pi', with
/// Pi_ij(h) = 1/(T-h) sum_t y_{t,i.} y_{t+h,j.}' built from rows as columns.
/// Output is cols(Y) x cols(Y), symmetric PSD.
Matrix compute_m(const std::vector<Matrix>& y, int h0);

struct LocalFit {
    Matrix Q3;  // N_m x r1, top eigenvectors of the statistic from y2
    Matrix Q4;  // p x r2, top eigenvectors of the statistic from y1
    RankDiagnostics row_diag;        // N-direction ladder (y2), selects r1
    RankDiagnostics col_diag;        // p-direction ladder (y1), selects r2
    double a_min_singular = 0.0;     // sigma_min(B1' Q3)
    bool a_flagged = false;          // set when sigma_min < 1e-6
};

/// Stage 2 on an already-projected group. Absent ranks come from the ratio
/// estimator on the corresponding ladder.
LocalFit fit_local(const ProjectedSeries& proj, const Matrix& b1,
                   std::optional<int> r1 = std::nullopt, std::optional<int> r2 = std::nullopt,
                   int h0 = 2);

/// Convenience overload that projects first.
LocalFit fit_local(const GroupSeries& group, const Matrix& b1, const Matrix& b2,
                   std::optional<int> r1 = std::nullopt, std::optional<int> r2 = std::nullopt,
                   int h0 = 2);

}  // namespace mmfm
