#pragma once

#include <optional>

#include "mmfm/numerics.hpp"
#include "mmfm/types.hpp"

namespace mmfm {

/// Cross-group covariance statistic for the row direction of one group:
/// the sum over other groups and column pairs of Omega Omega', where Omega
/// is the T-averaged cross-moment between single columns. Symmetric PSD.
Matrix compute_w1(const GroupedPanel& panel, int group);

/// Column-direction analogue, built from transposed observations.
Matrix compute_w2(const GroupedPanel& panel, int group);

/// Ratio-based rank estimate: argmin of lambda_{i+1}/lambda_i over
/// i = 1..max(1, floor(dim_cap/3)), ties to the smallest i. Eigenvalues below
/// 1e-12 * lambda_1 are floored before forming ratios.
int estimate_rank(const Vector& ladder, int dim_cap);

/// Ladder, full ratio curve, and the selected rank in one bundle.
RankDiagnostics make_rank_diagnostics(const Vector& ladder, int dim_cap);

struct GlobalFit {
    int k1 = 0, k2 = 0;            // ranks used for the Q/B split
    int k1_auto = 0, k2_auto = 0;  // majority vote over per-group estimates
    std::vector<Matrix> Q1, B1;    // per group: top-k1 / remaining eigenvectors of W1
    std::vector<Matrix> Q2, B2;    // per group: same for W2
    std::vector<EigenResult> row_eig, col_eig;  // full decompositions, for re-splitting
    std::vector<RankDiagnostics> row_diag, col_diag;
};

/// Stage 1: W statistics, eigendecompositions, rank selection (per group plus
/// majority vote), and the loading/complement split. Ranks given explicitly
/// override the vote; per-group estimates stay in the diagnostics either way.
GlobalFit fit_global(const GroupedPanel& panel, std::optional<int> k1 = std::nullopt,
                     std::optional<int> k2 = std::nullopt);

/// Splits a full eigenvector matrix into the leading k columns and the rest.
std::pair<Matrix, Matrix> split_loading(const Matrix& vectors, int k);

}  // namespace mmfm
