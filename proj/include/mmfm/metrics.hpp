#pragma once

#include "mmfm/types.hpp"

namespace mmfm {

/// Span distance in [0, 1] between two orthonormal-column matrices:
/// sqrt(1 - tr(O1 O1' O2 O2') / max(q1, q2)). Zero iff equal spans, one iff
/// orthogonal spans; invariant to rotations within each span.
double subspace_distance(const Matrix& o1, const Matrix& o2);

/// Fit proportion 1 - sum_t ||X_t - Xhat_t||_F^2 / sum_t ||X_t - Xbar||_F^2.
double rss_tss(const std::vector<Matrix>& x, const std::vector<Matrix>& x_hat);

/// M x M average pairwise Pearson correlations: diagonal entries average over
/// same-indicator stock pairs within a group, off-diagonal over cross-group
/// pairs. Correlation per (indicator, pair), then an unweighted mean.
Matrix correlation_summary(const GroupedPanel& panel);

/// Factor and loading-parameter counts for one group.
struct ParameterCount {
    long factors = 0;                    // k1*k2 + r1*r2
    long loading_params = 0;             // N(k1 + r1) + p(k2 + r2)
    long vectorized_loading_params = 0;  // N*p*(k1*k2 + r1*r2)
};

ParameterCount parameter_count(int k1, int k2, int r1, int r2, int n_rows, int p_cols);

/// Per-time signal accuracy: N^{-1/2} p^{-1/2} * mean over t of the spectral
/// norm of the difference.
double signal_distance(const std::vector<Matrix>& estimated, const std::vector<Matrix>& truth);

}  // namespace mmfm
