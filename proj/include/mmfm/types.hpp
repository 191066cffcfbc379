#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mmfm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One group of the panel: T observations of a fixed rows() x cols() matrix.
struct GroupSeries {
    std::string name;
    std::vector<Matrix> obs;

    int time_len() const { return static_cast<int>(obs.size()); }
    int rows() const { return obs.empty() ? 0 : static_cast<int>(obs.front().rows()); }
    int cols() const { return obs.empty() ? 0 : static_cast<int>(obs.front().cols()); }
};

/// Grouped matrix-variate panel: M groups observed over a shared time axis.
/// Row counts may differ across groups; the column count may not.
struct GroupedPanel {
    std::vector<GroupSeries> groups;

    int group_count() const { return static_cast<int>(groups.size()); }
    int time_len() const { return groups.empty() ? 0 : groups.front().time_len(); }
    int cols() const { return groups.empty() ? 0 : groups.front().cols(); }
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    bool ok() const { return violations.empty(); }
};

/// Structural checks on a panel. Report-valued: never throws.
ValidationReport validate_panel(const GroupedPanel& panel);

/// Factor counts: shared global pair (k1, k2) and per-group local pairs.
struct FactorDims {
    int k1 = 1;
    int k2 = 1;
    std::vector<std::pair<int, int>> local;  // (r_m1, r_m2) per group

    std::pair<int, int> local_ranks(int group) const { return local.at(group); }
};

/// Checks 1 <= k1 <= min_m N_m, 1 <= k2 <= p, 1 <= r_m1 <= N_m - k1,
/// 1 <= r_m2 <= p - k2. Returns the first violation, or nullopt.
std::optional<std::string> check_dims(const FactorDims& dims, const GroupedPanel& panel);

/// Estimated semi-orthogonal loadings for one group plus the complements
/// of the global pair.
struct GroupLoadings {
    Matrix Q1;  // N_m x k1
    Matrix Q2;  // p x k2
    Matrix Q3;  // N_m x r_m1
    Matrix Q4;  // p x r_m2
    Matrix B1;  // N_m x (N_m - k1), B1'Q1 = 0
    Matrix B2;  // p x (p - k2),     B2'Q2 = 0
};

struct LoadingSet {
    std::vector<GroupLoadings> groups;

    /// Largest deviation from Q'Q = I / B'B = I / B'Q = 0 over all stored blocks.
    double max_orthogonality_error() const;
};

/// Eigenvalue ladder for one group and direction, with the ratio curve
/// lambda_{i+1}/lambda_i and the rank the ratio estimator picked.
struct RankDiagnostics {
    Vector eigenvalues;  // descending, nonnegative
    Vector ratios;       // length len-1, floored spectrum
    int selected = 0;
};

struct EigenDiagnostics {
    std::vector<RankDiagnostics> global_row;  // per group, from W1
    std::vector<RankDiagnostics> global_col;  // per group, from W2
    std::vector<RankDiagnostics> local_row;   // per group, from M on Y2
    std::vector<RankDiagnostics> local_col;   // per group, from M on Y1
};

/// Full three-stage fit: loadings, normalized factors, signal parts, residuals.
struct FitResult {
    LoadingSet loadings;
    FactorDims dims;
    std::vector<std::vector<Matrix>> S;         // per group, T of k1 x k2
    std::vector<std::vector<Matrix>> Z;         // per group, T of r_m1 x r_m2
    std::vector<std::vector<Matrix>> Psi;       // global signal, N_m x p
    std::vector<std::vector<Matrix>> Phi;       // local signal, N_m x p
    std::vector<std::vector<Matrix>> residual;  // X - Psi - Phi
    EigenDiagnostics diagnostics;
};

}  // namespace mmfm
