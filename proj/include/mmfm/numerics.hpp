#pragma once

#include "mmfm/types.hpp"

namespace mmfm {

/// Symmetric eigendecomposition, values descending, vectors sign-normalized
/// so the largest-magnitude entry of each eigenvector is positive.
struct EigenResult {
    Vector values;
    Matrix vectors;  // columns aligned with values
};

EigenResult sym_eig(const Matrix& a);

/// Thin QR with positive R diagonal. Throws on rank deficiency.
struct QrResult {
    Matrix q;  // n x k, orthonormal columns
    Matrix r;  // k x k, upper triangular, positive diagonal
};

QrResult thin_qr(const Matrix& a);

/// Minimizer of ||A Z - Y||_F. Singular values below 1e-10 * sigma_max are
/// truncated; ill_conditioned flags sigma_min / sigma_max < 1e-8.
struct LsResult {
    Matrix solution;
    bool ill_conditioned = false;
    double condition = 0.0;  // sigma_min / sigma_max of A
};

LsResult ls_solve(const Matrix& a, const Matrix& y);

/// Raw varimax criterion: sum over columns of the variance of squared loadings.
double varimax_criterion(const Matrix& loadings);

/// Orthogonal rotation maximizing the varimax criterion.
struct VarimaxResult {
    Matrix rotated;   // L * rotation
    Matrix rotation;  // k x k orthogonal
    double criterion = 0.0;
    int iterations = 0;
};

VarimaxResult varimax(const Matrix& loadings, int max_iter = 100, double tol = 1e-8);

}  // namespace mmfm
