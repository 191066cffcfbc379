#pragma once

#include "mmfm/types.hpp"

namespace mmfm {

/// Normalized local factors and the local signal part for one group.
struct LocalSignal {
    std::vector<Matrix> Z;    // T of r1 x r2
    std::vector<Matrix> Phi;  // T of N_m x p
};

/// Least-squares recovery of Z_t from the projected series, then
/// Phi_t = Q3 Z_t Q4'. Throws when B1'Q3 is rank deficient.
LocalSignal recover_local(const std::vector<Matrix>& y1, const Matrix& q3, const Matrix& q4,
                          const Matrix& b1);

/// Normalized global factors and the global signal part for one group.
struct GlobalSignal {
    std::vector<Matrix> S;    // T of k1 x k2
    std::vector<Matrix> Psi;  // T of N_m x p
};

/// S_t = Q1'(X_t - Phi_t) Q2 and Psi_t = Q1 S_t Q2'.
GlobalSignal recover_global(const std::vector<Matrix>& x, const std::vector<Matrix>& phi,
                            const Matrix& q1, const Matrix& q2);

/// X_hat_t = Psi_t + Phi_t.
std::vector<Matrix> fitted_values(const std::vector<Matrix>& psi, const std::vector<Matrix>& phi);

}  // namespace mmfm
