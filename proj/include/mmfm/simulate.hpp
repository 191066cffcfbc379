#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "mmfm/types.hpp"

namespace mmfm {

/// Data-generating parameters for the grouped matrix-variate design:
/// uniform loadings with strength exponents, AR(1) factor entries, and
/// Kronecker-structured white noise.
struct SimConfig {
    int groups = 3;                            // M
    int rows = 20;                             // n, shared across groups
    int cols = 20;                             // p
    int time_len = 400;                        // T
    FactorDims dims;                           // k1, k2 and per-group (r1, r2)
    std::array<double, 4> deltas{0, 0, 0, 0};  // strengths: global row/col, local row/col
    Matrix global_ar;                          // k1 x k2 AR(1) coefficients
    std::vector<Matrix> local_ar;              // per group, r1 x r2 AR(1) coefficients
    double noise_offdiag = 0.2;                // rho for Sigma_m1 and Sigma_2
    double noise_scale = 1.0;                  // test hook; the design fixes 1
    std::uint64_t seed = 0;
    int burn_in = 200;

    /// Three-group design with k1=3, k2=2, (r1, r2)=(2, 2) per group and the
    /// standard AR coefficient matrices.
    static SimConfig defaults(int n, int p, int t);
};

/// Ground truth emitted alongside a simulated panel.
struct SimTruth {
    std::vector<Matrix> R, C, Gamma, Lambda;  // raw loadings per group
    std::vector<Matrix> Q1, Q2, Q3, Q4;       // QR-normalized loadings per group
    std::vector<Matrix> G;                    // T global factor matrices
    std::vector<std::vector<Matrix>> F;       // per group, T local factor matrices
    std::vector<std::vector<Matrix>> Psi;     // true global signal R G C'
    std::vector<std::vector<Matrix>> Phi;     // true local signal Gamma F Lambda'
};

std::pair<GroupedPanel, SimTruth> simulate(const SimConfig& cfg);

/// Compares the sample variance of an AR(1) path against 1 / (1 - phi^2).
struct StationaryCheck {
    double sample_var = 0.0;
    double theoretical_var = 0.0;
    double rel_deviation = 0.0;
    bool degenerate = false;
};

StationaryCheck stationary_check(const std::vector<double>& path, double phi);

}  // namespace mmfm
