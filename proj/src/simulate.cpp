#include "mmfm/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "mmfm/numerics.hpp"
#include "mmfm/rng.hpp"

namespace mmfm {

namespace {

Matrix uniform_loading(Rng& rng, int rows, int cols, double bound) {
    Matrix out(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) out(i, j) = rng.uniform(-bound, bound);
    return out;
}

// Entrywise independent AR(1) paths with N(0,1) innovations, started from the
// stationary distribution and burned in.
std::vector<Matrix> ar1_paths(Rng& rng, const Matrix& coeffs, int t_len, int burn_in) {
    const Eigen::Index r = coeffs.rows(), c = coeffs.cols();
    Matrix state(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) {
            const double phi = coeffs(i, j);
            state(i, j) = rng.gaussian() / std::sqrt(1.0 - phi * phi);
        }
    auto step = [&]() {
        for (Eigen::Index j = 0; j < c; ++j)
            for (Eigen::Index i = 0; i < r; ++i)
                state(i, j) = coeffs(i, j) * state(i, j) + rng.gaussian();
    };
    for (int t = 0; t < burn_in; ++t) step();

    std::vector<Matrix> path(t_len);
    for (int t = 0; t < t_len; ++t) {
        step();
        path[t] = state;
    }
    return path;
}

// Symmetric square root of the equicorrelation matrix (unit diagonal, rho off).
Matrix equicorrelation_sqrt(int dim, double rho) {
    Matrix sigma = Matrix::Constant(dim, dim, rho);
    sigma.diagonal().setOnes();
    EigenResult eig = sym_eig(sigma);
    const double lead = eig.values(0);
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        if (eig.values(i) < -1e-12 * std::max(lead, 1.0))
            throw std::runtime_error("noise covariance not PSD");
    Vector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
    return eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
}

void check_config(const SimConfig& cfg) {
    if (cfg.groups < 1 || cfg.rows < 1 || cfg.cols < 1 || cfg.time_len < 1)
        throw std::invalid_argument("simulate: dimensions must be positive");
    if (static_cast<int>(cfg.dims.local.size()) != cfg.groups)
        throw std::invalid_argument("simulate: need one local rank pair per group");
    if (cfg.global_ar.rows() != cfg.dims.k1 || cfg.global_ar.cols() != cfg.dims.k2)
        throw std::invalid_argument("simulate: global_ar must be k1 x k2");
    if (static_cast<int>(cfg.local_ar.size()) != cfg.groups)
        throw std::invalid_argument("simulate: need one local_ar matrix per group");
    auto check_ar = [](const Matrix& a) {
        if ((a.array().abs() >= 1.0).any())
            throw std::invalid_argument("simulate: AR coefficients must lie inside (-1, 1)");
    };
    check_ar(cfg.global_ar);
    for (int m = 0; m < cfg.groups; ++m) {
        auto [r1, r2] = cfg.dims.local[m];
        if (cfg.local_ar[m].rows() != r1 || cfg.local_ar[m].cols() != r2)
            throw std::invalid_argument("simulate: local_ar must be r1 x r2");
        check_ar(cfg.local_ar[m]);
    }
    for (double d : cfg.deltas)
        if (d < 0.0 || d > 1.0) throw std::invalid_argument("simulate: deltas must lie in [0, 1]");
    if (std::abs(cfg.noise_offdiag) >= 1.0)
        throw std::invalid_argument("simulate: noise_offdiag must lie inside (-1, 1)");
}

}  // namespace

SimConfig SimConfig::defaults(int n, int p, int t) {
    SimConfig cfg;
    cfg.groups = 3;
    cfg.rows = n;
    cfg.cols = p;
    cfg.time_len = t;
    cfg.dims.k1 = 3;
    cfg.dims.k2 = 2;
    cfg.dims.local.assign(3, {2, 2});
    cfg.global_ar.resize(3, 2);
    cfg.global_ar << -0.5, 0.6, 0.8, -0.4, 0.7, 0.3;
    Matrix local(2, 2);
    local << -0.5, 0.6, 0.8, -0.4;
    cfg.local_ar.assign(3, local);
    return cfg;
}

std::pair<GroupedPanel, SimTruth> simulate(const SimConfig& cfg) {
    check_config(cfg);

    const int M = cfg.groups, n = cfg.rows, p = cfg.cols, T = cfg.time_len;
    const double row_bound_g = std::pow(n, -cfg.deltas[0] / 2.0);
    const double col_bound_g = std::pow(p, -cfg.deltas[1] / 2.0);
    const double row_bound_l = std::pow(n, -cfg.deltas[2] / 2.0);
    const double col_bound_l = std::pow(p, -cfg.deltas[3] / 2.0);

    const Matrix noise_left = equicorrelation_sqrt(n, cfg.noise_offdiag);
    const Matrix noise_right = equicorrelation_sqrt(p, cfg.noise_offdiag);

    SimTruth truth;
    truth.R.resize(M);
    truth.C.resize(M);
    truth.Gamma.resize(M);
    truth.Lambda.resize(M);
    truth.Q1.resize(M);
    truth.Q2.resize(M);
    truth.Q3.resize(M);
    truth.Q4.resize(M);
    truth.F.resize(M);
    truth.Psi.resize(M);
    truth.Phi.resize(M);

    // Separate streams per ingredient keep draws independent of loop order.
    Rng loading_rng(derive_seed(cfg.seed, {0}));
    for (int m = 0; m < M; ++m) {
        auto [r1, r2] = cfg.dims.local[m];
        truth.R[m] = uniform_loading(loading_rng, n, cfg.dims.k1, row_bound_g);
        truth.C[m] = uniform_loading(loading_rng, p, cfg.dims.k2, col_bound_g);
        truth.Gamma[m] = uniform_loading(loading_rng, n, r1, row_bound_l);
        truth.Lambda[m] = uniform_loading(loading_rng, p, r2, col_bound_l);
        truth.Q1[m] = thin_qr(truth.R[m]).q;
        truth.Q2[m] = thin_qr(truth.C[m]).q;
        truth.Q3[m] = thin_qr(truth.Gamma[m]).q;
        truth.Q4[m] = thin_qr(truth.Lambda[m]).q;
    }

    Rng global_rng(derive_seed(cfg.seed, {1}));
    truth.G = ar1_paths(global_rng, cfg.global_ar, T, cfg.burn_in);
    for (int m = 0; m < M; ++m) {
        Rng local_rng(derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(m)}));
        truth.F[m] = ar1_paths(local_rng, cfg.local_ar[m], T, cfg.burn_in);
    }

    GroupedPanel panel;
    panel.groups.resize(M);
    for (int m = 0; m < M; ++m) {
        GroupSeries& series = panel.groups[m];
        series.name = "g" + std::to_string(m + 1);
        series.obs.resize(T);
        truth.Psi[m].resize(T);
        truth.Phi[m].resize(T);

        Rng noise_rng(derive_seed(cfg.seed, {3, static_cast<std::uint64_t>(m)}));
        Matrix z(n, p);
        for (int t = 0; t < T; ++t) {
            truth.Psi[m][t] = truth.R[m] * truth.G[t] * truth.C[m].transpose();
            truth.Phi[m][t] = truth.Gamma[m] * truth.F[m][t] * truth.Lambda[m].transpose();
            for (int j = 0; j < p; ++j)
                for (int i = 0; i < n; ++i) z(i, j) = noise_rng.gaussian();
            series.obs[t] = truth.Psi[m][t] + truth.Phi[m][t] +
                            cfg.noise_scale * (noise_left * z * noise_right);
        }
    }
    return {std::move(panel), std::move(truth)};
}

StationaryCheck stationary_check(const std::vector<double>& path, double phi) {
    if (path.size() < 200) throw std::invalid_argument("stationary_check: need T >= 200");
    if (std::abs(phi) >= 1.0)
        throw std::invalid_argument("stationary_check: phi must lie inside (-1, 1)");

    const double n = static_cast<double>(path.size());
    double mean = 0.0;
    for (double v : path) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : path) var += (v - mean) * (v - mean);
    var /= n;

    StationaryCheck check;
    check.sample_var = var;
    check.theoretical_var = 1.0 / (1.0 - phi * phi);
    check.degenerate = var == 0.0;
    check.rel_deviation = std::abs(var - check.theoretical_var) / check.theoretical_var;
    return check;
}

}  // namespace mmfm
