#include "mmfm/signals.hpp"

#include <Eigen/SVD>
#include <stdexcept>

namespace mmfm {

LocalSignal recover_local(const std::vector<Matrix>& y1, const Matrix& q3, const Matrix& q4,
                          const Matrix& b1) {
    const Matrix a = b1.transpose() * q3;
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    if (sigma.size() == 0 || sigma.minCoeff() <= 1e-10)
        throw std::runtime_error("local space swallowed by global complement");

    // (A'A)^{-1} A' via the SVD; A has full column rank here.
    const Matrix pinv =
        svd.matrixV() * sigma.cwiseInverse().asDiagonal() * svd.matrixU().transpose();

    LocalSignal out;
    out.Z.resize(y1.size());
    out.Phi.resize(y1.size());
    for (std::size_t t = 0; t < y1.size(); ++t) {
        out.Z[t].noalias() = pinv * y1[t] * q4;
        out.Phi[t].noalias() = q3 * out.Z[t] * q4.transpose();
    }
    return out;
}

GlobalSignal recover_global(const std::vector<Matrix>& x, const std::vector<Matrix>& phi,
                            const Matrix& q1, const Matrix& q2) {
    if (x.size() != phi.size()) throw std::invalid_argument("recover_global: length mismatch");

    GlobalSignal out;
    out.S.resize(x.size());
    out.Psi.resize(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (x[t].rows() != phi[t].rows() || x[t].cols() != phi[t].cols())
            throw std::invalid_argument("recover_global: shape mismatch at t=" + std::to_string(t + 1));
        out.S[t].noalias() = q1.transpose() * (x[t] - phi[t]) * q2;
        out.Psi[t].noalias() = q1 * out.S[t] * q2.transpose();
    }
    return out;
}

std::vector<Matrix> fitted_values(const std::vector<Matrix>& psi, const std::vector<Matrix>& phi) {
    if (psi.size() != phi.size()) throw std::invalid_argument("fitted_values: length mismatch");
    std::vector<Matrix> out(psi.size());
    for (std::size_t t = 0; t < psi.size(); ++t) out[t] = psi[t] + phi[t];
    return out;
}

}  // namespace mmfm
