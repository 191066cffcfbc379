#include "mmfm/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace mmfm {

namespace {

// Flip each column so its largest-magnitude entry is positive; ties broken
// by the lowest index.
void normalize_signs(Matrix& vectors) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double mag = std::abs(vectors(i, j));
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        if (vectors(pivot, j) < 0.0) vectors.col(j) = -vectors.col(j);
    }
}

}  // namespace

EigenResult sym_eig(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("sym_eig: matrix must be square");
    if (!a.allFinite()) throw std::invalid_argument("non-finite matrix");

    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("sym_eig: eigendecomposition failed");

    // Eigen returns ascending order.
    const Eigen::Index n = a.rows();
    EigenResult result;
    result.values = solver.eigenvalues().reverse();
    result.vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) result.vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
    normalize_signs(result.vectors);
    return result;
}

QrResult thin_qr(const Matrix& a) {
    const Eigen::Index n = a.rows(), k = a.cols();
    if (n < k) throw std::invalid_argument("thin_qr: need rows >= cols");
    if (!a.allFinite()) throw std::invalid_argument("non-finite matrix");

    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(n, k);
    Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

    const double scale = a.norm();
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::abs(r(i, i)) <= 1e-12 * scale) throw std::runtime_error("rank deficient loading");
        if (r(i, i) < 0.0) {
            r.row(i) = -r.row(i);
            q.col(i) = -q.col(i);
        }
    }
    return {std::move(q), std::move(r)};
}

LsResult ls_solve(const Matrix& a, const Matrix& y) {
    if (a.rows() < a.cols()) throw std::invalid_argument("ls_solve: need rows >= cols");
    if (a.rows() != y.rows()) throw std::invalid_argument("ls_solve: row mismatch");

    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    const double smax = sigma.size() ? sigma(0) : 0.0;

    LsResult result;
    result.condition = (smax > 0.0) ? sigma(sigma.size() - 1) / smax : 0.0;
    result.ill_conditioned = result.condition < 1e-8;

    Vector inv = Vector::Zero(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > 1e-10 * smax && sigma(i) > 0.0) inv(i) = 1.0 / sigma(i);
    result.solution = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * y);
    return result;
}

double varimax_criterion(const Matrix& loadings) {
    const double n = static_cast<double>(loadings.rows());
    double total = 0.0;
    for (Eigen::Index j = 0; j < loadings.cols(); ++j) {
        const auto sq = loadings.col(j).array().square();
        const double m2 = sq.sum() / n;
        const double m4 = sq.square().sum() / n;
        total += m4 - m2 * m2;
    }
    return total;
}

VarimaxResult varimax(const Matrix& loadings, int max_iter, double tol) {
    const Eigen::Index k = loadings.cols();
    if (k < 1) throw std::invalid_argument("varimax: need at least one column");

    VarimaxResult result;
    result.rotation = Matrix::Identity(k, k);
    result.rotated = loadings;
    result.criterion = varimax_criterion(loadings);
    if (k == 1) return result;  // criterion invariant under the only rotation, I

    for (int iter = 0; iter < max_iter; ++iter) {
        const Matrix lam = loadings * result.rotation;
        // Gradient of the criterion, rotated back to the loading frame.
        const Matrix cubed = lam.array().cube().matrix();
        const Vector colmean = lam.array().square().colwise().mean().matrix().transpose();
        const Matrix grad = loadings.transpose() * (cubed - lam * colmean.asDiagonal());

        Eigen::JacobiSVD<Matrix> svd(grad, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Matrix candidate = svd.matrixU() * svd.matrixV().transpose();
        const double value = varimax_criterion(loadings * candidate);
        if (value < result.criterion) break;  // numerical stall; keep the best iterate
        const double gain = value - result.criterion;
        result.rotation = candidate;
        result.criterion = value;
        result.iterations = iter + 1;
        if (gain < tol) break;
    }
    result.rotated = loadings * result.rotation;
    return result;
}

}  // namespace mmfm
