#include "pinn/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "pinn/errors.hpp"

namespace pinn::linalg {

namespace {

// One Jacobi rotation zeroing a(p,q); updates the full matrix symmetrically.
inline void rotate(Mat& a, Eigen::Index p, Eigen::Index q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double app = a(p, p);
    const double aqq = a(q, q);
    const double theta = 0.5 * (aqq - app) / apq;
    // Smaller-magnitude root for numerical stability.
    const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                     (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const double tau = s / (1.0 + c);

    const Eigen::Index n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i == p || i == q) continue;
        const double aip = a(i, p);
        const double aiq = a(i, q);
        a(i, p) = aip - s * (aiq + tau * aip);
        a(p, i) = a(i, p);
        a(i, q) = aiq + s * (aip - tau * aiq);
        a(q, i) = a(i, q);
    }
    a(p, p) = app - t * apq;
    a(q, q) = aqq + t * apq;
    a(p, q) = 0.0;
    a(q, p) = 0.0;
}

inline double offdiag_norm(const Mat& a) {
    double sum = 0.0;
    const Eigen::Index n = a.rows();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) sum += a(i, j) * a(i, j);
    return std::sqrt(2.0 * sum);
}

}  // namespace

Vec symmetric_eigenvalues(Mat a) {
    if (a.rows() != a.cols()) throw InvalidInput("symmetric_eigenvalues: square matrix required");
    const Eigen::Index n = a.rows();
    if (n == 0) return Vec();
    if (n == 1) return Vec::Constant(1, a(0, 0));

    // Mirror the lower triangle so both halves agree exactly.
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) a(j, i) = a(i, j);

    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    const double tol = 1e-15 * scale * static_cast<double>(n);
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (offdiag_norm(a) <= tol) break;
        for (Eigen::Index p = 0; p < n - 1; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                if (std::abs(a(p, q)) > 1e-300) rotate(a, p, q);
    }

    Vec eig = a.diagonal();
    std::sort(eig.data(), eig.data() + n);
    return eig;
}

double spectral_norm_sym(const Mat& a) {
    const Vec eig = symmetric_eigenvalues(a);
    if (eig.size() == 0) return 0.0;
    return std::max(std::abs(eig(0)), std::abs(eig(eig.size() - 1)));
}

Vec cholesky_solve(Mat a, Vec b) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || b.size() != n) throw InvalidInput("cholesky_solve: shape mismatch");
    // Factor in place: lower triangle becomes L.
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0)) throw NumericalFailure("cholesky_solve: matrix not positive definite");
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / ljj;
        }
    }
    // L y = b
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = b(i);
        for (Eigen::Index k = 0; k < i; ++k) s -= a(i, k) * b(k);
        b(i) = s / a(i, i);
    }
    // L^T x = y
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double s = b(i);
        for (Eigen::Index k = i + 1; k < n; ++k) s -= a(k, i) * b(k);
        b(i) = s / a(i, i);
    }
    return b;
}

}  // namespace pinn::linalg
