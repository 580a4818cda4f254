#pragma once

#include "divgov/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace divgov {

/// Eigendecomposition of a small dense symmetric matrix.
/// `values` are ascending; `vectors.col(i)` is the unit eigenvector of values[i].
template <typename MatrixType>
struct EigResult {
    using Scalar = typename MatrixType::Scalar;
    Eigen::Matrix<Scalar, MatrixType::RowsAtCompileTime, 1,
                  Eigen::ColMajor,
                  MatrixType::MaxRowsAtCompileTime, 1> values;
    MatrixType vectors;
    int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for symmetric matrices of order <= 8.
///
/// Rotations sweep the strict upper triangle until the off-diagonal Frobenius
/// mass drops below 1e-14 * ||M||_F. Rejects non-symmetric input (relative
/// asymmetry above 1e-12).
template <typename MatrixType>
EigResult<MatrixType> eig_symmetric(const MatrixType& m) {
    using Scalar = typename MatrixType::Scalar;
    const Eigen::Index n = m.rows();
    if (m.cols() != n) throw std::invalid_argument("eig_symmetric: matrix not square");
    if (n > 8) throw std::invalid_argument("eig_symmetric: order > 8 unsupported");

    const Scalar norm = m.norm();
    const Scalar sym_tol = Scalar(1e-12) * std::max(Scalar(1), norm);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > sym_tol)
                throw std::invalid_argument("eig_symmetric: matrix not symmetric");

    MatrixType a = Scalar(0.5) * (m + m.transpose());
    MatrixType v = MatrixType::Identity(n, n);

    EigResult<MatrixType> out;
    const Scalar off_target = Scalar(1e-14) * std::max(norm, Scalar(1e-300));
    constexpr int kMaxSweeps = 64;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        Scalar off = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        off = std::sqrt(Scalar(2) * off);
        out.sweeps = sweep;
        if (off <= off_target) break;

        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const Scalar apq = a(p, q);
                if (std::abs(apq) <= Scalar(1e-300)) continue;
                const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
                // stable tangent of the rotation angle
                Scalar t = (theta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                           (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
                const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
                const Scalar s = t * c;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const Scalar aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const Scalar api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const Scalar vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    out.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.values[i] = a(i, i);
    out.vectors = v;
    // sort ascending, permuting eigenvector columns along
    for (Eigen::Index i = 0; i < n - 1; ++i) {
        Eigen::Index k = i;
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (out.values[j] < out.values[k]) k = j;
        if (k != i) {
            std::swap(out.values[i], out.values[k]);
            out.vectors.col(i).swap(out.vectors.col(k));
        }
    }
    return out;
}

template <typename MatrixType>
typename MatrixType::Scalar eig_min(const MatrixType& m) {
    return eig_symmetric(m).values[0];
}

template <typename MatrixType>
typename MatrixType::Scalar eig_max(const MatrixType& m) {
    auto r = eig_symmetric(m);
    return r.values[m.rows() - 1];
}

}  // namespace divgov
