#pragma once

// Sample moments of an n x p observation batch and the maximum-magnitude
// off-diagonal sample correlation V derived from them.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "maxcorr/errors.hpp"

namespace maxcorr {

/// n x p block of observations; row i is one observation vector, column j one coordinate.
template <typename Scalar>
using BatchT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Batch = BatchT<double>;

template <typename Scalar>
using SquareT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Correlations whose magnitude exceeds 1 by at most this much are rounding noise.
inline constexpr double kCorrelationClampSlack = 1e-12;

/// Unbiased (divisor n-1) sample covariance of the rows of `batch`.
///
/// Columns whose entries are all identical are centered to exact zeros, so a
/// constant column yields S_jj == 0 rather than a rounding residue.
template <typename Derived>
SquareT<typename Derived::Scalar> sample_covariance(const Eigen::MatrixBase<Derived>& batch) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = batch.rows();
    const Eigen::Index p = batch.cols();
    if (n < 2) throw InvalidArgument("sample_covariance: need at least 2 rows");
    if (p < 1) throw InvalidArgument("sample_covariance: need at least 1 column");
    if (!batch.allFinite()) throw InvalidArgument("sample_covariance: non-finite entry");

    BatchT<Scalar> centered = batch.rowwise() - batch.colwise().mean();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (batch.col(j).maxCoeff() == batch.col(j).minCoeff()) centered.col(j).setZero();
    }

    SquareT<Scalar> S = SquareT<Scalar>::Zero(p, p);
    S.template selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(),
                                                          Scalar(1) / Scalar(n - 1));
    S.template triangularView<Eigen::StrictlyUpper>() = S.transpose();
    return S;
}

/// R = D^{-1/2} S D^{-1/2}, unit diagonal, off-diagonals clamped into [-1, 1].
template <typename Derived>
SquareT<typename Derived::Scalar> correlation_matrix(const Eigen::MatrixBase<Derived>& S) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index p = S.rows();
    if (S.cols() != p) throw InvalidArgument("correlation_matrix: covariance must be square");

    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> variance = S.diagonal();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(variance(j) > Scalar(0))) throw ZeroVarianceColumn(j);
    }

    // S_ij / sqrt(S_ii S_jj) is symmetric in (i, j) bit for bit.
    SquareT<Scalar> R(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        R(j, j) = Scalar(1);
        for (Eigen::Index i = 0; i < j; ++i) {
            Scalar r = S(i, j) / std::sqrt(variance(i) * variance(j));
            if (std::abs(r) > Scalar(1)) {
                if (std::abs(r) > Scalar(1) + Scalar(kCorrelationClampSlack))
                    throw InternalError("correlation_matrix: |R_ij| exceeds 1 beyond rounding slack");
                r = std::copysign(Scalar(1), r);
            }
            R(i, j) = r;
            R(j, i) = r;
        }
    }
    return R;
}

/// Largest |R_ij| over the strict upper triangle of a correlation matrix.
template <typename Derived>
typename Derived::Scalar max_off_diagonal_magnitude(const Eigen::MatrixBase<Derived>& R) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index p = R.rows();
    if (p < 2 || R.cols() != p) throw InvalidArgument("max_off_diagonal_magnitude: need square p >= 2");
    Scalar v(0);
    for (Eigen::Index j = 1; j < p; ++j) {
        v = std::max(v, R.col(j).head(j).cwiseAbs().maxCoeff());
    }
    return std::min(v, Scalar(1));
}

/// Summary statistic V: maximum magnitude sample correlation between distinct columns.
template <typename Derived>
typename Derived::Scalar max_magnitude_correlation(const Eigen::MatrixBase<Derived>& batch) {
    if (batch.cols() < 2) throw InvalidArgument("max_magnitude_correlation: need p >= 2");
    return max_off_diagonal_magnitude(correlation_matrix(sample_covariance(batch)));
}

}  // namespace maxcorr
