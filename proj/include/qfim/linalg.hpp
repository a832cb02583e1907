#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qfim {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

constexpr cplx kI{0.0, 1.0};

// Column-stacking vectorization: vec(X) stacks the columns of X.  With this
// convention A*X maps to (1 (x) A) vec(X) and X*B maps to (B^T (x) 1) vec(X).
inline Vec vectorize(const Mat& X) {
    return Eigen::Map<const Vec>(X.data(), X.size());
}

inline Mat unvectorize(const Vec& v, Eigen::Index d) {
    return Eigen::Map<const Mat>(v.data(), d, d);
}

inline Mat kron(const Mat& A, const Mat& B) {
    Mat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

// Superoperator matrix of X -> A*X.
inline Mat left_mult(const Mat& A) {
    Mat id = Mat::Identity(A.rows(), A.rows());
    return kron(id, A);
}

// Superoperator matrix of X -> X*B.
inline Mat right_mult(const Mat& B) {
    Mat id = Mat::Identity(B.rows(), B.rows());
    return kron(B.transpose(), id);
}

// Hermitian and anti-Hermitian parts, M = Re(M) + i Im(M) with both parts Hermitian.
inline Mat herm_re(const Mat& M) { return 0.5 * (M + M.adjoint()); }
inline Mat herm_im(const Mat& M) { return (M - M.adjoint()) / (2.0 * kI); }

inline Mat symmetrize(const Mat& M) { return herm_re(M); }

inline double hermiticity_defect(const Mat& M) {
    double scale = std::max(1.0, M.norm());
    return (M - M.adjoint()).norm() / scale;
}

inline cplx trace_against(const Mat& rho, const Mat& X) {
    return (rho * X).trace();
}

}  // namespace qfim
