#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "qfim/errors.hpp"
#include "qfim/linalg.hpp"
#include "qfim/superop.hpp"

namespace qfim {

// Applies the restricted inverse L~ of the Heisenberg generator on the
// subspace B1 = {X : Tr(rho_ss X) = 0}.  For a given Y it solves the bordered
// system
//   [ L0      vec(1) ] [ x      ]   [ vec(Q(Y)) ]
//   [ vec(1)^H   0   ] [ lambda ] = [ 0         ],
// which is nonsingular exactly when the zero eigenvalue of L0 is simple; the
// multiplier lambda vanishes because Q(Y) is orthogonal to the left null
// vector rho_ss.  The trace border fixes the kernel component as Tr(x) = 0,
// so the result is recentered to Tr(rho_ss x) = 0 afterwards.
//
// The bordered matrix is the adjoint of the one stationary_state factorizes
// to find rho_ss, so that factorization is shared instead of repeated — the
// LU is the dominant cost for large Hilbert-space dimensions.
class RestrictedInverseSolver {
  public:
    // Shares an existing factorization of the *Schrodinger* bordered matrix;
    // all solves go through its adjoint.
    RestrictedInverseSolver(std::shared_ptr<const Eigen::PartialPivLU<Mat>> schrodinger_lu,
                            const Mat& rho_ss)
        : dim_(static_cast<int>(rho_ss.rows())), rho_ss_(rho_ss),
          lu_(std::move(schrodinger_lu)), via_adjoint_(true) {}

    RestrictedInverseSolver(const Mat& heisenberg_matrix, const Mat& rho_ss)
        : dim_(static_cast<int>(rho_ss.rows())), rho_ss_(rho_ss), via_adjoint_(false) {
        const Eigen::Index n = heisenberg_matrix.rows();
        const Vec id_vec = vectorize(Mat::Identity(dim_, dim_));
        Mat bordered = Mat::Zero(n + 1, n + 1);
        bordered.topLeftCorner(n, n) = heisenberg_matrix;
        bordered.topRightCorner(n, 1) = id_vec;
        bordered.bottomLeftCorner(1, n) = id_vec.adjoint();
        auto lu = std::make_shared<Eigen::PartialPivLU<Mat>>(bordered);

        const auto& u = lu->matrixLU();
        double min_piv = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i <= n; ++i) min_piv = std::min(min_piv, std::abs(u(i, i)));
        const double scale = heisenberg_matrix.cwiseAbs().maxCoeff();
        if (min_piv <= 1e-12 * std::max(1.0, scale))
            throw SingularOnComplement("restricted inverse: bordered system is rank deficient");
        lu_ = std::move(lu);
    }

    Mat apply(const Mat& Y) const {
        const Eigen::Index n = static_cast<Eigen::Index>(dim_) * dim_;
        const Mat Qy = Y - trace_against(rho_ss_, Y) * Mat::Identity(dim_, dim_);
        Vec rhs = Vec::Zero(n + 1);
        rhs.head(n) = vectorize(Qy);
        Vec sol = via_adjoint_ ? Vec(lu_->adjoint().solve(rhs)) : Vec(lu_->solve(rhs));
        Mat x = unvectorize(sol.head(n), dim_);
        return x - trace_against(rho_ss_, x) * Mat::Identity(dim_, dim_);
    }

    // Full d^2 x d^2 matrix of L~, built by solving against every basis
    // column at once.
    Mat matrix() const {
        const Eigen::Index n = static_cast<Eigen::Index>(dim_) * dim_;
        const Vec id_vec = vectorize(Mat::Identity(dim_, dim_));
        const Vec rho_vec = vectorize(rho_ss_);
        Mat rhs = Mat::Zero(n + 1, n);
        rhs.topRows(n) = Mat::Identity(n, n) - id_vec * rho_vec.adjoint();
        Mat sol = via_adjoint_ ? Mat(lu_->adjoint().solve(rhs)) : Mat(lu_->solve(rhs));
        Mat top = sol.topRows(n);
        return top - id_vec * (rho_vec.adjoint() * top);
    }

    const Mat& rho_ss() const { return rho_ss_; }

  private:
    int dim_;
    Mat rho_ss_;
    std::shared_ptr<const Eigen::PartialPivLU<Mat>> lu_;
    bool via_adjoint_;
};

struct StationaryOptions {
    // Minimum eigenvalue of rho_ss before the state counts as rank deficient.
    // Truncated infinite-dimensional models have tails that underflow this
    // check even though the true state is faithful; pass a negative value to
    // disable it there.
    double rank_tol = 1e-10;
    double gap_tol = 1e-10;
    // Full Liouvillian eigendecompositions and dense P/Q/L~ matrices are only
    // built up to this Hilbert-space dimension; above it the analysis keeps
    // factorized solvers and reports the gap as unavailable.
    int dense_dim_limit = 16;
    bool force_spectrum = false;
};

struct StationaryAnalysis {
    int dim = 0;
    Mat rho_ss;
    double gap = std::numeric_limits<double>::quiet_NaN();
    double min_eig = 0.0;
    std::vector<cplx> liouvillian_spectrum;  // empty when the eigensolve was skipped

    std::optional<SuperOp> P;       // X -> Tr(rho_ss X) 1
    std::optional<SuperOp> Q;       // complement projection
    std::optional<SuperOp> Ltilde;  // restricted inverse as an explicit matrix
    std::shared_ptr<const RestrictedInverseSolver> ltilde_solver;

    bool has_gap() const { return std::isfinite(gap); }

    Mat project(const Mat& X) const {
        return trace_against(rho_ss, X) * Mat::Identity(dim, dim);
    }
    Mat complement(const Mat& X) const { return X - project(X); }
    Mat ltilde_apply(const Mat& Y) const { return ltilde_solver->apply(Y); }

    // Stationary expectation <X>_ss = Tr(rho_ss X).
    cplx expect(const Mat& X) const { return trace_against(rho_ss, X); }
};

// |Tr(rho_ss op)|; assertion hook for the centering condition on the
// first-order generator coefficients.
inline double check_centering(const Mat& op, const Mat& rho_ss) {
    return std::abs(trace_against(rho_ss, op));
}

inline SuperOp restricted_inverse(const SuperOp& heisenberg, const Mat& rho_ss) {
    RestrictedInverseSolver solver(heisenberg.matrix, rho_ss);
    return SuperOp{heisenberg.dim, Picture::heisenberg, solver.matrix()};
}

// Extracts the stationary state from the Schrodinger-picture generator,
// certifies irreducibility, and builds the projection pair and restricted
// inverse.  The Heisenberg generator is the Hilbert-Schmidt adjoint of the
// Schrodinger matrix.
inline StationaryAnalysis stationary_state(const SuperOp& gen,
                                           const StationaryOptions& opts = {}) {
    if (gen.picture != Picture::schrodinger)
        throw ValidationError("stationary_state expects a Schrodinger-picture generator");
    const int d = gen.dim;
    const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
    const double scale = std::max(1.0, gen.matrix.cwiseAbs().maxCoeff());

    // Null vector with unit trace via a bordered solve; the border vector
    // vec(1) pairs with the left null vector (trace preservation) so the
    // system is nonsingular iff the zero eigenvalue is simple.
    const Vec id_vec = vectorize(Mat::Identity(d, d));
    Mat bordered = Mat::Zero(n + 1, n + 1);
    bordered.topLeftCorner(n, n) = gen.matrix;
    bordered.topRightCorner(n, 1) = id_vec;
    bordered.bottomLeftCorner(1, n) = id_vec.adjoint();
    auto lu = std::make_shared<Eigen::PartialPivLU<Mat>>(bordered);

    const auto& u = lu->matrixLU();
    double min_piv = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i <= n; ++i) min_piv = std::min(min_piv, std::abs(u(i, i)));
    if (min_piv <= 1e-13 * scale)
        throw NotIrreducible("stationary_state: zero eigenvalue is not simple "
                             "(bordered system numerically singular)");

    Vec rhs = Vec::Zero(n + 1);
    rhs(n) = 1.0;
    Vec sol = lu->solve(rhs);
    Vec rho_vec = sol.head(n);
    const double residual = (gen.matrix * rho_vec).norm() / scale;
    if (residual > 1e-8)
        throw NoStationaryState("stationary_state: no vector annihilated by the generator "
                                "(residual " + std::to_string(residual) + ")");

    StationaryAnalysis an;
    an.dim = d;
    an.rho_ss = herm_re(unvectorize(rho_vec, d));
    an.rho_ss /= an.rho_ss.trace().real();

    Eigen::SelfAdjointEigenSolver<Mat> rho_eig(an.rho_ss);
    an.min_eig = rho_eig.eigenvalues().minCoeff();
    if (an.min_eig <= opts.rank_tol)
        throw NotFullRank("stationary_state: rho_ss is not full rank (min eigenvalue " +
                          std::to_string(an.min_eig) + ")");

    if (d <= opts.dense_dim_limit || opts.force_spectrum) {
        Eigen::ComplexEigenSolver<Mat> eig(gen.matrix, /*computeEigenvectors=*/false);
        int n_zero = 0;
        double gap = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            const cplx lambda = eig.eigenvalues()(i);
            an.liouvillian_spectrum.push_back(lambda);
            if (std::abs(lambda) <= opts.gap_tol * scale) {
                ++n_zero;
            } else {
                gap = std::min(gap, -lambda.real());
            }
        }
        if (n_zero == 0)
            throw NoStationaryState("stationary_state: no eigenvalue within gap_tol of zero");
        if (n_zero > 1)
            throw NotIrreducible("stationary_state: zero eigenvalue has multiplicity " +
                                 std::to_string(n_zero));
        an.gap = gap;
    }

    // The bordered Heisenberg system is the adjoint of the factorization
    // above, so the restricted inverse reuses it instead of a second LU.
    an.ltilde_solver = std::make_shared<RestrictedInverseSolver>(std::move(lu), an.rho_ss);

    if (d <= opts.dense_dim_limit) {
        Mat p = id_vec * vectorize(an.rho_ss).adjoint();
        an.P = SuperOp{d, Picture::heisenberg, p};
        an.Q = SuperOp{d, Picture::heisenberg, Mat(Mat::Identity(n, n) - p)};
        an.Ltilde = SuperOp{d, Picture::heisenberg, an.ltilde_solver->matrix()};
    }
    return an;
}

}  // namespace qfim
