#include <gtest/gtest.h>

#include <random>

#include "qfim/model.hpp"
#include "qfim/stationary.hpp"
#include "qfim/superop.hpp"

using namespace qfim;

namespace {

Mat random_matrix(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

// Generic dense jump operators give an irreducible semigroup almost surely.
ModelPoint random_irreducible_point(int d, int k, std::mt19937_64& rng) {
    ModelPoint pt;
    pt.H = herm_re(random_matrix(d, rng));
    pt.Hdot = herm_re(random_matrix(d, rng));
    for (int j = 0; j < k; ++j) {
        pt.L.push_back(random_matrix(d, rng));
        pt.Ldot.push_back(random_matrix(d, rng));
    }
    return pt;
}

ModelPoint two_level_point(cplx z, double theta0) {
    return evaluate(two_level_model(z), theta0);
}

}  // namespace

TEST(StationaryState, TwoLevelMatchesClosedForm) {
    const ModelPoint pt = two_level_point(cplx(1, 0), 2.0);
    const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt));
    Mat expected(2, 2);
    expected << 1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0;
    EXPECT_LT((an.rho_ss - expected).norm(), 1e-12);
    EXPECT_GT(an.gap, 0.0);
    EXPECT_GT(an.min_eig, 1e-3);
}

TEST(StationaryState, SymmetricFlipChannelsGiveMaximallyMixed) {
    ModelPoint pt;
    pt.H = Mat::Zero(2, 2);
    pt.Hdot = Mat::Zero(2, 2);
    pt.L = {sigma_minus(), sigma_plus()};
    pt.Ldot = {Mat::Zero(2, 2), Mat::Zero(2, 2)};
    const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt));
    EXPECT_LT((an.rho_ss - 0.5 * Mat::Identity(2, 2)).norm(), 1e-12);
}

TEST(StationaryState, PureDecayNotFullRank) {
    ModelPoint pt;
    pt.H = Mat::Zero(2, 2);
    pt.Hdot = Mat::Zero(2, 2);
    pt.L = {sigma_minus()};
    pt.Ldot = {Mat::Zero(2, 2)};
    EXPECT_THROW(stationary_state(lindblad_schrodinger(pt)), NotFullRank);
}

TEST(StationaryState, DephasingNotIrreducible) {
    // L = sigma_z: every diagonal state is stationary.
    Mat sz = Mat::Zero(2, 2);
    sz(0, 0) = 1;
    sz(1, 1) = -1;
    ModelPoint pt;
    pt.H = Mat::Zero(2, 2);
    pt.Hdot = Mat::Zero(2, 2);
    pt.L = {sz};
    pt.Ldot = {Mat::Zero(2, 2)};
    EXPECT_THROW(stationary_state(lindblad_schrodinger(pt)), NotIrreducible);
}

TEST(StationaryState, RejectsHeisenbergPicture) {
    const ModelPoint pt = two_level_point(cplx(1, 0), 2.0);
    EXPECT_THROW(stationary_state(lindblad_heisenberg(pt)), ValidationError);
}

TEST(Projections, DefiningIdentities) {
    std::mt19937_64 rng(21);
    const ModelPoint pt = random_irreducible_point(3, 2, rng);
    const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt));
    ASSERT_TRUE(an.P && an.Q && an.Ltilde);

    const Mat& p = an.P->matrix;
    const Mat& q = an.Q->matrix;
    EXPECT_LT((p * p - p).norm(), 1e-11);
    EXPECT_LT((p + q - Mat::Identity(9, 9)).norm(), 1e-12);

    for (int trial = 0; trial < 20; ++trial) {
        const Mat x = random_matrix(3, rng);
        const Mat px = an.P->apply(x);
        const Mat expected = (an.rho_ss * x).trace() * Mat::Identity(3, 3);
        EXPECT_LT((px - expected).norm(), 1e-11);
    }
}

TEST(RestrictedInverse, DefiningIdentities) {
    std::mt19937_64 rng(22);
    for (int d : {2, 3, 4}) {
        const ModelPoint pt = random_irreducible_point(d, 2, rng);
        const SuperOp heis = lindblad_heisenberg(pt);
        const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt));
        ASSERT_TRUE(an.Ltilde && an.Q);
        const Mat& lt = an.Ltilde->matrix;
        const double scale = std::max(1.0, heis.matrix.norm());
        EXPECT_LT((lt * heis.matrix - an.Q->matrix).norm() / scale, 1e-10);
        EXPECT_LT((heis.matrix * lt - an.Q->matrix).norm() / scale, 1e-10);

        // L~ preserves the traceless-in-state subspace.
        for (int trial = 0; trial < 10; ++trial) {
            Mat y = random_matrix(d, rng);
            y -= (an.rho_ss * y).trace() * Mat::Identity(d, d);
            const Mat x = an.ltilde_apply(y);
            EXPECT_LT(std::abs((an.rho_ss * x).trace()), 1e-11);
            EXPECT_LT((heis.apply(x) - y).norm() / std::max(1.0, y.norm()), 1e-10);
        }
    }
}

TEST(RestrictedInverse, IdentityMapsToZero) {
    const ModelPoint pt = two_level_point(cplx(1, 0), 2.0);
    const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt));
    EXPECT_LT(an.ltilde_apply(Mat::Identity(2, 2)).norm(), 1e-12);
}

// Matrix of L~ on the adapted basis (e1, e2, e3) of the two-level model.
TEST(RestrictedInverse, TwoLevelMatchesClosedFormMatrix) {
    const cplx z(1, 0);
    const double th = 2.0;
    const ModelPoint pt = two_level_point(z, th);
    const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt));
    const SuperOp lt = restricted_inverse(lindblad_heisenberg(pt), an.rho_ss);

    const TwoLevelOracles o = two_level_oracles(z, th, 0.0);
    const double a_t = 1.0 - 2.0 * o.a;
    Mat sz = Mat::Zero(2, 2);
    sz(0, 0) = 1;
    sz(1, 1) = -1;
    const Mat id = Mat::Identity(2, 2);
    Mat basis(4, 4);
    basis.col(0) = vectorize(Mat(sz + a_t * id));
    basis.col(1) = vectorize(Mat(sigma_plus() - o.c * id));
    basis.col(2) = vectorize(Mat(sigma_minus() - o.b * id));
    basis.col(3) = vectorize(id);
    const Mat rep = (basis.inverse() * lt.matrix * basis).topLeftCorner(3, 3);

    const double z2 = std::norm(z);
    const double denom = th * th * (th * th + 8.0 * z2);
    Mat expected(3, 3);
    expected << -th * th, -2.0 * std::conj(z) * th, -2.0 * z * th,  //
        4.0 * z * th, -2.0 * th * th - 8.0 * z2, 8.0 * z * z,       //
        4.0 * std::conj(z) * th, 8.0 * std::conj(z) * std::conj(z),
        -2.0 * th * th - 8.0 * z2;
    expected /= denom;
    EXPECT_LT((rep - expected).norm(), 1e-10) << rep;
    EXPECT_NEAR(rep(0, 0).real(), -1.0 / 12.0, 1e-12);
}

TEST(CheckCentering, Examples) {
    const ModelPoint pt = two_level_point(cplx(1, 0), 2.0);
    const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt));
    const Mat LdL = pt.L[0].adjoint() * pt.L[0];
    const double rate = (an.rho_ss * LdL).trace().real();
    EXPECT_NEAR(check_centering(Mat(LdL - rate * Mat::Identity(2, 2)), an.rho_ss), 0.0, 1e-12);
    EXPECT_NEAR(check_centering(Mat::Identity(2, 2), an.rho_ss), 1.0, 1e-14);
}

TEST(Spectrum, GapMatchesEigenvaluesAndDuality) {
    std::mt19937_64 rng(31);
    const ModelPoint pt = random_irreducible_point(3, 2, rng);
    const SuperOp schr = lindblad_schrodinger(pt);
    const SuperOp heis = lindblad_heisenberg(pt);
    const StationaryAnalysis an = stationary_state(schr);

    double gap = std::numeric_limits<double>::infinity();
    for (const cplx& lambda : an.liouvillian_spectrum)
        if (std::abs(lambda) > 1e-9) gap = std::min(gap, -lambda.real());
    EXPECT_NEAR(an.gap, gap, 1e-9);
    EXPECT_GT(an.gap, 0.0);

    // Heisenberg spectrum is the complex conjugate multiset.
    Eigen::ComplexEigenSolver<Mat> eh(heis.matrix, false);
    std::vector<cplx> hs(eh.eigenvalues().data(), eh.eigenvalues().data() + 9);
    std::vector<cplx> ss = an.liouvillian_spectrum;
    auto key = [](const cplx& a, const cplx& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    for (auto& v : hs) v = std::conj(v);
    std::sort(hs.begin(), hs.end(), key);
    std::sort(ss.begin(), ss.end(), key);
    for (std::size_t i = 0; i < ss.size(); ++i) EXPECT_LT(std::abs(hs[i] - ss[i]), 1e-9);
}

TEST(Spectrum, ErgodicConvergenceAtGapRate) {
    std::mt19937_64 rng(41);
    const ModelPoint pt = two_level_point(cplx(1, 0), 2.0);
    const SuperOp schr = lindblad_schrodinger(pt);
    const StationaryAnalysis an = stationary_state(schr);

    Mat a = random_matrix(2, rng);
    Mat rho0 = a * a.adjoint();
    rho0 /= rho0.trace().real();
    double prev_err = 1e300;
    for (double tau : {1.0, 3.0, 6.0}) {
        const Mat rho_t = semigroup_apply(schr, tau, rho0);
        Eigen::SelfAdjointEigenSolver<Mat> eig(herm_re(Mat(rho_t - an.rho_ss)));
        const double err = eig.eigenvalues().cwiseAbs().sum();  // trace norm
        EXPECT_LT(err, 10.0 * std::exp(-an.gap * tau));
        EXPECT_LT(err, prev_err);
        prev_err = err;
    }
}

TEST(LargeDimension, SkipsDenseSpectrumButSolves) {
    // Above the dense limit the analysis keeps factorized solvers only.
    const ParamModel m = atom_maser_model(4.0, 0.2, 30);
    const ModelPoint pt = evaluate(m, 0.9);
    StationaryOptions opts;
    opts.dense_dim_limit = 16;
    opts.rank_tol = -1.0;  // truncation tail underflows the faithfulness check
    const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt), opts);
    EXPECT_FALSE(an.has_gap());
    EXPECT_FALSE(an.P.has_value());
    // Stationary state still correct against the closed-form product.
    const MaserOracles o = maser_oracles(4.0, 0.2, 0.9, 30);
    for (int n = 0; n <= 30; ++n)
        EXPECT_NEAR(an.rho_ss(n, n).real(), o.rho_ss_diag(n), 1e-10);
    // And the restricted-inverse defining property holds.
    const SuperOp heis = lindblad_heisenberg(pt);
    std::mt19937_64 rng(51);
    Mat y = random_matrix(31, rng);
    y -= (an.rho_ss * y).trace() * Mat::Identity(31, 31);
    const Mat x = an.ltilde_apply(y);
    EXPECT_LT((heis.apply(x) - y).norm() / y.norm(), 1e-9);
}
