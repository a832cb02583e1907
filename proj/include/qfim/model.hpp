#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "qfim/errors.hpp"
#include "qfim/linalg.hpp"

namespace qfim {

using MatrixFn = std::function<Mat(double)>;

// A theta-parametrized Markov model (H(theta), {L_j(theta)}).  Derivative maps
// are optional; evaluate() falls back to central finite differences.
struct ParamModel {
    int dim = 0;
    int channels = 0;
    MatrixFn hamiltonian;
    std::vector<MatrixFn> jumps;

    std::optional<MatrixFn> d_hamiltonian;
    std::optional<std::vector<MatrixFn>> d_jumps;
    std::optional<MatrixFn> dd_hamiltonian;
    std::optional<std::vector<MatrixFn>> dd_jumps;

    bool has_analytic_derivatives() const { return d_hamiltonian && d_jumps; }
    bool has_second_derivatives() const { return dd_hamiltonian && dd_jumps; }
};

// Model and its derivatives evaluated at a fixed parameter value.
struct ModelPoint {
    double theta0 = 0.0;
    Mat H;
    Mat Hdot;
    std::vector<Mat> L;
    std::vector<Mat> Ldot;
    std::optional<Mat> Hddot;
    std::optional<std::vector<Mat>> Lddot;

    int dim() const { return static_cast<int>(H.rows()); }
    int channels() const { return static_cast<int>(L.size()); }
};

namespace detail {

inline Mat central_diff(const MatrixFn& f, double theta0, double h) {
    return (f(theta0 + h) - f(theta0 - h)) / (2.0 * h);
}

inline Mat second_diff(const MatrixFn& f, double theta0, double h) {
    return (f(theta0 + h) - 2.0 * f(theta0) + f(theta0 - h)) / (h * h);
}

}  // namespace detail

inline ModelPoint evaluate(const ParamModel& model, double theta0,
                           std::optional<double> fd_step = std::nullopt) {
    const double h = fd_step.value_or(1e-5 * std::max(1.0, std::abs(theta0)));

    ModelPoint pt;
    pt.theta0 = theta0;
    pt.H = model.hamiltonian(theta0);
    if (hermiticity_defect(pt.H) > 1e-8)
        throw NonHermitianHamiltonian("hamiltonian(theta) is not Hermitian at theta=" +
                                      std::to_string(theta0));
    pt.H = symmetrize(pt.H);

    if (model.d_hamiltonian) {
        pt.Hdot = (*model.d_hamiltonian)(theta0);
    } else {
        pt.Hdot = detail::central_diff(model.hamiltonian, theta0, h);
    }
    if (hermiticity_defect(pt.Hdot) > 1e-8)
        throw NonHermitianHamiltonian("d/dtheta hamiltonian is not Hermitian");
    pt.Hdot = symmetrize(pt.Hdot);

    for (int j = 0; j < model.channels; ++j) {
        pt.L.push_back(model.jumps[j](theta0));
        if (model.d_jumps) {
            pt.Ldot.push_back((*model.d_jumps)[j](theta0));
        } else {
            pt.Ldot.push_back(detail::central_diff(model.jumps[j], theta0, h));
        }
    }

    if (model.has_second_derivatives()) {
        pt.Hddot = symmetrize((*model.dd_hamiltonian)(theta0));
        std::vector<Mat> ldd;
        for (int j = 0; j < model.channels; ++j) ldd.push_back((*model.dd_jumps)[j](theta0));
        pt.Lddot = std::move(ldd);
    }
    return pt;
}

// --- Built-in model: driven two-level atom -------------------------------
//
// Basis convention: (|e>, |g>) with sigma_- = |g><e|, so sigma_- is the
// matrix [[0,0],[1,0]] and sigma_+ its adjoint.  Jump operator
// L(theta) = theta sigma_- + z, Hamiltonian H(theta) = (i/2) theta
// (conj(z) sigma_- - z sigma_+).

inline Mat sigma_minus() {
    Mat s = Mat::Zero(2, 2);
    s(1, 0) = 1.0;
    return s;
}

inline Mat sigma_plus() { return sigma_minus().adjoint(); }

inline ParamModel two_level_model(cplx z) {
    if (std::abs(z) == 0.0) throw ZeroCoupling("two_level_model requires z != 0");
    ParamModel m;
    m.dim = 2;
    m.channels = 1;
    const Mat sm = sigma_minus();
    const Mat sp = sigma_plus();
    const Mat id = Mat::Identity(2, 2);
    m.hamiltonian = [=](double th) -> Mat { return 0.5 * kI * th * (std::conj(z) * sm - z * sp); };
    m.jumps = {[=](double th) -> Mat { return th * sm + z * id; }};
    m.d_hamiltonian = [=](double) -> Mat { return 0.5 * kI * (std::conj(z) * sm - z * sp); };
    m.d_jumps = std::vector<MatrixFn>{[=](double) -> Mat { return sm; }};
    m.dd_hamiltonian = [=](double) -> Mat { return Mat::Zero(2, 2); };
    m.dd_jumps = std::vector<MatrixFn>{[=](double) -> Mat { return Mat::Zero(2, 2); }};
    return m;
}

// --- Built-in model: atom maser ------------------------------------------
//
// Cavity mode truncated at `cutoff` Fock levels (dimension cutoff+1), driven
// by a beam of excited atoms (rate n_ex) and coupled to a thermal bath with
// mean photon number nu.  The estimated parameter is the accumulated Rabi
// angle phi; H = 0 and there are four jump channels.

namespace detail {

inline Mat annihilator(int dim) {
    Mat a = Mat::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// diag(f(n+1)) for n = 0..dim-1; functions of a a^dagger are diagonal in the
// number basis with eigenvalues n+1.
inline Mat diag_fn(int dim, const std::function<double(double)>& f) {
    Mat d = Mat::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) d(n, n) = f(static_cast<double>(n + 1));
    return d;
}

}  // namespace detail

inline ParamModel atom_maser_model(double n_ex, double nu, int cutoff) {
    if (cutoff < 2) throw CutoffTooSmall("atom_maser_model requires cutoff >= 2");
    if (n_ex <= 0.0) throw ValidationError("atom_maser_model requires n_ex > 0");
    if (nu < 0.0) throw ValidationError("atom_maser_model requires nu >= 0");

    const int dim = cutoff + 1;
    const Mat a = detail::annihilator(dim);
    const Mat adag = a.adjoint();
    const double sN = std::sqrt(n_ex);

    ParamModel m;
    m.dim = dim;
    m.channels = 4;
    m.hamiltonian = [dim](double) -> Mat { return Mat::Zero(dim, dim); };

    auto sinc = [dim, adag, sN](double phi) -> Mat {
        // sqrt(N_ex) a^dag sin(phi sqrt(a a^dag)) / sqrt(a a^dag)
        return sN * adag *
               detail::diag_fn(dim, [phi](double m1) { return std::sin(phi * std::sqrt(m1)) / std::sqrt(m1); });
    };
    auto cosop = [dim, sN](double phi) -> Mat {
        return sN * detail::diag_fn(dim, [phi](double m1) { return std::cos(phi * std::sqrt(m1)); });
    };

    m.jumps = {
        [sinc](double phi) -> Mat { return sinc(phi); },
        [cosop](double phi) -> Mat { return cosop(phi); },
        [a, nu](double) -> Mat { return std::sqrt(nu + 1.0) * a; },
        [adag, nu](double) -> Mat { return std::sqrt(nu) * adag; },
    };
    m.d_hamiltonian = [dim](double) -> Mat { return Mat::Zero(dim, dim); };
    m.d_jumps = std::vector<MatrixFn>{
        [dim, adag, sN](double phi) -> Mat {
            return sN * adag * detail::diag_fn(dim, [phi](double m1) { return std::cos(phi * std::sqrt(m1)); });
        },
        [dim, sN](double phi) -> Mat {
            return -sN *
                   detail::diag_fn(dim, [phi](double m1) { return std::sqrt(m1) * std::sin(phi * std::sqrt(m1)); });
        },
        [dim](double) -> Mat { return Mat::Zero(dim, dim); },
        [dim](double) -> Mat { return Mat::Zero(dim, dim); },
    };
    m.dd_hamiltonian = [dim](double) -> Mat { return Mat::Zero(dim, dim); };
    m.dd_jumps = std::vector<MatrixFn>{
        [dim, adag, sN](double phi) -> Mat {
            return -sN * adag *
                   detail::diag_fn(dim, [phi](double m1) { return std::sqrt(m1) * std::sin(phi * std::sqrt(m1)); });
        },
        [dim, sN](double phi) -> Mat {
            return -sN * detail::diag_fn(dim, [phi](double m1) { return m1 * std::cos(phi * std::sqrt(m1)); });
        },
        [dim](double) -> Mat { return Mat::Zero(dim, dim); },
        [dim](double) -> Mat { return Mat::Zero(dim, dim); },
    };
    return m;
}

// --- Closed-form oracles --------------------------------------------------

// Closed-form quantities for the two-level model: the stationary state
// entries, the QFI, and the homodyne Fisher coefficients.
struct TwoLevelOracles {
    double F = 0.0;        // quantum Fisher information
    double a = 0.0;        // rho_ss = [[a, b], [c, 1-a]]
    cplx b{0.0, 0.0};
    cplx c{0.0, 0.0};
    double mean_homodyne = 0.0;  // stationary quadrature drift
    double A_h = 0.0;            // numerator coefficient
    double B_h = 0.0;            // denominator (variance) coefficient
    double I_h = 0.0;            // homodyne Fisher information A_h^2 / B_h
};

inline TwoLevelOracles two_level_oracles(cplx z, double theta0, double phi) {
    if (theta0 == 0.0) throw ValidationError("two_level_oracles requires theta0 != 0");
    const double z2 = std::norm(z);
    TwoLevelOracles o;
    o.F = 128.0 * z2 * z2 / ((8.0 * z2 + theta0 * theta0) * theta0 * theta0);
    o.a = 4.0 * z2 / (8.0 * z2 + theta0 * theta0);
    o.b = -theta0 * z / (2.0 * z2) * o.a;
    o.c = -theta0 * std::conj(z) / (2.0 * z2) * o.a;

    const double a_tilde = 1.0 - 2.0 * o.a;
    const cplx ze = z * std::exp(kI * phi);
    const double re_ze = ze.real();
    const double im_ze = ze.imag();
    o.mean_homodyne = 2.0 * re_ze - 4.0 * re_ze * a_tilde;

    // Limiting Gaussian drift and variance of the rescaled integrated
    // homodyne current, as rational functions of theta0, R = Re(z e^{i phi})
    // and S = Im(z e^{i phi}).  Derived symbolically from the restricted
    // inverse on the adapted operator basis and confirmed by direct
    // simulation of the diffusive conditional dynamics.
    const double th2 = theta0 * theta0;
    const double den = th2 + 8.0 * z2;
    const double r2 = re_ze * re_ze;
    const double s2 = im_ze * im_ze;
    o.A_h = -64.0 * theta0 * z2 * re_ze / (den * den);
    o.B_h = (512.0 * r2 * r2 * r2 + 3584.0 * r2 * r2 * s2 + 704.0 * r2 * r2 * th2 +
             5632.0 * r2 * s2 * s2 + 1408.0 * r2 * s2 * th2 - 8.0 * r2 * th2 * th2 +
             2560.0 * s2 * s2 * s2 + 704.0 * s2 * s2 * th2 + 56.0 * s2 * th2 * th2 +
             th2 * th2 * th2) /
            (den * den * den);
    o.I_h = o.A_h * o.A_h / o.B_h;
    return o;
}

struct MaserOracles {
    Eigen::VectorXd rho_ss_diag;  // stationary occupation numbers, levels 0..cutoff
    double F = 0.0;               // 4 n_ex sum_k (k+1) rho_ss(k)
};

inline MaserOracles maser_oracles(double n_ex, double nu, double phi, int cutoff) {
    const int dim = cutoff + 1;
    Eigen::VectorXd p(dim);
    p(0) = 1.0;
    for (int n = 1; n < dim; ++n) {
        const double s = std::sin(phi * std::sqrt(static_cast<double>(n)));
        const double factor = nu / (nu + 1.0) + n_ex / (nu + 1.0) * s * s / static_cast<double>(n);
        p(n) = p(n - 1) * factor;
    }
    p /= p.sum();
    if (p(dim - 1) > 1e-12 * p.maxCoeff())
        throw CutoffTooSmall("maser_oracles: stationary tail mass above 1e-12 of the mode");

    MaserOracles o;
    o.rho_ss_diag = p;
    double f = 0.0;
    for (int k = 0; k < dim; ++k) f += (k + 1) * p(k);
    o.F = 4.0 * n_ex * f;
    return o;
}

}  // namespace qfim
