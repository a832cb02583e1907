#pragma once

#include <cmath>
#include <optional>

#include "qfim/errors.hpp"
#include "qfim/linalg.hpp"
#include "qfim/model.hpp"
#include "qfim/stationary.hpp"

namespace qfim {

namespace detail {

inline double real_expectation(const StationaryAnalysis& an, const Mat& X, const char* what) {
    const cplx v = an.expect(X);
    if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v.real())))
        throw ImaginaryResidue(std::string(what) + ": imaginary residue " +
                               std::to_string(v.imag()));
    return v.real();
}

inline Mat commutator(const Mat& A, const Mat& B) { return A * B - B * A; }

}  // namespace detail

// Stationary phase generator A~ = Tr((Hdot + Im sum_i Ldot_i^dag L_i) rho_ss).
inline double phase_generator(const ModelPoint& pt, const Mat& rho_ss) {
    Mat op = pt.Hdot;
    for (int i = 0; i < pt.channels(); ++i) op += herm_im(pt.Ldot[i].adjoint() * pt.L[i]);
    return trace_against(rho_ss, op).real();
}

struct QfiResult {
    double F = 0.0;
    Mat B;       // centered generator coefficient, <B>_ss = 0
    Mat Btilde;  // restricted inverse applied to B
};

// Asymptotic quantum Fisher information per unit time,
//   F = 8 < 1/2 sum_i Ldot_i^dag Ldot_i - Re(Hdot B~)
//         - Im(sum_i Ldot_i^dag B~ L_i) >_ss.
inline QfiResult qfi(const ModelPoint& pt, const StationaryAnalysis& an) {
    const int d = pt.dim();
    Mat raw = pt.Hdot;
    for (int i = 0; i < pt.channels(); ++i) raw += herm_im(pt.Ldot[i].adjoint() * pt.L[i]);

    QfiResult r;
    r.B = raw - trace_against(an.rho_ss, raw) * Mat::Identity(d, d);
    if (check_centering(r.B, an.rho_ss) > 1e-10)
        throw ImaginaryResidue("qfi: B is not centered");
    r.Btilde = an.ltilde_apply(r.B);
    if (check_centering(r.Btilde, an.rho_ss) > 1e-9)
        throw ImaginaryResidue("qfi: <Btilde>_ss != 0");

    Mat x1 = Mat::Zero(d, d);
    Mat redotl = Mat::Zero(d, d);
    for (int i = 0; i < pt.channels(); ++i) {
        x1 += 0.5 * pt.Ldot[i].adjoint() * pt.Ldot[i];
        x1 -= herm_im(pt.Ldot[i].adjoint() * r.Btilde * pt.L[i]);
        redotl += herm_re(pt.Ldot[i].adjoint() * pt.L[i]);
    }
    x1 -= herm_re(pt.Hdot * r.Btilde);
    x1 += herm_im(redotl * r.Btilde);
    double f = 8.0 * detail::real_expectation(an, x1, "qfi");
    if (f < 0.0) {
        if (f < -1e-10) throw BoundViolated("qfi: negative Fisher information " + std::to_string(f));
        f = 0.0;
    }
    r.F = f;
    return r;
}

// <X_2>_ss, the quadratic phase constant of the limit overlap.  Requires
// second derivatives of the model.
inline double phase_constant_X2(const ModelPoint& pt, const StationaryAnalysis& an) {
    if (!pt.Hddot || !pt.Lddot)
        throw MissingSecondDerivatives("phase_constant_X2 requires second derivatives");
    const int d = pt.dim();
    const QfiResult q = qfi(pt, an);

    Mat x2 = 0.5 * (*pt.Hddot);
    Mat redotl = Mat::Zero(d, d);
    for (int i = 0; i < pt.channels(); ++i) {
        x2 += 0.5 * herm_im((*pt.Lddot)[i].adjoint() * pt.L[i]);
        x2 -= herm_re(pt.Ldot[i].adjoint() * q.Btilde * pt.L[i]);
        redotl += herm_re(pt.Ldot[i].adjoint() * pt.L[i]);
    }
    x2 += herm_im(pt.Hdot * q.Btilde);
    x2 += redotl * q.Btilde;
    return an.expect(x2).real();
}

struct CountingCoefficients {
    double mu_c = 0.0;
    double V_c = 0.0;
    double rate = 0.0;
    bool degenerate_variance = false;
};

// Gaussian limit coefficients of the centered counting statistic Y_t for the
// designated channel.  The inverse L~ and stationary state come from the full
// multi-channel generator; the deformation involves only the monitored jump
// operator while the derivative terms sum over every channel.
inline CountingCoefficients counting_coefficients(const ModelPoint& pt,
                                                  const StationaryAnalysis& an, int channel) {
    if (channel < 0 || channel >= pt.channels())
        throw BadChannel("counting_coefficients: channel out of range");
    const int d = pt.dim();
    const Mat& Lc = pt.L[channel];
    const Mat LdL = Lc.adjoint() * Lc;

    CountingCoefficients c;
    c.rate = detail::real_expectation(an, LdL, "counting rate");
    const Mat A = -an.ltilde_apply(LdL - c.rate * Mat::Identity(d, d));
    if (check_centering(A, an.rho_ss) > 1e-9)
        throw ImaginaryResidue("counting_coefficients: <A>_ss != 0");

    Mat mu_op = kI * detail::commutator(pt.Hdot, A);
    for (int i = 0; i < pt.channels(); ++i) {
        const Mat re_dl = herm_re(pt.Ldot[i].adjoint() * pt.L[i]);  // Re(Ldot^dag L)
        mu_op += pt.Ldot[i].adjoint() * A * pt.L[i] + pt.L[i].adjoint() * A * pt.Ldot[i];
        mu_op -= re_dl * A + A * re_dl;
    }
    // Derivative of the monitored-channel rate; only that channel's jump
    // operator enters the counting statistic itself.
    mu_op += 2.0 * herm_re(pt.Ldot[channel].adjoint() * Lc);
    c.mu_c = detail::real_expectation(an, mu_op, "mu_c");
    c.V_c = detail::real_expectation(an, Mat(LdL + 2.0 * Lc.adjoint() * A * Lc), "V_c");
    if (c.V_c <= 1e-12) {
        c.degenerate_variance = true;
    } else if (c.V_c < 0.0) {
        throw BoundViolated("counting_coefficients: negative variance");
    }
    return c;
}

struct HomodyneCoefficients {
    double phi = 0.0;
    double mu_h = 0.0;
    double V_h = 0.0;
    double drift = 0.0;
    bool degenerate_variance = false;
};

// Gaussian limit coefficients of the centered integrated homodyne current
// W_t at quadrature angle phi.
inline HomodyneCoefficients homodyne_coefficients(const ModelPoint& pt,
                                                  const StationaryAnalysis& an, double phi,
                                                  int channel) {
    if (channel < 0 || channel >= pt.channels())
        throw BadChannel("homodyne_coefficients: channel out of range");
    const int d = pt.dim();
    const Mat& Lc = pt.L[channel];
    const cplx em = std::exp(-kI * phi);
    const cplx ep = std::exp(kI * phi);
    const Mat quad = em * Lc.adjoint() + ep * Lc;

    HomodyneCoefficients h;
    h.phi = phi;
    h.drift = detail::real_expectation(an, quad, "homodyne drift");
    const Mat B = -an.ltilde_apply(quad - h.drift * Mat::Identity(d, d));
    if (check_centering(B, an.rho_ss) > 1e-9)
        throw ImaginaryResidue("homodyne_coefficients: <B>_ss != 0");

    Mat mu_op = kI * detail::commutator(pt.Hdot, B);
    mu_op += em * pt.Ldot[channel].adjoint() + ep * pt.Ldot[channel];
    for (int i = 0; i < pt.channels(); ++i) {
        const Mat re_dl = herm_re(pt.Ldot[i].adjoint() * pt.L[i]);
        mu_op += pt.Ldot[i].adjoint() * B * pt.L[i] + pt.L[i].adjoint() * B * pt.Ldot[i];
        mu_op -= re_dl * B + B * re_dl;
    }
    h.mu_h = detail::real_expectation(an, mu_op, "mu_h");
    h.V_h = 1.0 + 2.0 * detail::real_expectation(an, Mat(em * Lc.adjoint() * B + ep * B * Lc), "V_h");
    if (h.V_h <= 1e-12) {
        h.degenerate_variance = true;
    } else if (h.V_h < 0.0) {
        throw BoundViolated("homodyne_coefficients: negative variance");
    }
    return h;
}

struct CountingInfo {
    double mu_c = 0.0;
    double V_c = 0.0;
    double I_c = 0.0;
    double rate = 0.0;
    bool degenerate_variance = false;
};

struct HomodyneInfo {
    double phi = 0.0;
    double mu_h = 0.0;
    double V_h = 0.0;
    double I_h = 0.0;
    double drift = 0.0;
    bool degenerate_variance = false;
};

struct FisherReport {
    double F = 0.0;
    std::optional<double> X2_mean;
    std::optional<CountingInfo> count;
    std::optional<HomodyneInfo> homodyne;
    int channel = 0;
    double gap = std::numeric_limits<double>::quiet_NaN();
    double min_eig = 0.0;
};

// Runs the full pipeline at one (theta0, phi) point: QFI plus counting and
// homodyne coefficients for the designated channel, with the information
// bounds I_c <= F, I_h <= F enforced.
inline FisherReport assemble_report(const ParamModel& model, double theta0, double phi,
                                    int channel, const StationaryOptions& opts = {}) {
    const ModelPoint pt = evaluate(model, theta0);
    const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt), opts);

    FisherReport rep;
    rep.channel = channel;
    rep.gap = an.gap;
    rep.min_eig = an.min_eig;
    rep.F = qfi(pt, an).F;
    if (pt.Hddot && pt.Lddot) rep.X2_mean = phase_constant_X2(pt, an);

    const CountingCoefficients cc = counting_coefficients(pt, an, channel);
    CountingInfo ci;
    ci.mu_c = cc.mu_c;
    ci.V_c = cc.V_c;
    ci.rate = cc.rate;
    ci.degenerate_variance = cc.degenerate_variance;
    ci.I_c = cc.degenerate_variance ? 0.0 : cc.mu_c * cc.mu_c / cc.V_c;
    rep.count = ci;

    const HomodyneCoefficients hc = homodyne_coefficients(pt, an, phi, channel);
    HomodyneInfo hi;
    hi.phi = phi;
    hi.mu_h = hc.mu_h;
    hi.V_h = hc.V_h;
    hi.drift = hc.drift;
    hi.degenerate_variance = hc.degenerate_variance;
    hi.I_h = hc.degenerate_variance ? 0.0 : hc.mu_h * hc.mu_h / hc.V_h;
    rep.homodyne = hi;

    const double bound_tol = 1e-8 * std::max(rep.F, 1.0);
    if (ci.I_c > rep.F + bound_tol)
        throw BoundViolated("assemble_report: I_c exceeds F");
    if (hi.I_h > rep.F + bound_tol)
        throw BoundViolated("assemble_report: I_h exceeds F");
    return rep;
}

}  // namespace qfim
