#pragma once

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "qfim/errors.hpp"
#include "qfim/linalg.hpp"
#include "qfim/model.hpp"

namespace qfim {

enum class Picture { heisenberg, schrodinger, deformed };

// A d^2 x d^2 matrix acting on column-stacked d x d operators.
struct SuperOp {
    int dim = 0;
    Picture picture = Picture::heisenberg;
    Mat matrix;

    Mat apply(const Mat& X) const { return unvectorize(matrix * vectorize(X), dim); }
};

// Heisenberg-picture Lindblad generator,
//   L(X) = i[H, X] + sum_j (L_j^dag X L_j - 1/2 {L_j^dag L_j, X}).
// The sign of the Hamiltonian term follows the convention that makes the
// duality Tr(rho L(X)) = Tr(L_*(rho) X) hold against the Schrodinger-picture
// master equation with -i[H, rho].
inline SuperOp lindblad_heisenberg(const ModelPoint& pt) {
    const int d = pt.dim();
    const Mat id = Mat::Identity(d, d);
    Mat m = kI * (kron(id, pt.H) - kron(pt.H.transpose(), id));
    for (const Mat& L : pt.L) {
        const Mat LdL = L.adjoint() * L;
        m += kron(L.transpose(), L.adjoint());
        m -= 0.5 * (kron(id, LdL) + kron(LdL.transpose(), id));
    }
    return SuperOp{d, Picture::heisenberg, std::move(m)};
}

// Schrodinger-picture generator, L_*(rho) = -i[H, rho] + sum_j (L_j rho
// L_j^dag - 1/2 {L_j^dag L_j, rho}).
inline SuperOp lindblad_schrodinger(const ModelPoint& pt) {
    const int d = pt.dim();
    const Mat id = Mat::Identity(d, d);
    Mat m = -kI * (kron(id, pt.H) - kron(pt.H.transpose(), id));
    for (const Mat& L : pt.L) {
        const Mat LdL = L.adjoint() * L;
        m += kron(L.conjugate(), L);
        m -= 0.5 * (kron(id, LdL) + kron(LdL.transpose(), id));
    }
    return SuperOp{d, Picture::schrodinger, std::move(m)};
}

namespace detail {

inline void check_channel(const ModelPoint& pt, int channel) {
    if (channel < 0 || channel >= pt.channels())
        throw BadChannel("channel index " + std::to_string(channel) + " out of range (k=" +
                         std::to_string(pt.channels()) + ")");
}

}  // namespace detail

// Counting-deformed generator for the monitored channel,
//   L^(s)(X) = L(X) + (e^{is} - 1) L^dag X L.
inline SuperOp counting_deformed(const ModelPoint& pt, double s, int channel) {
    detail::check_channel(pt, channel);
    SuperOp g = lindblad_heisenberg(pt);
    if (s != 0.0) {
        const Mat& L = pt.L[channel];
        g.matrix += (std::exp(kI * s) - 1.0) * kron(L.transpose(), L.adjoint());
        g.picture = Picture::deformed;
    }
    return g;
}

// Homodyne-deformed generator for quadrature angle phi,
//   L^(p)(X) = L(X) + ip(e^{-i phi} L^dag X + X e^{i phi} L) - (p^2/2) X.
inline SuperOp homodyne_deformed(const ModelPoint& pt, double p, double phi, int channel) {
    detail::check_channel(pt, channel);
    SuperOp g = lindblad_heisenberg(pt);
    if (p != 0.0) {
        const Mat& L = pt.L[channel];
        const int d = pt.dim();
        const Mat id = Mat::Identity(d, d);
        g.matrix += kI * p * (std::exp(-kI * phi) * kron(id, L.adjoint()) +
                              std::exp(kI * phi) * kron(L.transpose(), id));
        g.matrix -= 0.5 * p * p * Mat::Identity(d * d, d * d);
        g.picture = Picture::deformed;
    }
    return g;
}

// Exact finite-t two-sided generator for the overlap of states evolved with
// parameters theta = theta0 + u/sqrt(t) and theta' = theta0 + v/sqrt(t):
//   L^(t,u,v)(X) = t [ i(H_th X - X H_th') + sum_i (L_i,th^dag X L_i,th'
//                    - 1/2 (L_i,th^dag L_i,th X + X L_i,th'^dag L_i,th'))
//                    - i(th - th') A~ X ],
// with A~ the stationary phase generator, passed in by the caller.
inline SuperOp two_sided_generator(const ParamModel& model, double theta0, double u, double v,
                                   double t, double a_tilde) {
    const double th = theta0 + u / std::sqrt(t);
    const double thp = theta0 + v / std::sqrt(t);
    const ModelPoint left = evaluate(model, th);
    const ModelPoint right = evaluate(model, thp);
    const int d = model.dim;
    const Mat id = Mat::Identity(d, d);

    Mat m = kI * (kron(id, left.H) - kron(right.H.transpose(), id));
    for (int j = 0; j < model.channels; ++j) {
        const Mat& Lu = left.L[j];
        const Mat& Lv = right.L[j];
        m += kron(Lv.transpose(), Lu.adjoint());
        m -= 0.5 * (kron(id, Mat(Lu.adjoint() * Lu)) + kron(Mat(Lv.adjoint() * Lv).transpose(), id));
    }
    m -= kI * (th - thp) * a_tilde * Mat::Identity(d * d, d * d);
    m *= t;
    return SuperOp{d, Picture::deformed, std::move(m)};
}

// Exact finite-t generator of the counting characteristic-function semigroup,
//   L^(t,u,s)(X) = t [ L_th(X) + (e^{is/sqrt(t)} - 1) L_th^dag X L_th
//                    - (is/sqrt(t)) <L^dag L>_ss X ],
// where the deformation acts on the monitored channel and the centering rate
// is evaluated at theta0.
inline SuperOp counting_lan_generator(const ParamModel& model, double theta0, double u, double s,
                                      double t, int channel, double rate0) {
    const double th = theta0 + u / std::sqrt(t);
    const ModelPoint pt = evaluate(model, th);
    detail::check_channel(pt, channel);
    SuperOp g = lindblad_heisenberg(pt);
    const Mat& L = pt.L[channel];
    const int d = pt.dim();
    g.matrix += (std::exp(kI * s / std::sqrt(t)) - 1.0) * kron(L.transpose(), L.adjoint());
    g.matrix -= kI * s / std::sqrt(t) * rate0 * Mat::Identity(d * d, d * d);
    g.matrix *= t;
    g.picture = Picture::deformed;
    return g;
}

// Exact finite-t generator of the homodyne characteristic-function semigroup,
// with the centering drift evaluated at theta0.
inline SuperOp homodyne_lan_generator(const ParamModel& model, double theta0, double u, double p,
                                      double phi, double t, int channel, double drift0) {
    const double th = theta0 + u / std::sqrt(t);
    const ModelPoint pt = evaluate(model, th);
    detail::check_channel(pt, channel);
    SuperOp g = lindblad_heisenberg(pt);
    const Mat& L = pt.L[channel];
    const int d = pt.dim();
    const Mat id = Mat::Identity(d, d);
    const double rt = std::sqrt(t);
    g.matrix += kI * p / rt * (std::exp(-kI * phi) * kron(id, L.adjoint()) +
                               std::exp(kI * phi) * kron(L.transpose(), id));
    g.matrix -= (0.5 * p * p / t + kI * p / rt * drift0) * Mat::Identity(d * d, d * d);
    g.matrix *= t;
    g.picture = Picture::deformed;
    return g;
}

// e^{tau g} applied to X via dense scaling-and-squaring (Pade) matrix
// exponential on the vectorized representation.
inline Mat semigroup_apply(const SuperOp& g, double tau, const Mat& X) {
    if (!std::isfinite(tau)) throw ExponentialOverflow("semigroup_apply: tau is not finite");
    if (tau == 0.0) return X;
    const double scaled_norm = std::abs(tau) * g.matrix.cwiseAbs().maxCoeff() * g.matrix.rows();
    if (scaled_norm > 1e9)
        throw ExponentialOverflow("semigroup_apply: ||tau g|| too large (" +
                                  std::to_string(scaled_norm) + " > 1e9)");
    Mat E = (tau * g.matrix).exp();
    return unvectorize(E * vectorize(X), g.dim);
}

}  // namespace qfim
