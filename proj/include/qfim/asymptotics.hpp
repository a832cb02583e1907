#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qfim/errors.hpp"
#include "qfim/fisher.hpp"
#include "qfim/linalg.hpp"
#include "qfim/model.hpp"
#include "qfim/stationary.hpp"
#include "qfim/superop.hpp"

namespace qfim {

// Sign convention of the quadratic phase in the limit overlap, fixed
// empirically against the exact finite-t overlap (see the asymptotics tests).
inline constexpr double kOverlapPhaseSign = 1.0;

// Shared per-(model, theta0) data for the exact LAN computations.
struct LanContext {
    ParamModel model;
    double theta0 = 0.0;
    ModelPoint point;          // evaluated at theta0
    StationaryAnalysis an;     // from the full generator at theta0
    double a_tilde = 0.0;      // stationary phase generator

    static LanContext make(const ParamModel& model, double theta0,
                           const StationaryOptions& opts = {}) {
        LanContext ctx;
        ctx.model = model;
        ctx.theta0 = theta0;
        ctx.point = evaluate(model, theta0);
        ctx.an = stationary_state(lindblad_schrodinger(ctx.point), opts);
        ctx.a_tilde = phase_generator(ctx.point, ctx.an.rho_ss);
        return ctx;
    }

    double counting_rate(int channel) const {
        return trace_against(an.rho_ss, Mat(point.L[channel].adjoint() * point.L[channel])).real();
    }
    double homodyne_drift(double phi, int channel) const {
        const Mat& L = point.L[channel];
        return trace_against(an.rho_ss,
                             Mat(std::exp(-kI * phi) * L.adjoint() + std::exp(kI * phi) * L))
            .real();
    }
};

// <chi0| T_1^(t,u,v)(1) |chi0>, the exact finite-t overlap of locally
// parametrized system-output states.
inline cplx exact_overlap(const LanContext& ctx, double u, double v, double t, const Vec& chi0) {
    if (t <= 0.0) throw ValidationError("exact_overlap requires t > 0");
    const SuperOp g = two_sided_generator(ctx.model, ctx.theta0, u, v, t, ctx.a_tilde);
    const Mat Y = semigroup_apply(g, 1.0, Mat::Identity(ctx.model.dim, ctx.model.dim));
    return (chi0.adjoint() * Y * chi0)(0, 0);
}

// Gaussian limit of the overlap: e^{-(u-v)^2 F/8} with the quadratic phase
// e^{i sign (u^2-v^2) <X2>} when the phase constant is available.
inline cplx limit_overlap(double F, std::optional<double> x2_mean, double u, double v) {
    cplx z = std::exp(cplx(-(u - v) * (u - v) * F / 8.0, 0.0));
    if (x2_mean) z *= std::exp(kI * kOverlapPhaseSign * (u * u - v * v) * (*x2_mean));
    return z;
}

// E(e^{is Y_t / sqrt(t)}) computed from one matrix exponential.
inline cplx exact_counting_cf(const LanContext& ctx, double u, double s, double t, int channel,
                              const Mat& rho_in) {
    const double rate0 = ctx.counting_rate(channel);
    const SuperOp g =
        counting_lan_generator(ctx.model, ctx.theta0, u, s, t, channel, rate0);
    const Mat Y = semigroup_apply(g, 1.0, Mat::Identity(ctx.model.dim, ctx.model.dim));
    return trace_against(rho_in, Y);
}

// E(e^{ip W_t / sqrt(t)}) computed from one matrix exponential.
inline cplx exact_homodyne_cf(const LanContext& ctx, double u, double p, double phi, double t,
                              int channel, const Mat& rho_in) {
    const double drift0 = ctx.homodyne_drift(phi, channel);
    const SuperOp g =
        homodyne_lan_generator(ctx.model, ctx.theta0, u, p, phi, t, channel, drift0);
    const Mat Y = semigroup_apply(g, 1.0, Mat::Identity(ctx.model.dim, ctx.model.dim));
    return trace_against(rho_in, Y);
}

enum class SweepKind { overlap, counting, homodyne };

inline std::string to_string(SweepKind k) {
    switch (k) {
        case SweepKind::overlap: return "overlap";
        case SweepKind::counting: return "counting";
        case SweepKind::homodyne: return "homodyne";
    }
    return "?";
}

struct LanSweep {
    SweepKind kind = SweepKind::overlap;
    double u = 0.0;
    std::vector<double> t_grid;
    std::vector<double> arg_grid;
    std::vector<std::vector<cplx>> exact;  // [t index][arg index]
    std::vector<cplx> limit;               // [arg index]
    std::vector<double> deviation;         // per t, sup over args of |log exact - log limit|
    double decay_exponent = 0.0;           // slope of log(deviation) vs log(t)
};

namespace detail {

// Branch-tracked complex logarithms along the argument grid, unwrapped
// outward from the entry closest to arg = 0 (where the value is ~1).
inline std::vector<cplx> tracked_log(const std::vector<cplx>& values,
                                     const std::vector<double>& args) {
    const double two_pi = 2.0 * std::numbers::pi;
    const std::size_t n = values.size();
    std::vector<cplx> logs(n);
    std::size_t origin = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(args[i]) < std::abs(args[origin])) origin = i;

    auto unwrap = [&](std::size_t i, double prev_imag) {
        if (std::abs(values[i]) < 1e-12)
            throw BranchCut("lan_sweep: |value| < 1e-12 at arg " + std::to_string(args[i]) +
                            "; shrink the argument grid");
        cplx lg = std::log(values[i]);
        double im = lg.imag();
        while (im - prev_imag > std::numbers::pi) im -= two_pi;
        while (im - prev_imag < -std::numbers::pi) im += two_pi;
        logs[i] = cplx(lg.real(), im);
    };

    unwrap(origin, 0.0);
    for (std::size_t i = origin + 1; i < n; ++i) unwrap(i, logs[i - 1].imag());
    for (std::size_t i = origin; i-- > 0;) unwrap(i, logs[i + 1].imag());
    return logs;
}

inline double fit_loglog_slope(const std::vector<double>& t, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double x = std::log(t[i]);
        const double v = std::log(std::max(y[i], 1e-300));
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

struct LanSweepRequest {
    SweepKind kind = SweepKind::overlap;
    double u = 1.0;
    std::vector<double> arg_grid;  // v, s, or p values
    std::vector<double> t_grid;
    double phi = 0.0;   // homodyne only
    int channel = 0;
    std::optional<Vec> chi0;   // overlap initial vector; default e_1
    std::optional<Mat> rho_in; // counting/homodyne initial state; default rho_ss
};

inline LanSweep lan_sweep(const LanContext& ctx, const LanSweepRequest& req) {
    if (req.t_grid.size() < 3) throw ValidationError("lan_sweep: t_grid needs at least 3 points");
    if (!std::is_sorted(req.t_grid.begin(), req.t_grid.end()) || req.t_grid.front() <= 0.0)
        throw ValidationError("lan_sweep: t_grid must be ascending and positive");
    if (req.t_grid.back() < 100.0 * req.t_grid.front())
        throw ValidationError("lan_sweep: t_grid must span at least two decades");
    if (req.arg_grid.empty()) throw ValidationError("lan_sweep: empty arg grid");

    LanSweep sweep;
    sweep.kind = req.kind;
    sweep.u = req.u;
    sweep.t_grid = req.t_grid;
    sweep.arg_grid = req.arg_grid;

    const int d = ctx.model.dim;
    Vec chi0 = req.chi0.value_or(Vec::Unit(d, 0));
    Mat rho_in = req.rho_in.value_or(ctx.an.rho_ss);

    // Gaussian limit per argument.
    switch (req.kind) {
        case SweepKind::overlap: {
            const QfiResult q = qfi(ctx.point, ctx.an);
            std::optional<double> x2;
            if (ctx.point.Hddot && ctx.point.Lddot) x2 = phase_constant_X2(ctx.point, ctx.an);
            for (double v : req.arg_grid) sweep.limit.push_back(limit_overlap(q.F, x2, req.u, v));
            break;
        }
        case SweepKind::counting: {
            const CountingCoefficients c = counting_coefficients(ctx.point, ctx.an, req.channel);
            for (double s : req.arg_grid)
                sweep.limit.push_back(std::exp(cplx(-0.5 * s * s * c.V_c, req.u * s * c.mu_c)));
            break;
        }
        case SweepKind::homodyne: {
            const HomodyneCoefficients h =
                homodyne_coefficients(ctx.point, ctx.an, req.phi, req.channel);
            for (double p : req.arg_grid)
                sweep.limit.push_back(std::exp(cplx(-0.5 * p * p * h.V_h, req.u * p * h.mu_h)));
            break;
        }
    }

    const std::vector<cplx> limit_logs = detail::tracked_log(sweep.limit, sweep.arg_grid);

    for (double t : req.t_grid) {
        std::vector<cplx> row;
        for (double arg : req.arg_grid) {
            cplx value;
            switch (req.kind) {
                case SweepKind::overlap:
                    value = exact_overlap(ctx, req.u, arg, t, chi0);
                    break;
                case SweepKind::counting:
                    value = exact_counting_cf(ctx, req.u, arg, t, req.channel, rho_in);
                    break;
                case SweepKind::homodyne:
                    value = exact_homodyne_cf(ctx, req.u, arg, req.phi, t, req.channel, rho_in);
                    break;
            }
            row.push_back(value);
        }
        const std::vector<cplx> exact_logs = detail::tracked_log(row, sweep.arg_grid);
        double dev = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i)
            dev = std::max(dev, std::abs(exact_logs[i] - limit_logs[i]));
        sweep.exact.push_back(std::move(row));
        sweep.deviation.push_back(dev);
    }

    sweep.decay_exponent = detail::fit_loglog_slope(sweep.t_grid, sweep.deviation);
    return sweep;
}

}  // namespace qfim
