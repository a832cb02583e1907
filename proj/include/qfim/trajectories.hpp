#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qfim/errors.hpp"
#include "qfim/linalg.hpp"
#include "qfim/model.hpp"
#include "qfim/parallel.hpp"

namespace qfim {

enum class Scheme { jump, diffusive };

struct TrajectoryConfig {
    double t_final = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    int n_traj = 0;
    Scheme scheme = Scheme::jump;
    double phi = 0.0;  // diffusive only
    int channel = 0;

    void validate(const ModelPoint& pt) const {
        if (t_final <= 0.0 || dt <= 0.0 || dt > t_final)
            throw ValidationError("trajectory config: need 0 < dt <= t_final");
        if (n_traj <= 0) throw ValidationError("trajectory config: n_traj must be positive");
        if (channel < 0 || channel >= pt.channels())
            throw BadChannel("trajectory config: channel out of range");
        double max_rate = 0.0;
        for (const Mat& L : pt.L)
            max_rate = std::max(max_rate, Mat(L.adjoint() * L).cwiseAbs().maxCoeff());
        if (dt * max_rate > 0.05)
            throw StepTooLarge("trajectory config: dt * max ||L^dag L|| = " +
                               std::to_string(dt * max_rate) + " exceeds 0.05");
    }
};

struct TrajectoryRecord {
    long n_counts = 0;        // jump scheme
    double z_integrated = 0;  // diffusive scheme
    double y_centered = 0;    // raw statistic minus t * centering constant at theta0
    Mat final_state;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Independent per-trajectory stream keyed by (seed, index): parallel and
// serial runs produce bitwise-identical records.
inline std::mt19937_64 trajectory_engine(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(detail::splitmix64(seed ^ detail::splitmix64(index + 1)));
}

// Quantum-jump unravelling with counting detection in the monitored channel.
// The conditional state is a density matrix; unmonitored channels are traced
// out deterministically each step.
inline TrajectoryRecord simulate_counting(const ModelPoint& pt, const TrajectoryConfig& cfg,
                                          double centering_rate, std::mt19937_64& rng,
                                          const Mat& rho0) {
    const int d = pt.dim();
    const Mat& Lc = pt.L[cfg.channel];
    const Mat LdLc = Lc.adjoint() * Lc;

    // Deterministic no-click step in Kraus form,
    //   rho' = (M0 rho M0^dag + sum_{j != c} L_j rho L_j^dag dt) / trace,
    //   M0 = 1 - (iH + 1/2 sum_j L_j^dag L_j) dt,
    // which keeps the conditional state positive so the per-step jump
    // probability stays bounded by dt * ||L_c^dag L_c||.
    Mat k = kI * pt.H;
    for (const Mat& L : pt.L) k += 0.5 * L.adjoint() * L;
    const Mat m0 = Mat::Identity(d, d) - cfg.dt * k;

    const long n_steps = std::lround(cfg.t_final / cfg.dt);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Mat rho = rho0;
    long counts = 0;
    for (long step = 0; step < n_steps; ++step) {
        const double p_jump = cfg.dt * trace_against(rho, LdLc).real();
        if (p_jump > 0.1)
            throw StepTooLarge("simulate_counting: per-step jump probability " +
                               std::to_string(p_jump));
        Mat next;
        if (unif(rng) < p_jump) {
            next = Lc * rho * Lc.adjoint();
            ++counts;
        } else {
            next = m0 * rho * m0.adjoint();
            for (int j = 0; j < pt.channels(); ++j)
                if (j != cfg.channel) next += cfg.dt * pt.L[j] * rho * pt.L[j].adjoint();
        }
        const double tr = next.trace().real();
        if (!(tr > 1e-12) || !std::isfinite(tr))
            throw StateBlowup("simulate_counting: state norm collapsed or diverged");
        rho = next / tr;
    }

    TrajectoryRecord rec;
    rec.n_counts = counts;
    rec.y_centered = static_cast<double>(counts) - cfg.t_final * centering_rate;
    rec.final_state = herm_re(rho);
    (void)d;
    return rec;
}

// Diffusive unravelling of homodyne detection at quadrature angle phi;
// unmonitored channels evolve under the averaged dissipator.  The state is
// advanced with a Kraus-form step
//   rho' = (M rho M^dag + sum_{j != c} L_j rho L_j^dag dt) / trace,
//   M = 1 - (iH + 1/2 sum_j L_j^dag L_j) dt + e^{i phi} L_c dY,
// which preserves positivity and stays stable where a plain Euler-Maruyama
// update of the nonlinear equation blows up.
inline TrajectoryRecord simulate_homodyne(const ModelPoint& pt, const TrajectoryConfig& cfg,
                                          double centering_drift, std::mt19937_64& rng,
                                          const Mat& rho0) {
    const int d = pt.dim();
    const Mat& Lc = pt.L[cfg.channel];
    const cplx ep = std::exp(kI * cfg.phi);
    const cplx em = std::conj(ep);
    const Mat quad = em * Lc.adjoint() + ep * Lc;

    Mat k = kI * pt.H;
    for (const Mat& L : pt.L) k += 0.5 * L.adjoint() * L;
    const Mat m0 = Mat::Identity(d, d) - cfg.dt * k;

    const long n_steps = std::lround(cfg.t_final / cfg.dt);
    const double sqrt_dt = std::sqrt(cfg.dt);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Mat rho = rho0;
    double z = 0.0;
    for (long step = 0; step < n_steps; ++step) {
        const double drift = trace_against(rho, quad).real();
        const double dy = drift * cfg.dt + sqrt_dt * gauss(rng);
        z += dy;

        const Mat m = m0 + (ep * dy) * Lc;
        Mat next = m * rho * m.adjoint();
        for (int j = 0; j < pt.channels(); ++j)
            if (j != cfg.channel) next += cfg.dt * pt.L[j] * rho * pt.L[j].adjoint();

        const double tr = next.trace().real();
        if (!(tr > 1e-12) || !std::isfinite(tr))
            throw StateBlowup("simulate_homodyne: state norm collapsed or diverged");
        rho = next / tr;
    }

    TrajectoryRecord rec;
    rec.z_integrated = z;
    rec.y_centered = z - cfg.t_final * centering_drift;
    rec.final_state = herm_re(rho);
    return rec;
}

// Runs cfg.n_traj independent trajectories; records are merged by index so
// the output does not depend on the worker count.
inline std::vector<TrajectoryRecord> run_ensemble(const ModelPoint& pt,
                                                  const TrajectoryConfig& cfg, double centering,
                                                  const Mat& rho0, int jobs = 1) {
    cfg.validate(pt);
    std::vector<TrajectoryRecord> records(cfg.n_traj);
    parallel_for(static_cast<std::size_t>(cfg.n_traj), jobs, [&](std::size_t i) {
        std::mt19937_64 rng = trajectory_engine(cfg.seed, i);
        records[i] = cfg.scheme == Scheme::jump
                         ? simulate_counting(pt, cfg, centering, rng, rho0)
                         : simulate_homodyne(pt, cfg, centering, rng, rho0);
    });
    return records;
}

struct EstimatorResult {
    std::vector<double> theta_hats;
    double mse_times_t = 0.0;
};

// Plug-in estimator theta_hat = theta0 + Y_t / (t mu), evaluated against the
// true parameter value.
inline EstimatorResult plug_in_estimator(const std::vector<TrajectoryRecord>& records, double mu,
                                         double theta0, double theta_true, double t) {
    if (std::abs(mu) <= 1e-10)
        throw DegenerateMean("plug_in_estimator: |mu| <= 1e-10, estimator undefined");
    EstimatorResult res;
    double sq = 0.0;
    for (const auto& rec : records) {
        const double th = theta0 + rec.y_centered / (t * mu);
        res.theta_hats.push_back(th);
        sq += (th - theta_true) * (th - theta_true);
    }
    res.mse_times_t = t * sq / static_cast<double>(records.size());
    return res;
}

struct LanCheck {
    double mean_z = 0.0;   // mean of y_centered / sqrt(t)
    double var_z = 0.0;
    double se_mean = 0.0;  // standard error of mean_z
    double normality_stat = 0.0;
};

// Empirical check of Y_t/sqrt(t) -> N(mu u, V): moments plus an empirical
// characteristic-function distance to the limit Gaussian over a fixed grid.
inline LanCheck empirical_lan_check(const std::vector<TrajectoryRecord>& records, double mu,
                                    double V, double u, double t) {
    if (records.size() < 500)
        throw ValidationError("empirical_lan_check requires at least 500 trajectories");
    const double n = static_cast<double>(records.size());
    const double rt = std::sqrt(t);

    LanCheck chk;
    for (const auto& rec : records) chk.mean_z += rec.y_centered / rt;
    chk.mean_z /= n;
    for (const auto& rec : records) {
        const double dz = rec.y_centered / rt - chk.mean_z;
        chk.var_z += dz * dz;
    }
    chk.var_z /= (n - 1.0);
    chk.se_mean = std::sqrt(chk.var_z / n);

    for (double s = -2.0; s <= 2.0001; s += 0.5) {
        if (s == 0.0) continue;
        cplx emp{0.0, 0.0};
        for (const auto& rec : records) emp += std::exp(kI * s * rec.y_centered / rt);
        emp /= n;
        const cplx lim = std::exp(cplx(-0.5 * s * s * V, s * mu * u));
        chk.normality_stat = std::max(chk.normality_stat, std::abs(emp - lim));
    }
    return chk;
}

}  // namespace qfim
