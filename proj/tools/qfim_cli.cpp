// Command-line front end: reads a JSON config describing a continuous-time
// quantum Markov model, computes Fisher-information reports, exact local
// asymptotic normality (LAN) sweeps, and Monte Carlo trajectory summaries,
// and writes machine-readable CSV/JSON files.
//
// Exit codes: 0 success, 2 irreducibility failure, 3 validation/config error,
// 4 numerical failure.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfim/asymptotics.hpp"
#include "qfim/fisher.hpp"
#include "qfim/model.hpp"
#include "qfim/parallel.hpp"
#include "qfim/stationary.hpp"
#include "qfim/trajectories.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace qfim;

namespace {

// Shortest round-trip decimal form; identical across runs by construction.
std::string num(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open output file " + path.string());
    f << content;
}

// --- Config ----------------------------------------------------------------

cplx parse_complex(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw ValidationError("complex numbers must be [re, im] pairs");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

Mat parse_matrix(const json& j, int dim) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ValidationError("matrix must be a row-major nested array of size dim x dim");
    Mat m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != dim)
            throw ValidationError("matrix row has wrong length");
        for (int c = 0; c < dim; ++c) m(r, c) = parse_complex(j[r][c]);
    }
    return m;
}

struct RunConfig {
    json raw;
    ParamModel model;
    std::string model_type;
    double theta0 = 0.0;
    int channel = 0;
    std::uint64_t seed = 0;
    fs::path output_dir = ".";
    StationaryOptions stat_opts;
    // Closed-form oracle for the built-in models, when available.
    std::function<double(double /*theta0*/, double /*phi*/)> qfi_oracle;
    std::function<double(double, double)> ih_oracle;
};

// Custom models are Taylor families in theta around 0:
//   H(theta) = H + theta dH + theta^2/2 ddH, and likewise per jump operator.
ParamModel parse_custom_model(const json& j) {
    ParamModel m;
    m.dim = j.at("dim").get<int>();
    if (m.dim < 2) throw ValidationError("custom model: dim must be >= 2");
    const Mat h0 = parse_matrix(j.at("hamiltonian"), m.dim);
    const Mat h1 = j.contains("d_hamiltonian") ? parse_matrix(j.at("d_hamiltonian"), m.dim)
                                               : Mat(Mat::Zero(m.dim, m.dim));
    const std::optional<Mat> h2 = j.contains("dd_hamiltonian")
                                      ? std::optional<Mat>(parse_matrix(j.at("dd_hamiltonian"), m.dim))
                                      : std::nullopt;

    const json& jl = j.at("jumps");
    if (!jl.is_array() || jl.empty())
        throw ValidationError("custom model: jumps must be a non-empty array of matrices");
    m.channels = static_cast<int>(jl.size());
    std::vector<Mat> l0, l1, l2;
    for (int i = 0; i < m.channels; ++i) {
        l0.push_back(parse_matrix(jl[i], m.dim));
        l1.push_back(j.contains("d_jumps") ? parse_matrix(j.at("d_jumps")[i], m.dim)
                                           : Mat(Mat::Zero(m.dim, m.dim)));
        if (j.contains("dd_jumps")) l2.push_back(parse_matrix(j.at("dd_jumps")[i], m.dim));
    }

    m.hamiltonian = [h0, h1, h2](double th) {
        Mat h = h0 + th * h1;
        if (h2) h += 0.5 * th * th * (*h2);
        return h;
    };
    m.d_hamiltonian = [h1, h2](double th) {
        Mat h = h1;
        if (h2) h += th * (*h2);
        return h;
    };
    std::vector<MatrixFn> jumps, d_jumps;
    for (int i = 0; i < m.channels; ++i) {
        const Mat a = l0[i], b = l1[i];
        const std::optional<Mat> c =
            j.contains("dd_jumps") ? std::optional<Mat>(l2[i]) : std::nullopt;
        jumps.emplace_back([a, b, c](double th) {
            Mat l = a + th * b;
            if (c) l += 0.5 * th * th * (*c);
            return l;
        });
        d_jumps.emplace_back([b, c](double th) {
            Mat l = b;
            if (c) l += th * (*c);
            return l;
        });
    }
    m.jumps = std::move(jumps);
    m.d_jumps = std::move(d_jumps);
    if (h2) {
        const Mat hh = *h2;
        m.dd_hamiltonian = [hh](double) { return hh; };
    }
    if (j.contains("dd_jumps")) {
        std::vector<MatrixFn> dd;
        for (const Mat& c : l2) dd.emplace_back([c](double) { return c; });
        m.dd_jumps = std::move(dd);
    }
    return m;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config file " + path.string());
    RunConfig cfg;
    try {
        cfg.raw = json::parse(f);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }

    const json& jm = cfg.raw.at("model");
    cfg.model_type = jm.at("type").get<std::string>();
    if (cfg.model_type == "two_level") {
        const cplx z = parse_complex(jm.at("z"));
        cfg.model = two_level_model(z);
        cfg.qfi_oracle = [z](double th, double) { return two_level_oracles(z, th, 0.0).F; };
        cfg.ih_oracle = [z](double th, double phi) { return two_level_oracles(z, th, phi).I_h; };
    } else if (cfg.model_type == "atom_maser") {
        const double n_ex = jm.at("n_ex").get<double>();
        const double nu = jm.at("nu").get<double>();
        const int cutoff = jm.at("cutoff").get<int>();
        cfg.model = atom_maser_model(n_ex, nu, cutoff);
        // The truncated stationary tail underflows the faithfulness check.
        cfg.stat_opts.rank_tol = -1.0;
        cfg.qfi_oracle = [n_ex, nu, cutoff](double, double phi) {
            return maser_oracles(n_ex, nu, phi, cutoff).F;
        };
    } else if (cfg.model_type == "custom") {
        cfg.model = parse_custom_model(jm);
    } else {
        throw ValidationError("unknown model type \"" + cfg.model_type + "\"");
    }

    cfg.theta0 = cfg.raw.value("theta0", 0.0);
    cfg.channel = cfg.raw.value("channel", 0);
    cfg.seed = cfg.raw.value("seed", std::uint64_t{0});
    cfg.output_dir = cfg.raw.value("output_dir", std::string("."));
    if (cfg.raw.contains("rank_tol")) cfg.stat_opts.rank_tol = cfg.raw["rank_tol"].get<double>();
    return cfg;
}

std::vector<double> grid_from(const json& j, const char* what) {
    if (!j.is_array() || j.empty())
        throw ValidationError(std::string(what) + " grid must be a non-empty array");
    std::vector<double> g;
    for (const auto& v : j) {
        g.push_back(v.get<double>());
        if (!std::isfinite(g.back()))
            throw ValidationError(std::string(what) + " grid contains a non-finite value");
    }
    return g;
}

// --- fisher ----------------------------------------------------------------

json report_to_json(const FisherReport& rep, double theta0) {
    json j;
    j["theta0"] = theta0;
    j["channel"] = rep.channel;
    j["F"] = rep.F;
    if (rep.X2_mean) j["X2_mean"] = *rep.X2_mean;
    if (rep.count) {
        j["counting"] = {{"rate", rep.count->rate},
                         {"mu_c", rep.count->mu_c},
                         {"V_c", rep.count->V_c},
                         {"I_c", rep.count->I_c},
                         {"degenerate_variance", rep.count->degenerate_variance}};
    }
    if (rep.homodyne) {
        j["homodyne"] = {{"phi", rep.homodyne->phi},
                         {"drift", rep.homodyne->drift},
                         {"mu_h", rep.homodyne->mu_h},
                         {"V_h", rep.homodyne->V_h},
                         {"I_h", rep.homodyne->I_h},
                         {"degenerate_variance", rep.homodyne->degenerate_variance}};
    }
    if (std::isfinite(rep.gap)) j["gap"] = rep.gap;
    j["min_eig"] = rep.min_eig;
    return j;
}

int cmd_fisher(const RunConfig& cfg, int jobs) {
    const json block = cfg.raw.value("fisher", json::object());
    const std::vector<double> theta_grid =
        block.contains("theta0_grid") ? grid_from(block["theta0_grid"], "theta0")
                                      : std::vector<double>{cfg.theta0};
    const std::vector<double> phi_grid = block.contains("phi_grid")
                                             ? grid_from(block["phi_grid"], "phi")
                                             : std::vector<double>{0.0};

    struct Cell {
        double theta0, phi;
        FisherReport rep;
    };
    std::vector<Cell> cells;
    for (double th : theta_grid)
        for (double phi : phi_grid) cells.push_back({th, phi, {}});

    std::vector<std::exception_ptr> errors(cells.size());
    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        try {
            cells[i].rep = assemble_report(cfg.model, cells[i].theta0, cells[i].phi,
                                           cfg.channel, cfg.stat_opts);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::string csv =
        "theta0,phi,channel,F,F_oracle,I_h_oracle,rate,mu_c,V_c,I_c,drift,mu_h,V_h,I_h,"
        "gap,min_eig\n";
    json jreports = json::array();
    for (const Cell& c : cells) {
        const FisherReport& r = c.rep;
        csv += num(c.theta0) + "," + num(c.phi) + "," + std::to_string(r.channel) + "," +
               num(r.F) + ",";
        csv += cfg.qfi_oracle ? num(cfg.qfi_oracle(c.theta0, c.phi)) : std::string();
        csv += ",";
        csv += cfg.ih_oracle ? num(cfg.ih_oracle(c.theta0, c.phi)) : std::string();
        csv += "," + num(r.count->rate) + "," + num(r.count->mu_c) + "," + num(r.count->V_c) +
               "," + num(r.count->I_c) + "," + num(r.homodyne->drift) + "," +
               num(r.homodyne->mu_h) + "," + num(r.homodyne->V_h) + "," + num(r.homodyne->I_h) +
               "," + (std::isfinite(r.gap) ? num(r.gap) : std::string()) + "," +
               num(r.min_eig) + "\n";
        json jr = report_to_json(r, c.theta0);
        if (cfg.qfi_oracle) jr["F_oracle"] = cfg.qfi_oracle(c.theta0, c.phi);
        if (cfg.ih_oracle) jr["I_h_oracle"] = cfg.ih_oracle(c.theta0, c.phi);
        jreports.push_back(std::move(jr));
    }

    json out;
    out["model_type"] = cfg.model_type;
    out["reports"] = std::move(jreports);
    write_file(cfg.output_dir / "fisher_sweep.csv", csv);
    write_file(cfg.output_dir / "fisher_report.json", out.dump(2) + "\n");
    return 0;
}

// --- lan -------------------------------------------------------------------

SweepKind kind_from_string(const std::string& s) {
    if (s == "overlap") return SweepKind::overlap;
    if (s == "counting") return SweepKind::counting;
    if (s == "homodyne") return SweepKind::homodyne;
    throw ValidationError("unknown LAN sweep kind \"" + s + "\"");
}

int cmd_lan(const RunConfig& cfg, int /*jobs*/) {
    const json block = cfg.raw.value("lan", json::object());
    std::vector<std::string> kinds;
    if (block.contains("kinds"))
        for (const auto& k : block["kinds"]) kinds.push_back(k.get<std::string>());
    else
        kinds = {"overlap", "counting", "homodyne"};

    const LanContext ctx = LanContext::make(cfg.model, cfg.theta0, cfg.stat_opts);
    json summary = json::array();
    for (const std::string& name : kinds) {
        LanSweepRequest req;
        req.kind = kind_from_string(name);
        req.u = block.value("u", 1.0);
        req.phi = block.value("phi", 0.0);
        req.channel = cfg.channel;
        req.t_grid = block.contains("t_grid") ? grid_from(block["t_grid"], "t")
                                              : std::vector<double>{100.0, 1000.0, 10000.0};
        req.arg_grid = block.contains("arg_grid")
                           ? grid_from(block["arg_grid"], "arg")
                           : std::vector<double>{-1.0, -0.5, 0.5, 1.0};
        const LanSweep sweep = lan_sweep(ctx, req);

        std::string csv = "kind,t,arg,re_exact,im_exact,re_limit,im_limit,deviation,"
                          "decay_exponent\n";
        for (std::size_t ti = 0; ti < sweep.t_grid.size(); ++ti)
            for (std::size_t ai = 0; ai < sweep.arg_grid.size(); ++ai) {
                const cplx e = sweep.exact[ti][ai];
                const cplx l = sweep.limit[ai];
                csv += csv_field(name) + "," + num(sweep.t_grid[ti]) + "," +
                       num(sweep.arg_grid[ai]) + "," + num(e.real()) + "," + num(e.imag()) +
                       "," + num(l.real()) + "," + num(l.imag()) + "," +
                       num(sweep.deviation[ti]) + "," + num(sweep.decay_exponent) + "\n";
            }
        write_file(cfg.output_dir / ("lan_" + name + ".csv"), csv);

        json js;
        js["kind"] = name;
        js["u"] = req.u;
        js["t_grid"] = sweep.t_grid;
        js["deviation"] = sweep.deviation;
        js["decay_exponent"] = sweep.decay_exponent;
        summary.push_back(std::move(js));
    }
    json out;
    out["model_type"] = cfg.model_type;
    out["theta0"] = cfg.theta0;
    out["sweeps"] = std::move(summary);
    write_file(cfg.output_dir / "lan_summary.json", out.dump(2) + "\n");
    return 0;
}

// --- simulate --------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, int jobs) {
    if (!cfg.raw.contains("simulate"))
        throw ValidationError("config needs a \"simulate\" block for this command");
    const json block = cfg.raw["simulate"];

    TrajectoryConfig tc;
    tc.t_final = block.value("t_final", 0.0);
    tc.dt = block.value("dt", 0.0);
    tc.n_traj = block.value("n_traj", 0);
    tc.seed = cfg.seed;
    tc.channel = cfg.channel;
    tc.phi = block.value("phi", 0.0);
    const std::string scheme = block.value("scheme", std::string("diffusive"));
    if (scheme == "jump")
        tc.scheme = Scheme::jump;
    else if (scheme == "diffusive")
        tc.scheme = Scheme::diffusive;
    else
        throw ValidationError("simulate.scheme must be \"jump\" or \"diffusive\"");
    const double u = block.value("u", 0.0);

    // Local parametrization: the data are generated at the true parameter
    // theta0 + u/sqrt(t) while centering constants and the theoretical
    // (mu, V) refer to theta0.
    const double theta_true = cfg.theta0 + u / std::sqrt(tc.t_final);
    const LanContext ctx = LanContext::make(cfg.model, cfg.theta0, cfg.stat_opts);
    const ModelPoint pt_true = evaluate(cfg.model, theta_true);

    double mu = 0.0, V = 0.0, centering = 0.0;
    if (tc.scheme == Scheme::jump) {
        const CountingCoefficients c = counting_coefficients(ctx.point, ctx.an, tc.channel);
        mu = c.mu_c;
        V = c.V_c;
        centering = c.rate;
    } else {
        const HomodyneCoefficients h = homodyne_coefficients(ctx.point, ctx.an, tc.phi, tc.channel);
        mu = h.mu_h;
        V = h.V_h;
        centering = h.drift;
    }

    const Mat rho0 = ctx.an.rho_ss;
    const auto records = run_ensemble(pt_true, tc, centering, rho0, jobs);

    json out;
    out["model_type"] = cfg.model_type;
    out["scheme"] = scheme;
    out["theta0"] = cfg.theta0;
    out["u"] = u;
    out["theta_true"] = theta_true;
    out["t_final"] = tc.t_final;
    out["dt"] = tc.dt;
    out["n_traj"] = tc.n_traj;
    out["seed"] = tc.seed;
    out["channel"] = tc.channel;
    if (tc.scheme == Scheme::diffusive) out["phi"] = tc.phi;
    out["theory"] = {{"mu", mu},
                     {"V", V},
                     {"information", std::abs(V) > 1e-12 ? mu * mu / V : 0.0},
                     {"centering", centering}};
    if (std::abs(mu) > 1e-10 && std::abs(V) > 1e-12)
        out["theory"]["inverse_information"] = V / (mu * mu);

    if (tc.n_traj >= 500) {
        const LanCheck chk = empirical_lan_check(records, mu, V, u, tc.t_final);
        out["empirical"] = {{"mean_z", chk.mean_z},
                            {"se_mean", chk.se_mean},
                            {"var_z", chk.var_z},
                            {"normality_stat", chk.normality_stat}};
    }
    if (std::abs(mu) > 1e-10) {
        const EstimatorResult est =
            plug_in_estimator(records, mu, cfg.theta0, theta_true, tc.t_final);
        double mean_hat = 0.0;
        for (double th : est.theta_hats) mean_hat += th;
        mean_hat /= static_cast<double>(est.theta_hats.size());
        out["estimator"] = {{"mse_times_t", est.mse_times_t}, {"theta_hat_mean", mean_hat}};
    } else {
        out["estimator"] = {{"warning", "degenerate_mean"},
                            {"detail", "|mu| <= 1e-10: plug-in estimator undefined"}};
    }
    write_file(cfg.output_dir / "trajectory_summary.json", out.dump(2) + "\n");

    if (block.value("dump_trajectories", false)) {
        std::string csv = "traj_id,n_counts_or_current,y_centered\n";
        for (std::size_t i = 0; i < records.size(); ++i) {
            const double raw = tc.scheme == Scheme::jump
                                   ? static_cast<double>(records[i].n_counts)
                                   : records[i].z_integrated;
            csv += std::to_string(i) + "," + num(raw) + "," + num(records[i].y_centered) + "\n";
        }
        write_file(cfg.output_dir / "trajectories.csv", csv);
    }
    return 0;
}

// --- figdata ---------------------------------------------------------------

// Homodyne information of the one-qubit model as a function of the quadrature
// angle and of theta0 at fixed coupling-to-splitting ratio.
void figdata_two_level(const RunConfig& cfg, const json& block, int jobs) {
    const double ratio = block.value("coupling_ratio", 0.66);
    const double theta0 = block.value("theta0", 1.0);
    const int n_phi = block.value("n_phi", 64);

    const cplx z(ratio * theta0, 0.0);
    const ParamModel model = two_level_model(z);

    std::vector<double> phis(n_phi);
    for (int i = 0; i < n_phi; ++i)
        phis[i] = std::numbers::pi * static_cast<double>(i) / n_phi;
    std::vector<FisherReport> phi_reps(phis.size());
    parallel_for(phis.size(), jobs, [&](std::size_t i) {
        phi_reps[i] = assemble_report(model, theta0, phis[i], 0, cfg.stat_opts);
    });
    std::string csv = "phi,F,I_h,I_h_oracle\n";
    for (std::size_t i = 0; i < phis.size(); ++i)
        csv += num(phis[i]) + "," + num(phi_reps[i].F) + "," + num(phi_reps[i].homodyne->I_h) +
               "," + num(two_level_oracles(z, theta0, phis[i]).I_h) + "\n";
    write_file(cfg.output_dir / "fig_quadrature_scan.csv", csv);

    std::vector<double> thetas;
    for (double th = 0.25; th <= 4.0 + 1e-9; th += 0.25) thetas.push_back(th);
    std::vector<FisherReport> th_reps(thetas.size());
    parallel_for(thetas.size(), jobs, [&](std::size_t i) {
        const ParamModel m = two_level_model(cplx(ratio * thetas[i], 0.0));
        th_reps[i] = assemble_report(m, thetas[i], 0.0, 0, cfg.stat_opts);
    });
    csv = "theta0,F,I_h,I_h_oracle\n";
    for (std::size_t i = 0; i < thetas.size(); ++i)
        csv += num(thetas[i]) + "," + num(th_reps[i].F) + "," + num(th_reps[i].homodyne->I_h) +
               "," + num(two_level_oracles(cplx(ratio * thetas[i], 0.0), thetas[i], 0.0).I_h) +
               "\n";
    write_file(cfg.output_dir / "fig_theta_scan.csv", csv);
}

// Total information and per-channel counting informations of the atom maser
// as functions of the accumulated Rabi angle.
void figdata_atom_maser(const RunConfig& cfg, const json& block, int jobs) {
    const double n_ex = block.value("n_ex", 16.0);
    const double nu = block.value("nu", 0.1);
    const int cutoff = block.value("cutoff", 60);
    std::vector<double> phis;
    if (block.contains("phi_grid"))
        phis = grid_from(block["phi_grid"], "phi");
    else
        for (double phi = 0.05; phi <= 1.5 + 1e-9; phi += 0.05) phis.push_back(phi);

    const ParamModel model = atom_maser_model(n_ex, nu, cutoff);
    StationaryOptions opts = cfg.stat_opts;
    opts.rank_tol = -1.0;

    struct Row {
        double F = 0.0;
        std::vector<double> I_c, rate;
    };
    std::vector<Row> rows(phis.size());
    parallel_for(phis.size(), jobs, [&](std::size_t i) {
        const ModelPoint pt = evaluate(model, phis[i]);
        const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt), opts);
        rows[i].F = qfi(pt, an).F;
        for (int ch = 0; ch < pt.channels(); ++ch) {
            const CountingCoefficients c = counting_coefficients(pt, an, ch);
            rows[i].I_c.push_back(c.degenerate_variance ? 0.0 : c.mu_c * c.mu_c / c.V_c);
            rows[i].rate.push_back(c.rate);
        }
    });

    const int n_ch = model.channels;
    std::string csv = "phi,F";
    for (int ch = 0; ch < n_ch; ++ch) csv += ",I_c_" + std::to_string(ch);
    for (int ch = 0; ch < n_ch; ++ch) csv += ",rate_" + std::to_string(ch);
    csv += "\n";
    for (std::size_t i = 0; i < phis.size(); ++i) {
        csv += num(phis[i]) + "," + num(rows[i].F);
        for (double v : rows[i].I_c) csv += "," + num(v);
        for (double v : rows[i].rate) csv += "," + num(v);
        csv += "\n";
    }
    write_file(cfg.output_dir / "fig_maser_scan.csv", csv);
}

int cmd_figdata(const RunConfig& cfg, int jobs) {
    const json block = cfg.raw.value("figdata", json::object());
    const std::string preset = block.value("preset", std::string());
    if (preset == "two_level_information")
        figdata_two_level(cfg, block, jobs);
    else if (preset == "atom_maser_information")
        figdata_atom_maser(cfg, block, jobs);
    else
        throw ValidationError("figdata.preset must be \"two_level_information\" or "
                              "\"atom_maser_information\"");
    return 0;
}

// --- validate --------------------------------------------------------------

int cmd_validate(const RunConfig& cfg) {
    const ModelPoint pt = evaluate(cfg.model, cfg.theta0);
    const StationaryAnalysis an = stationary_state(lindblad_schrodinger(pt), cfg.stat_opts);
    std::cout << "config valid: model " << cfg.model_type << ", dim " << pt.dim()
              << ", channels " << pt.channels() << ", min stationary eigenvalue "
              << an.min_eig;
    if (an.has_gap()) std::cout << ", spectral gap " << an.gap;
    std::cout << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fisher information and local asymptotic normality for "
                 "continuous-time quantum Markov models"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    int jobs = 1;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    app.add_option("--config", config_path, "Path to the JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--jobs", jobs, "Worker threads for grids and trajectories")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", seed_override, "Override the config seed");
    app.add_option("--out", out_override, "Override the config output directory");

    auto* sub_fisher = app.add_subcommand("fisher", "Fisher-information report over grids");
    auto* sub_lan = app.add_subcommand("lan", "Exact LAN convergence sweeps");
    auto* sub_simulate = app.add_subcommand("simulate", "Monte Carlo trajectory ensemble");
    auto* sub_figdata = app.add_subcommand("figdata", "Preset datasets behind the figures");
    auto* sub_validate = app.add_subcommand("validate", "Parse config and certify the model");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        if (out_override) cfg.output_dir = *out_override;
        fs::create_directories(cfg.output_dir);

        if (sub_validate->parsed()) return cmd_validate(cfg);
        if (sub_fisher->parsed()) return cmd_fisher(cfg, jobs);
        if (sub_lan->parsed()) return cmd_lan(cfg, jobs);
        if (sub_simulate->parsed()) return cmd_simulate(cfg, jobs);
        if (sub_figdata->parsed()) return cmd_figdata(cfg, jobs);
        return 3;
    } catch (const NotIrreducible& e) {
        std::cerr << "irreducibility failure: " << e.what() << "\n";
        return 2;
    } catch (const NotFullRank& e) {
        std::cerr << "irreducibility failure: " << e.what() << "\n";
        return 2;
    } catch (const NoStationaryState& e) {
        std::cerr << "irreducibility failure: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const ZeroCoupling& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const CutoffTooSmall& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const NonHermitianHamiltonian& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const BadChannel& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
