#include "nmlqg/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "nmlqg/analysis.hpp"

namespace nmlqg {

namespace {

std::string fmt(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void print_matrix(std::ostream& os, const std::string& name, const Matrix& m) {
    os << name << " [" << m.rows() << "x" << m.cols() << "]\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        os << " ";
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            os << " " << fmt(m(r, c));
        }
        os << "\n";
    }
}

void print_spectrum(std::ostream& os, const std::string& name, const Matrix& a) {
    const Eigen::VectorXcd eigs = eigenvalues(a);
    os << name << "\n";
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        os << "  " << fmt(eigs(i).real()) << " " << fmt(eigs(i).imag()) << "i\n";
    }
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) {
        throw InvalidInputError("grid must contain at least one point");
    }
    if (!(hi >= lo)) {
        throw InvalidInputError("grid upper bound must be >= lower bound");
    }
    std::vector<double> grid(static_cast<std::size_t>(count));
    if (count == 1) {
        grid[0] = lo;
        return grid;
    }
    for (int i = 0; i < count; ++i) {
        grid[static_cast<std::size_t>(i)] =
            lo + static_cast<double>(i) * (hi - lo) / static_cast<double>(count - 1);
    }
    return grid;
}

// Resolves --out: either the provided stream or a freshly opened file.
class OutputTarget {
public:
    OutputTarget(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::out | std::ios::trunc);
            if (!file_) {
                throw InvalidInputError("cannot open output file: " + path);
            }
            stream_ = &file_;
        }
    }
    std::ostream& os() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

struct Synthesized {
    LinearModel plant;
    LinearModel design_2state;
    NoiseIntensity noise;
    FilterSynthesis filter_w;
    FilterSynthesis filter_m;
    ControlSynthesis control_w;
    ControlSynthesis control_m;
    ClosedLoop loop_w;
    ClosedLoop loop_m;
};

Synthesized synthesize_all(const PhysicalParams& params) {
    Synthesized s;
    s.plant = build_augmented_model(params);
    s.design_2state = build_markovian_model(params);
    s.noise = noise_intensity(s.plant, params.thermal_n);
    s.filter_w = whitening_filter(s.plant, s.noise);
    s.filter_m = markovian_filter(s.design_2state, noise_intensity(s.design_2state, 0.0));
    s.control_w = lqg_gain(s.plant, params);
    s.control_m = lqg_gain(s.design_2state, params);
    s.loop_w = assemble_closed_loop(s.plant, s.noise, s.filter_w, s.control_w);
    s.loop_m = assemble_closed_loop(s.plant, s.noise, s.filter_m, s.control_m);
    return s;
}

void cmd_model(const RunConfig& cfg, std::ostream& os) {
    const LinearModel aug = build_augmented_model(cfg.params);
    const LinearModel mar = build_markovian_model(cfg.params);
    const NoiseIntensity noise_aug = noise_intensity(aug, cfg.params.thermal_n);
    const NoiseIntensity noise_mar = noise_intensity(mar, cfg.params.thermal_n);

    os << "== augmented model (4 states, 6 noise channels) ==\n";
    print_matrix(os, "A", aug.a);
    print_matrix(os, "B", aug.b);
    print_matrix(os, "C", aug.c);
    print_matrix(os, "B_prime", aug.b_prime);
    print_matrix(os, "D", aug.d);
    print_matrix(os, "M", noise_aug.m);
    print_matrix(os, "V1", noise_aug.v1);
    print_matrix(os, "V12", noise_aug.v12);
    print_matrix(os, "V2", noise_aug.v2);

    os << "== Markovian model (2 states, 2 noise channels) ==\n";
    print_matrix(os, "A", mar.a);
    print_matrix(os, "B", mar.b);
    print_matrix(os, "C", mar.c);
    print_matrix(os, "B_prime", mar.b_prime);
    print_matrix(os, "D", mar.d);
    print_matrix(os, "M", noise_mar.m);
    print_matrix(os, "V1", noise_mar.v1);
    print_matrix(os, "V12", noise_mar.v12);
    print_matrix(os, "V2", noise_mar.v2);
}

void cmd_synthesize(const RunConfig& cfg, std::ostream& os) {
    const Synthesized s = synthesize_all(cfg.params);
    os << "== whitening controller ==\n";
    print_matrix(os, "K", s.filter_w.gain);
    print_matrix(os, "V_hat", s.filter_w.error_cov);
    print_matrix(os, "F", s.control_w.gain);
    print_matrix(os, "P_inf", s.control_w.riccati_solution);
    print_spectrum(os, "closed-loop eigenvalues", s.loop_w.a_tilde);

    os << "== Markovian controller ==\n";
    print_matrix(os, "K", s.filter_m.gain);
    print_matrix(os, "V_hat", s.filter_m.error_cov);
    print_matrix(os, "F", s.control_m.gain);
    print_matrix(os, "P_inf", s.control_m.riccati_solution);
    print_spectrum(os, "closed-loop eigenvalues", s.loop_m.a_tilde);
}

void cmd_analyze(const RunConfig& cfg, std::ostream& os) {
    const Synthesized s = synthesize_all(cfg.params);
    const double j_w = photon_objective(steady_state_covariance(s.loop_w), s.loop_w, cfg.params.q1);
    const double j_m = photon_objective(steady_state_covariance(s.loop_m), s.loop_m, cfg.params.q1);
    os << "thermal_n = " << fmt(cfg.params.thermal_n) << "\n";
    os << "j_whitening = " << fmt(j_w) << "\n";
    os << "j_markovian = " << fmt(j_m) << "\n";
}

void cmd_sweep(const RunConfig& cfg, std::ostream& os) {
    const std::vector<double> grid = linspace(cfg.n_min, cfg.n_max, cfg.n_steps);
    const std::vector<SweepRow> rows = sweep_thermal(cfg.params, grid);
    os << "thermal_n,j_whitening,j_markovian\n";
    for (const SweepRow& row : rows) {
        os << fmt(row.thermal_n) << "," << fmt(row.j_whitening) << ","
           << fmt(row.j_markovian) << "\n";
    }
}

void cmd_spectrum(const RunConfig& cfg, std::ostream& os) {
    const double lo = std::isnan(cfg.omega_min)
                          ? cfg.params.omega_0 - 5.0 * cfg.params.gamma_0
                          : cfg.omega_min;
    const double hi = std::isnan(cfg.omega_max)
                          ? cfg.params.omega_0 + 5.0 * cfg.params.gamma_0
                          : cfg.omega_max;
    const std::vector<double> grid = linspace(lo, hi, cfg.omega_points);
    os << "omega,psd_lorentzian,psd_model\n";
    for (double omega : grid) {
        os << fmt(omega) << ","
           << fmt(lorentzian_psd(cfg.params.gamma_0, cfg.params.omega_0, omega)) << ","
           << fmt(model_output_psd(cfg.params.gamma_0, cfg.params.omega_0, omega)) << "\n";
    }
}

void cmd_simulate(const RunConfig& cfg, std::ostream& os) {
    if (cfg.controller != "whitening" && cfg.controller != "markovian") {
        throw InvalidInputError("controller must be 'whitening' or 'markovian', got '" +
                                cfg.controller + "'");
    }
    const Synthesized s = synthesize_all(cfg.params);
    const ClosedLoop& loop = cfg.controller == "whitening" ? s.loop_w : s.loop_m;

    const Matrix p_tilde = steady_state_covariance(loop);
    const double j_analytic = photon_objective(p_tilde, loop, cfg.params.q1);

    const TrajectoryStats stats = simulate_closed_loop(loop, cfg.sim);
    const double j_empirical = empirical_objective(stats, loop.e_tilde, cfg.params.q1);

    const Matrix principal_analytic = p_tilde.topLeftCorner(2, 2);
    const Matrix principal_empirical = stats.sample_cov.topLeftCorner(2, 2);
    const double cov_error =
        (principal_empirical - principal_analytic).norm() / principal_analytic.norm();

    os << "controller = " << cfg.controller << "\n";
    os << "scheme = "
       << (cfg.sim.scheme == IntegrationScheme::euler_maruyama ? "euler" : "exact") << "\n";
    os << "thermal_n = " << fmt(cfg.params.thermal_n) << "\n";
    os << "j_analytic = " << fmt(j_analytic) << "\n";
    os << "j_empirical = " << fmt(j_empirical) << "\n";
    os << "principal_cov_rel_error = " << fmt(cov_error) << "\n";
    os << "effective_samples = " << stats.effective_samples << "\n";
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::vector<double> q1_diag{0.5, 0.5};

    CLI::App app{"LQG control synthesis and simulation for a cavity mode driven by "
                 "Lorentzian colored noise"};
    app.set_config("--config", "", "flat key=value configuration file (INI format)");
    app.option_defaults()->always_capture_default();

    app.add_option("--omega-s", cfg.params.omega_s, "principal mode angular frequency");
    app.add_option("--omega-0", cfg.params.omega_0, "ancillary mode angular frequency");
    app.add_option("--gamma-0", cfg.params.gamma_0, "ancillary damping rate");
    app.add_option("--gamma-1", cfg.params.gamma_1, "principal probe damping rate");
    app.add_option("--kappa", cfg.params.kappa, "principal-ancillary coupling strength");
    app.add_option("--thermal-n", cfg.params.thermal_n, "mean thermal photon number N");
    app.add_option("--q1", q1_diag, "diagonal of the 2x2 state cost weight")->expected(2);
    app.add_option("--q2", cfg.params.q2, "control cost weight");
    app.add_option("--omega-p", cfg.params.omega_p, "2-state filter model angular frequency");
    app.add_option("--out", cfg.out_path, "write results to this file instead of stdout");

    CLI::App* sub_model = app.add_subcommand("model", "print the state-space and noise matrices");
    CLI::App* sub_synth =
        app.add_subcommand("synthesize", "print filter gains, control gains and spectra");
    CLI::App* sub_analyze =
        app.add_subcommand("analyze", "print the steady-state photon number for both controllers");
    CLI::App* sub_sweep =
        app.add_subcommand("sweep", "write the thermal sweep (CSV: thermal_n,j_whitening,j_markovian)");
    CLI::App* sub_spectrum =
        app.add_subcommand("spectrum", "write the noise power spectral density (CSV)");
    CLI::App* sub_sim =
        app.add_subcommand("simulate", "Monte Carlo validation of the steady-state objective");

    sub_sweep->add_option("--n-min", cfg.n_min, "smallest thermal photon number");
    sub_sweep->add_option("--n-max", cfg.n_max, "largest thermal photon number");
    sub_sweep->add_option("--steps", cfg.n_steps, "number of grid points");

    sub_spectrum->add_option("--omega-min", cfg.omega_min, "lower edge of the frequency grid");
    sub_spectrum->add_option("--omega-max", cfg.omega_max, "upper edge of the frequency grid");
    sub_spectrum->add_option("--points", cfg.omega_points, "number of grid points");

    std::string scheme = "exact";
    sub_sim->add_option("--dt", cfg.sim.dt, "integrator step");
    sub_sim->add_option("--horizon", cfg.sim.horizon, "integration time per trajectory");
    sub_sim->add_option("--trajectories", cfg.sim.n_traj, "trajectory count");
    sub_sim->add_option("--burn-in", cfg.sim.burn_in, "fraction of the horizon discarded");
    sub_sim->add_option("--seed", cfg.sim.seed, "master RNG seed");
    sub_sim->add_option("--controller", cfg.controller, "whitening | markovian");
    sub_sim->add_option("--scheme", scheme, "integration scheme: exact | euler")
        ->check(CLI::IsMember({"exact", "euler"}));

    for (CLI::App* sub : {sub_model, sub_synth, sub_analyze, sub_sweep, sub_spectrum, sub_sim}) {
        sub->fallthrough();
    }
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    cfg.params.q1 = Eigen::Vector2d(q1_diag[0], q1_diag[1]).asDiagonal();
    cfg.sim.scheme =
        scheme == "euler" ? IntegrationScheme::euler_maruyama : IntegrationScheme::exact;

    try {
        cfg.params.validate();
        OutputTarget target(cfg.out_path, out);
        if (app.got_subcommand(sub_model)) {
            cmd_model(cfg, target.os());
        } else if (app.got_subcommand(sub_synth)) {
            cmd_synthesize(cfg, target.os());
        } else if (app.got_subcommand(sub_analyze)) {
            cmd_analyze(cfg, target.os());
        } else if (app.got_subcommand(sub_sweep)) {
            cmd_sweep(cfg, target.os());
        } else if (app.got_subcommand(sub_spectrum)) {
            cmd_spectrum(cfg, target.os());
        } else if (app.got_subcommand(sub_sim)) {
            cmd_simulate(cfg, target.os());
        }
    } catch (const InvalidInputError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run(int argc, const char* const* argv) {
    return run(argc, argv, std::cout, std::cerr);
}

} // namespace nmlqg
