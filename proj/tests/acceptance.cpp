// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nmlqg/analysis.hpp"
#include "nmlqg/cli.hpp"
#include "nmlqg/simulate.hpp"
#include "test_support.hpp"

using namespace nmlqg;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string name;
    std::function<void()> body;
    double time_budget_s = 0.0;
};

int g_failures = 0;

void expect(bool condition, const std::string& detail) {
    if (!condition) {
        throw std::runtime_error(detail);
    }
}

void run_criterion(const Criterion& criterion) {
    const auto start = std::chrono::steady_clock::now();
    std::string failure;
    try {
        criterion.body();
    } catch (const std::exception& e) {
        failure = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (failure.empty() && criterion.time_budget_s > 0.0 && elapsed > criterion.time_budget_s) {
        failure = "exceeded time budget of " + std::to_string(criterion.time_budget_s) + " s";
    }
    if (failure.empty()) {
        std::printf("PASS  %-28s (%.2f s)\n", criterion.name.c_str(), elapsed);
    } else {
        ++g_failures;
        std::printf("FAIL  %-28s (%.2f s): %s\n", criterion.name.c_str(), elapsed,
                    failure.c_str());
    }
    std::fflush(stdout);
}

// ---------------------------------------------------------------------------

void criterion_spectrum_identity() {
    const double gamma_0 = 1.0;
    const double omega_0 = 10.0;
    double worst_rel = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double omega = omega_0 - 5.0 * gamma_0 + 10.0 * gamma_0 * i / 1000.0;
        const double closed_form = lorentzian_psd(gamma_0, omega_0, omega);
        const double from_model = model_output_psd(gamma_0, omega_0, omega);
        worst_rel = std::max(worst_rel, std::abs(from_model - closed_form) / closed_form);
    }
    expect(worst_rel <= 1e-10, "max relative error " + std::to_string(worst_rel));
    expect(std::abs(model_output_psd(gamma_0, omega_0, omega_0) - 1.0) <= 1e-12,
           "center value deviates from 1");
    expect(std::abs(model_output_psd(gamma_0, omega_0, omega_0 + gamma_0 / 2.0) - 0.5) <= 1e-12,
           "upper half-maximum deviates from 1/2");
    expect(std::abs(model_output_psd(gamma_0, omega_0, omega_0 - gamma_0 / 2.0) - 0.5) <= 1e-12,
           "lower half-maximum deviates from 1/2");
}

void criterion_broadband_limit() {
    double previous = std::numeric_limits<double>::infinity();
    for (double gamma_0 : {1.0, 10.0, 100.0, 1000.0}) {
        double worst = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double detuning = -1.0 + 2.0 * i / 400.0;
            worst = std::max(worst,
                             std::abs(model_output_psd(gamma_0, 10.0, 10.0 + detuning) - 1.0));
        }
        expect(worst < previous, "flattening is not monotone at gamma_0 = " +
                                     std::to_string(gamma_0));
        if (gamma_0 == 100.0) {
            expect(worst <= 4e-4, "gamma_0 = 100 worst deviation " + std::to_string(worst));
        }
        previous = worst;
    }
}

void criterion_solver_correctness() {
    const PhysicalParams params;
    const LinearModel plant = build_augmented_model(params);
    const LinearModel design = build_markovian_model(params);
    const NoiseIntensity noise = noise_intensity(plant, 0.0);

    // filter ARE in its literal correlated-noise form
    const FilterSynthesis filter = whitening_filter(plant, noise);
    const double v2_inv = 1.0 / noise.v2(0, 0);
    const Matrix shifted = plant.a - noise.v12 * v2_inv * plant.c;
    const Matrix filter_residual =
        shifted * filter.error_cov + filter.error_cov * shifted.transpose() -
        filter.error_cov * plant.c.transpose() * v2_inv * plant.c * filter.error_cov +
        noise.v1 - noise.v12 * v2_inv * noise.v12.transpose();
    expect(filter_residual.norm() <= 1e-9,
           "filter ARE residual " + std::to_string(filter_residual.norm()));

    // control ARE in its literal form
    const ControlSynthesis control = lqg_gain(plant, params);
    Matrix state_weight = Matrix::Zero(4, 4);
    state_weight.topLeftCorner(2, 2) = params.q1;
    const Matrix control_residual =
        control.riccati_solution * plant.a + plant.a.transpose() * control.riccati_solution -
        control.riccati_solution * plant.b * plant.b.transpose() * control.riccati_solution /
            params.q2 +
        state_weight;
    expect(control_residual.norm() <= 1e-9,
           "control ARE residual " + std::to_string(control_residual.norm()));

    // Lyapunov vs Kronecker oracle on both closed loops across the sweep range
    const FilterSynthesis filter_m = markovian_filter(design, noise_intensity(design, 0.0));
    const ControlSynthesis control_m = lqg_gain(design, params);
    for (double n : {0.0, 2.0, 5.0}) {
        const NoiseIntensity hot = noise_intensity(plant, n);
        for (int markovian = 0; markovian < 2; ++markovian) {
            const ClosedLoop loop =
                markovian ? assemble_closed_loop(plant, hot, filter_m, control_m)
                          : assemble_closed_loop(plant, hot, whitening_filter(plant, hot),
                                                 control);
            const Matrix gramian = loop.b_tilde * loop.m * loop.b_tilde.transpose();
            const Matrix direct = steady_state_covariance(loop);
            const Matrix reference = lyapunov_oracle(loop.a_tilde, gramian);
            const double gap = (direct - reference).cwiseAbs().maxCoeff();
            expect(gap < 1e-8, "Lyapunov/Kronecker gap " + std::to_string(gap) + " at N = " +
                                   std::to_string(n));
        }
    }
}

void criterion_separation_principle() {
    std::mt19937_64 rng(20240915);
    std::uniform_real_distribution<double> freq(1.0, 20.0);
    std::uniform_real_distribution<double> rate(0.2, 5.0);
    std::uniform_real_distribution<double> coupling(0.0, 4.0);
    std::uniform_real_distribution<double> occupancy(0.0, 5.0);
    std::uniform_real_distribution<double> weight(0.1, 2.0);
    std::uniform_real_distribution<double> effort(0.01, 1.0);

    for (int trial = 0; trial < 21; ++trial) {
        PhysicalParams params;  // trial 0 keeps the reference values
        if (trial > 0) {
            params.omega_s = freq(rng);
            params.omega_0 = freq(rng);
            params.gamma_0 = rate(rng);
            params.gamma_1 = rate(rng);
            params.kappa = coupling(rng);
            params.thermal_n = occupancy(rng);
            params.q1 = Eigen::Vector2d(weight(rng), weight(rng)).asDiagonal();
            params.q2 = effort(rng);
        }
        const LinearModel plant = build_augmented_model(params);
        const NoiseIntensity noise = noise_intensity(plant, params.thermal_n);
        const FilterSynthesis filter = whitening_filter(plant, noise);
        const ControlSynthesis control = lqg_gain(plant, params);
        const ClosedLoop loop = assemble_closed_loop(plant, noise, filter, control);

        Eigen::VectorXcd expected(8);
        expected << eigenvalues(plant.a - plant.b * control.gain),
                    eigenvalues(plant.a - filter.gain * plant.c);
        const double mismatch =
            test_support::spectra_mismatch(eigenvalues(loop.a_tilde), expected);
        expect(mismatch < 1e-8,
               "spectrum mismatch " + std::to_string(mismatch) + " in trial " +
                   std::to_string(trial));
    }
}

void criterion_thermal_sweep() {
    const PhysicalParams params;
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) {
        grid.push_back(0.5 * i);
    }
    const std::vector<SweepRow> rows = sweep_thermal(params, grid);

    for (const SweepRow& row : rows) {
        expect(row.j_whitening <= row.j_markovian + 1e-9,
               "dominance fails at N = " + std::to_string(row.thermal_n));
    }

    double sn = 0.0, sj = 0.0, snn = 0.0, snj = 0.0;
    const auto count = static_cast<double>(rows.size());
    for (const SweepRow& row : rows) {
        sn += row.thermal_n;
        sj += row.j_markovian;
        snn += row.thermal_n * row.thermal_n;
        snj += row.thermal_n * row.j_markovian;
    }
    const double slope = (count * snj - sn * sj) / (count * snn - sn * sn);
    const double intercept = (sj - slope * sn) / count;
    double fit_error_sq = 0.0, j_norm_sq = 0.0;
    for (const SweepRow& row : rows) {
        const double fitted = intercept + slope * row.thermal_n;
        fit_error_sq += (row.j_markovian - fitted) * (row.j_markovian - fitted);
        j_norm_sq += row.j_markovian * row.j_markovian;
    }
    const double rel_residual = std::sqrt(fit_error_sq / j_norm_sq);
    expect(rel_residual <= 1e-8,
           "Markovian linear-fit relative residual " + std::to_string(rel_residual));

    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double gap_prev = rows[i - 1].j_markovian - rows[i - 1].j_whitening;
        const double gap = rows[i].j_markovian - rows[i].j_whitening;
        expect(gap >= gap_prev - 1e-12,
               "gap shrinks between N = " + std::to_string(rows[i - 1].thermal_n) + " and N = " +
                   std::to_string(rows[i].thermal_n));
    }
}

void criterion_monte_carlo() {
    const PhysicalParams params;
    const LinearModel plant = build_augmented_model(params);
    const ControlSynthesis control = lqg_gain(plant, params);

    for (double n : {0.0, 2.0}) {
        const NoiseIntensity noise = noise_intensity(plant, n);
        const FilterSynthesis filter = whitening_filter(plant, noise);
        const ClosedLoop loop = assemble_closed_loop(plant, noise, filter, control);

        const Matrix analytic = steady_state_covariance(loop);
        const double j_analytic = photon_objective(analytic, loop, params.q1);

        SimConfig cfg;
        cfg.dt = 1e-3;
        cfg.horizon = 200.0;
        cfg.n_traj = 512;
        cfg.burn_in = 0.5;
        cfg.seed = 7041;
        const TrajectoryStats stats = simulate_closed_loop(loop, cfg);

        const Matrix principal_analytic = analytic.topLeftCorner(2, 2);
        const Matrix principal_sampled = stats.sample_cov.topLeftCorner(2, 2);
        const double cov_error =
            (principal_sampled - principal_analytic).norm() / principal_analytic.norm();
        expect(cov_error <= 0.05, "covariance error " + std::to_string(cov_error) + " at N = " +
                                      std::to_string(n));

        const double j_empirical = empirical_objective(stats, loop.e_tilde, params.q1);
        const double j_error = std::abs(j_empirical - j_analytic) / j_analytic;
        expect(j_error <= 0.05,
               "objective error " + std::to_string(j_error) + " at N = " + std::to_string(n));
    }
}

void criterion_determinism() {
    const fs::path dir = fs::temp_directory_path();
    auto slurp = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    auto invoke = [](const std::vector<std::string>& args) {
        std::vector<const char*> argv;
        argv.push_back("nmlqg");
        for (const std::string& a : args) {
            argv.push_back(a.c_str());
        }
        std::ostringstream out, err;
        return run(static_cast<int>(argv.size()), argv.data(), out, err);
    };

    const fs::path sweep_a = dir / "nmlqg_acc_sweep_a.csv";
    const fs::path sweep_b = dir / "nmlqg_acc_sweep_b.csv";
    expect(invoke({"sweep", "--steps", "11", "--out", sweep_a.string()}) == 0, "sweep run 1");
    expect(invoke({"sweep", "--steps", "11", "--out", sweep_b.string()}) == 0, "sweep run 2");
    expect(slurp(sweep_a) == slurp(sweep_b), "sweep outputs differ");
    expect(!slurp(sweep_a).empty(), "sweep output is empty");
    fs::remove(sweep_a);
    fs::remove(sweep_b);

    const fs::path sim_a = dir / "nmlqg_acc_sim_a.txt";
    const fs::path sim_b = dir / "nmlqg_acc_sim_b.txt";
    const std::vector<std::string> sim_args{"simulate",       "--dt",   "1e-3", "--horizon",
                                            "20",             "--trajectories", "16",
                                            "--seed",         "11",     "--thermal-n", "1"};
    auto with_out = [&](const fs::path& p) {
        std::vector<std::string> args = sim_args;
        args.push_back("--out");
        args.push_back(p.string());
        return args;
    };
    expect(invoke(with_out(sim_a)) == 0, "simulate run 1");
    expect(invoke(with_out(sim_b)) == 0, "simulate run 2");
    expect(slurp(sim_a) == slurp(sim_b), "simulate outputs differ");
    expect(!slurp(sim_a).empty(), "simulate output is empty");
    fs::remove(sim_a);
    fs::remove(sim_b);
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"1 spectrum identity", criterion_spectrum_identity, 1.0},
        {"2 broadband limit", criterion_broadband_limit, 1.0},
        {"3 solver correctness", criterion_solver_correctness, 1.0},
        {"4 separation principle", criterion_separation_principle, 5.0},
        {"5 thermal sweep (Fig. 3)", criterion_thermal_sweep, 5.0},
        {"6 Monte Carlo validation", criterion_monte_carlo, 120.0},
        {"7 determinism", criterion_determinism, 0.0},
    };
    for (const Criterion& criterion : criteria) {
        run_criterion(criterion);
    }
    if (g_failures == 0) {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    } else {
        std::printf("%d acceptance criteria FAILED\n", g_failures);
    }
    return g_failures == 0 ? 0 : 1;
}
