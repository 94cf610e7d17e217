#include "nmlqg/analysis.hpp"

#include <string>

namespace nmlqg {

Matrix steady_state_covariance(const ClosedLoop& cl) {
    const Matrix gramian =
        0.5 * (cl.b_tilde * cl.m * cl.b_tilde.transpose() +
               (cl.b_tilde * cl.m * cl.b_tilde.transpose()).transpose());
    return solve_lyapunov(cl.a_tilde, gramian);
}

double photon_objective(const Matrix& p_tilde, const ClosedLoop& cl,
                        const Eigen::Matrix2d& q1) {
    if (p_tilde.rows() != cl.a_tilde.rows() || p_tilde.cols() != cl.a_tilde.cols()) {
        throw InvalidInputError("photon_objective: covariance does not match the closed loop");
    }
    if (cl.e_tilde.rows() != 2 || cl.e_tilde.cols() != p_tilde.cols()) {
        throw InvalidInputError("photon_objective: selector does not match the closed loop");
    }
    return (p_tilde * cl.e_tilde.transpose() * q1 * cl.e_tilde).trace();
}

std::vector<SweepRow> sweep_thermal(const PhysicalParams& params,
                                    std::span<const double> n_grid) {
    params.validate();
    if (n_grid.empty()) {
        throw InvalidInputError("sweep_thermal: thermal grid must be nonempty");
    }
    for (double n : n_grid) {
        if (!(n >= 0.0)) {
            throw InvalidInputError("sweep_thermal: thermal_n must be >= 0, got " +
                                    std::to_string(n));
        }
    }

    const LinearModel plant = build_augmented_model(params);
    const LinearModel design_2state = build_markovian_model(params);

    // Everything except the whitening filter is independent of N.
    const ControlSynthesis control_aug = lqg_gain(plant, params);
    const ControlSynthesis control_2state = lqg_gain(design_2state, params);
    const NoiseIntensity design_noise = noise_intensity(design_2state, 0.0);
    const FilterSynthesis filter_2state = markovian_filter(design_2state, design_noise);

    std::vector<SweepRow> rows;
    rows.reserve(n_grid.size());
    for (double n : n_grid) {
        try {
            const NoiseIntensity noise = noise_intensity(plant, n);
            const FilterSynthesis filter_aug = whitening_filter(plant, noise);

            const ClosedLoop loop_w = assemble_closed_loop(plant, noise, filter_aug, control_aug);
            const ClosedLoop loop_m =
                assemble_closed_loop(plant, noise, filter_2state, control_2state);

            SweepRow row;
            row.thermal_n = n;
            row.j_whitening = photon_objective(steady_state_covariance(loop_w), loop_w, params.q1);
            row.j_markovian = photon_objective(steady_state_covariance(loop_m), loop_m, params.q1);
            rows.push_back(row);
        } catch (const std::runtime_error& e) {
            throw SynthesisInfeasibleError("thermal sweep failed at N = " + std::to_string(n) +
                                           ": " + e.what());
        }
    }
    return rows;
}

} // namespace nmlqg
