#pragma once

#include <span>
#include <vector>

#include "nmlqg/synthesis.hpp"

namespace nmlqg {

// One point of the thermal sweep: steady-state photon number of the principal
// mode under both controllers.
struct SweepRow {
    double thermal_n = 0.0;
    double j_whitening = 0.0;
    double j_markovian = 0.0;
};

// Stationary covariance P of the closed loop, from the Lyapunov equation
// A~ P + P A~^T + B~ M B~^T = 0.
Matrix steady_state_covariance(const ClosedLoop& cl);

// J = tr(P E~^T Q1 E~); with Q1 = diag[1/2, 1/2] this is the steady-state
// photon number of the principal mode.
double photon_objective(const Matrix& p_tilde, const ClosedLoop& cl,
                        const Eigen::Matrix2d& q1);

// The thermal-noise experiment: for each N on the grid, re-synthesize the
// whitening filter (its ARE depends on N), reuse the N-independent Markovian
// filter and control gains, and record both objectives.
std::vector<SweepRow> sweep_thermal(const PhysicalParams& params,
                                    std::span<const double> n_grid);

} // namespace nmlqg
