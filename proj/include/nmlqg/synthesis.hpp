#pragma once

#include "nmlqg/model.hpp"
#include "nmlqg/solvers.hpp"

namespace nmlqg {

// Steady-state Kalman filter for a design model: gain K and error covariance.
struct FilterSynthesis {
    Matrix gain;       // n x 1
    Matrix error_cov;  // n x n, symmetric PSD
    LinearModel model; // the model the filter was designed against
};

// State-feedback law u = -F x_hat and the Riccati solution behind it.
struct ControlSynthesis {
    Matrix gain;              // 1 x n
    Matrix riccati_solution;  // n x n, symmetric PSD
};

// Plant + estimator feedback interconnection driven by the joint noise w.
struct ClosedLoop {
    Matrix a_tilde;  // (n + nf) x (n + nf)
    Matrix b_tilde;  // (n + nf) x q
    Matrix e_tilde;  // 2 x (n + nf), selects the principal quadratures
    Matrix m;        // q x q input covariance
    Eigen::Index plant_dim = 0;
    Eigen::Index filter_dim = 0;
};

// Kalman filter on the 4-state augmented model, so the residual driving
// noise is white. The correlated-noise ARE is solved through the transposed
// CARE with cross weight V12.
FilterSynthesis whitening_filter(const LinearModel& model, const NoiseIntensity& noise);

// Baseline filter designed on the 2-state principal-only model.
FilterSynthesis markovian_filter(const LinearModel& model, const NoiseIntensity& noise);

// LQG state-feedback gain F = Q2^{-1} B^T P. On the 4-state model only the
// principal quadratures are penalized (state weight E^T Q1 E, E = [I2 0]);
// on the 2-state model the weight is Q1 itself.
ControlSynthesis lqg_gain(const LinearModel& model, const PhysicalParams& params);

// Block interconnection of the true 4-state plant with a filter/controller
// pair designed on either the 4-state or the 2-state model. Certifies that
// the result is Hurwitz.
ClosedLoop assemble_closed_loop(const LinearModel& plant, const NoiseIntensity& plant_noise,
                                const FilterSynthesis& filter,
                                const ControlSynthesis& controller);

} // namespace nmlqg
