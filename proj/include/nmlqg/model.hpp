#pragma once

#include <Eigen/Dense>

#include "nmlqg/errors.hpp"

namespace nmlqg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Physical parameters of the coupled principal/ancillary cavity pair and the
// cost weights. All rates and frequencies are dimensionless, expressed in one
// common unit; only their ratios matter.
struct PhysicalParams {
    double omega_s = 10.0;   // principal mode angular frequency
    double omega_0 = 10.0;   // ancillary mode angular frequency
    double gamma_0 = 1.0;    // ancillary damping rate
    double gamma_1 = 1.0;    // principal probe damping rate
    double kappa = 2.0;      // principal-ancillary coupling strength
    double thermal_n = 0.0;  // mean thermal photon number N of the noise drive
    Eigen::Matrix2d q1 = 0.5 * Eigen::Matrix2d::Identity();  // state cost weight
    double q2 = 0.05;        // control cost weight
    Eigen::Matrix2d q3 = 0.5 * Eigen::Matrix2d::Identity();  // terminal weight; unused in steady state
    double omega_p = 10.0;   // angular frequency of the 2-state filter design model

    // Throws InvalidInputError if any invariant is violated.
    void validate() const;
};

// Real state-space model x' = A x + B u + B' w, y = C x + D w.
struct LinearModel {
    Matrix a;        // n x n drift
    Matrix b;        // n x 1 control input
    Matrix c;        // 1 x n measurement
    Matrix b_prime;  // n x q noise input
    Matrix d;        // 1 x q measurement noise
    Eigen::Index n = 0;  // state dimension
    Eigen::Index q = 0;  // noise channel count
};

// Input covariance M of the joint noise w(t) and the intensity blocks of
// col[w1, w2] = col[B' w, D w].
struct NoiseIntensity {
    Matrix m;    // q x q, diagonal
    Matrix v1;   // n x n process-noise intensity
    Matrix v12;  // n x 1 process/measurement cross intensity
    Matrix v2;   // 1 x 1 measurement-noise intensity
};

// 4-state plant: principal quadratures [q_s, p_s] coupled to the ancillary
// quadratures [q_0, p_0], driven by the probe, a vacuum channel and a thermal
// channel (noise ordering [v_p, v_q, nu_p, nu_q, mu_p, mu_q]).
LinearModel build_augmented_model(const PhysicalParams& params);

// 2-state design model that sees only the probed principal mode.
LinearModel build_markovian_model(const PhysicalParams& params);

// M plus the V blocks for the given model. The thermal channels carry
// intensity 1/2 + N each; vacuum channels carry identity intensity.
NoiseIntensity noise_intensity(const LinearModel& model, double thermal_n);

// Closed-form Lorentzian line shape (gamma_0^2/4) / (gamma_0^2/4 + (omega-omega_0)^2).
double lorentzian_psd(double gamma_0, double omega_0, double omega);

// Same quantity obtained from the one-mode ancillary transfer function driven
// by unit-intensity white noise; agrees with lorentzian_psd at every omega.
double model_output_psd(double gamma_0, double omega_0, double omega);

} // namespace nmlqg
