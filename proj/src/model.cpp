#include "nmlqg/model.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace nmlqg {

namespace {

bool symmetric_positive_definite(const Eigen::Matrix2d& m) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    return es.eigenvalues().minCoeff() > 0.0;
}

} // namespace

void PhysicalParams::validate() const {
    if (!(gamma_0 > 0.0)) {
        throw InvalidInputError("gamma_0 must be > 0, got " + std::to_string(gamma_0));
    }
    if (!(gamma_1 > 0.0)) {
        throw InvalidInputError("gamma_1 must be > 0, got " + std::to_string(gamma_1));
    }
    if (!(kappa >= 0.0)) {
        throw InvalidInputError("kappa must be >= 0, got " + std::to_string(kappa));
    }
    if (!(thermal_n >= 0.0)) {
        throw InvalidInputError("thermal_n must be >= 0, got " + std::to_string(thermal_n));
    }
    if (!symmetric_positive_definite(q1)) {
        throw InvalidInputError("q1 must be symmetric positive definite");
    }
    if (!(q2 > 0.0)) {
        throw InvalidInputError("q2 must be > 0, got " + std::to_string(q2));
    }
    if (!symmetric_positive_definite(q3)) {
        throw InvalidInputError("q3 must be symmetric positive definite");
    }
}

LinearModel build_augmented_model(const PhysicalParams& params) {
    params.validate();
    const double g0 = params.gamma_0;
    const double g1 = params.gamma_1;
    const double ws = params.omega_s;
    const double w0 = params.omega_0;
    const double coupling = std::sqrt(params.kappa * g0) / 2.0;

    LinearModel model;
    model.n = 4;
    model.q = 6;

    model.a.setZero(4, 4);
    model.a << -g1 / 2.0, ws, coupling, 0.0,
               -ws, -g1 / 2.0, 0.0, coupling,
               -coupling, 0.0, -g0 / 2.0, w0,
               0.0, -coupling, -w0, -g0 / 2.0;

    model.b.setZero(4, 1);
    model.b(1, 0) = 1.0;

    model.c.setZero(1, 4);
    model.c(0, 0) = std::sqrt(g1);

    // B' = [B'1 | B'2]: probe and vacuum channels, then the thermal channels
    // that re-enter through the ancillary coupling.
    model.b_prime.setZero(4, 6);
    model.b_prime(0, 0) = -std::sqrt(g1);
    model.b_prime(1, 1) = -std::sqrt(g1);
    model.b_prime(2, 2) = -std::sqrt(g0);
    model.b_prime(3, 3) = -std::sqrt(g0);
    model.b_prime(2, 4) = -std::sqrt(g0);
    model.b_prime(3, 5) = -std::sqrt(g0);

    model.d.setZero(1, 6);
    model.d(0, 0) = 1.0;
    return model;
}

LinearModel build_markovian_model(const PhysicalParams& params) {
    params.validate();
    const double g1 = params.gamma_1;
    const double wp = params.omega_p;

    LinearModel model;
    model.n = 2;
    model.q = 2;

    model.a.setZero(2, 2);
    model.a << -g1 / 2.0, wp,
               -wp, -g1 / 2.0;

    model.b.setZero(2, 1);
    model.b(1, 0) = 1.0;

    model.c.setZero(1, 2);
    model.c(0, 0) = std::sqrt(g1);

    model.b_prime = -std::sqrt(g1) * Matrix::Identity(2, 2);

    model.d.setZero(1, 2);
    model.d(0, 0) = 1.0;
    return model;
}

NoiseIntensity noise_intensity(const LinearModel& model, double thermal_n) {
    if (!(thermal_n >= 0.0)) {
        throw InvalidInputError("thermal_n must be >= 0, got " + std::to_string(thermal_n));
    }
    if (model.b_prime.rows() != model.n || model.b_prime.cols() != model.q ||
        model.d.rows() != 1 || model.d.cols() != model.q) {
        throw InvalidInputError("noise_intensity: model dimensions are inconsistent");
    }
    if (model.q != 6 && model.q != 2) {
        throw InvalidInputError("noise_intensity: expected 6 noise channels (augmented) or 2 "
                                "(Markovian), got " + std::to_string(model.q));
    }

    NoiseIntensity noise;
    noise.m = Matrix::Identity(model.q, model.q);
    if (model.q == 6) {
        // Last two channels are the thermal drive with covariance 1/2 + N each.
        noise.m(4, 4) = 0.5 + thermal_n;
        noise.m(5, 5) = 0.5 + thermal_n;
    }

    // V = [B'; D] M [B'; D]^T; with M block-diagonal this reproduces the
    // split form V1 = B'1 B'1^T + B'2 M2 B'2^T, V12 = B'1 D1^T, V2 = D1 D1^T.
    noise.v1 = model.b_prime * noise.m * model.b_prime.transpose();
    noise.v12 = model.b_prime * noise.m * model.d.transpose();
    noise.v2 = model.d * noise.m * model.d.transpose();
    return noise;
}

double lorentzian_psd(double gamma_0, double omega_0, double omega) {
    if (!(gamma_0 > 0.0)) {
        throw InvalidInputError("lorentzian_psd: gamma_0 must be > 0");
    }
    const double half_width_sq = gamma_0 * gamma_0 / 4.0;
    const double detuning = omega - omega_0;
    return half_width_sq / (half_width_sq + detuning * detuning);
}

double model_output_psd(double gamma_0, double omega_0, double omega) {
    if (!(gamma_0 > 0.0)) {
        throw InvalidInputError("model_output_psd: gamma_0 must be > 0");
    }
    // One-mode cavity a0' = -(gamma_0/2 + i omega_0) a0 - sqrt(gamma_0) b with
    // fictitious output c = -(sqrt(gamma_0)/2) a0: evaluate the transfer
    // function magnitude at detuning omega - omega_0.
    const std::complex<double> denom(gamma_0 / 2.0, omega - omega_0);
    const std::complex<double> transfer =
        (-std::sqrt(gamma_0) / 2.0) * (1.0 / denom) * (-std::sqrt(gamma_0));
    return std::norm(transfer);
}

} // namespace nmlqg
