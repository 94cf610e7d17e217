#include "nmlqg/synthesis.hpp"

#include <string>

namespace nmlqg {

namespace {

void check_noise_dims(const LinearModel& model, const NoiseIntensity& noise,
                      const std::string& context) {
    if (noise.v1.rows() != model.n || noise.v1.cols() != model.n ||
        noise.v12.rows() != model.n || noise.v12.cols() != 1 ||
        noise.v2.rows() != 1 || noise.v2.cols() != 1 ||
        noise.m.rows() != model.q || noise.m.cols() != model.q) {
        throw InvalidInputError(context + ": noise blocks do not match the model dimensions");
    }
}

FilterSynthesis kalman_synthesis(const LinearModel& model, const NoiseIntensity& noise,
                                 const std::string& context) {
    check_noise_dims(model, noise, context);

    // Filter ARE as a CARE on the transposed data, cross weight V12:
    //   (A - V12 V2^-1 C) V + V (.)^T - V C^T V2^-1 C V + V1 - V12 V2^-1 V12^T = 0.
    CareProblem dual;
    dual.a = model.a.transpose();
    dual.b = model.c.transpose();
    dual.q = noise.v1;
    dual.r = noise.v2;
    dual.s = noise.v12;

    SolveReport report;
    try {
        report = solve_care(dual);
    } catch (const SynthesisInfeasibleError& e) {
        throw SynthesisInfeasibleError(context + ": " + e.what());
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(context + ": " + e.what());
    }

    FilterSynthesis filter;
    filter.error_cov = report.solution;
    filter.gain = (filter.error_cov * model.c.transpose() + noise.v12) *
                  (1.0 / noise.v2(0, 0));
    filter.model = model;
    // closed_loop_abscissa of the dual problem is that of (A - K C)^T.
    if (report.closed_loop_abscissa >= 0.0) {
        throw SynthesisInfeasibleError(context + ": A - K C is not Hurwitz");
    }
    return filter;
}

} // namespace

FilterSynthesis whitening_filter(const LinearModel& model, const NoiseIntensity& noise) {
    if (model.n != 4 || model.q != 6) {
        throw InvalidInputError("whitening_filter expects the 4-state augmented model");
    }
    return kalman_synthesis(model, noise, "filter Riccati equation (whitening)");
}

FilterSynthesis markovian_filter(const LinearModel& model, const NoiseIntensity& noise) {
    if (model.n != 2 || model.q != 2) {
        throw InvalidInputError("markovian_filter expects the 2-state Markovian model");
    }
    return kalman_synthesis(model, noise, "filter Riccati equation (Markovian)");
}

ControlSynthesis lqg_gain(const LinearModel& model, const PhysicalParams& params) {
    params.validate();
    if (model.n != 4 && model.n != 2) {
        throw InvalidInputError("lqg_gain expects a 4-state or 2-state model");
    }

    CareProblem control;
    control.a = model.a;
    control.b = model.b;
    control.r = Matrix::Constant(1, 1, params.q2);
    if (model.n == 4) {
        // E = [I2 0]: only the principal quadratures enter the cost.
        control.q = Matrix::Zero(4, 4);
        control.q.topLeftCorner(2, 2) = params.q1;
    } else {
        control.q = params.q1;
    }

    SolveReport report;
    try {
        report = solve_care(control);
    } catch (const SynthesisInfeasibleError& e) {
        throw SynthesisInfeasibleError(std::string("control Riccati equation: ") + e.what());
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(std::string("control Riccati equation: ") + e.what());
    }

    ControlSynthesis control_law;
    control_law.riccati_solution = report.solution;
    control_law.gain = model.b.transpose() * report.solution / params.q2;
    return control_law;
}

ClosedLoop assemble_closed_loop(const LinearModel& plant, const NoiseIntensity& plant_noise,
                                const FilterSynthesis& filter,
                                const ControlSynthesis& controller) {
    if (plant.n != 4 || plant.q != 6) {
        throw InvalidInputError("assemble_closed_loop: plant must be the 4-state augmented model");
    }
    check_noise_dims(plant, plant_noise, "assemble_closed_loop");
    const Eigen::Index n = plant.n;
    const Eigen::Index nf = filter.model.n;
    if (filter.gain.rows() != nf || filter.gain.cols() != 1 ||
        filter.model.a.rows() != nf || filter.model.c.cols() != nf ||
        filter.model.b.rows() != nf) {
        throw InvalidInputError("assemble_closed_loop: filter blocks are inconsistent");
    }
    if (controller.gain.rows() != 1 || controller.gain.cols() != nf) {
        throw InvalidInputError(
            "assemble_closed_loop: controller gain must be 1 x " + std::to_string(nf));
    }

    ClosedLoop cl;
    cl.plant_dim = n;
    cl.filter_dim = nf;

    // A_tilde = [[A, -B F], [K C, A_f - K C_f - B_f F]]; the estimator is
    // driven by the plant output, so the cross block is K times the plant's C.
    cl.a_tilde.setZero(n + nf, n + nf);
    cl.a_tilde.topLeftCorner(n, n) = plant.a;
    cl.a_tilde.topRightCorner(n, nf) = -plant.b * controller.gain;
    cl.a_tilde.bottomLeftCorner(nf, n) = filter.gain * plant.c;
    cl.a_tilde.bottomRightCorner(nf, nf) =
        filter.model.a - filter.gain * filter.model.c - filter.model.b * controller.gain;

    cl.b_tilde.setZero(n + nf, plant.q);
    cl.b_tilde.topRows(n) = plant.b_prime;
    cl.b_tilde.bottomRows(nf) = filter.gain * plant.d;

    cl.e_tilde.setZero(2, n + nf);
    cl.e_tilde.leftCols(2) = Matrix::Identity(2, 2);

    cl.m = plant_noise.m;

    const double abscissa = spectral_abscissa(cl.a_tilde);
    if (abscissa >= 0.0) {
        throw InstabilityError("closed loop is unstable (spectral abscissa " +
                               std::to_string(abscissa) + ")");
    }
    return cl;
}

} // namespace nmlqg
