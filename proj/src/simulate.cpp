#include "nmlqg/simulate.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace nmlqg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Standard normal stream: mt19937_64 seeded per trajectory via splitmix64,
// Box-Muller transform on 53-bit uniforms. Fixed here so runs reproduce
// bit-for-bit across schedules and platforms with the same binary.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    // Uniform on (0, 1]; never 0, so log() stays finite.
    double uniform_open() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct TrajectoryAccumulator {
    Vector sum;
    Matrix sum_outer;
    std::int64_t count = 0;
};

void validate_config(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0)) {
        throw InvalidInputError("simulate: dt must be > 0");
    }
    if (!(cfg.horizon > cfg.dt)) {
        throw InvalidInputError("simulate: horizon must exceed dt");
    }
    if (cfg.n_traj < 1) {
        throw InvalidInputError("simulate: n_traj must be >= 1");
    }
    if (!(cfg.burn_in >= 0.0) || cfg.burn_in >= 1.0) {
        throw InvalidInputError("simulate: burn_in must lie in [0, 1)");
    }
}

} // namespace

TrajectoryStats simulate_closed_loop(const ClosedLoop& cl, const SimConfig& cfg) {
    validate_config(cfg);
    const Eigen::Index dim = cl.a_tilde.rows();
    if (cl.b_tilde.rows() != dim || cl.m.rows() != cl.b_tilde.cols() ||
        cl.m.rows() != cl.m.cols()) {
        throw InvalidInputError("simulate: closed-loop matrices are inconsistent");
    }
    if ((cl.m - Matrix(cl.m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() > 0.0) {
        throw InvalidInputError("simulate: noise covariance M must be diagonal");
    }
    if (cl.m.diagonal().minCoeff() < 0.0) {
        throw InvalidInputError("simulate: noise covariance M must be PSD");
    }
    if (spectral_abscissa(cl.a_tilde) >= 0.0) {
        throw InvalidInputError("simulate: closed loop must be Hurwitz");
    }
    const double max_frequency = eigenvalues(cl.a_tilde).imag().cwiseAbs().maxCoeff();
    if (cfg.dt * max_frequency > 0.05) {
        throw InvalidInputError(
            "simulate: dt " + std::to_string(cfg.dt) + " does not resolve the fastest "
            "oscillation (dt * max|Im eig| = " + std::to_string(cfg.dt * max_frequency) +
            " > 0.05)");
    }

    const auto n_steps = static_cast<std::int64_t>(std::llround(cfg.horizon / cfg.dt));
    auto burn_steps = static_cast<std::int64_t>(std::llround(cfg.burn_in * n_steps));
    if (burn_steps >= n_steps) {
        burn_steps = n_steps - 1;  // keep at least one sample per trajectory
    }

    Matrix step_matrix;
    Matrix noise_matrix;
    if (cfg.scheme == IntegrationScheme::euler_maruyama) {
        step_matrix = Matrix::Identity(dim, dim) + cfg.dt * cl.a_tilde;
        // dW = sqrt(dt) M^{1/2} xi with standard normal xi.
        noise_matrix = cl.b_tilde * cl.m.diagonal().cwiseSqrt().asDiagonal() * std::sqrt(cfg.dt);
    } else {
        // exact transition: x <- e^{A dt} x + w, w ~ N(0, q_d)
        const Matrix gramian = cl.b_tilde * cl.m * cl.b_tilde.transpose();
        const ExactDiscretization exact =
            exact_discretization(cl.a_tilde, 0.5 * (gramian + gramian.transpose()), cfg.dt);
        step_matrix = exact.a_d;
        Eigen::SelfAdjointEigenSolver<Matrix> es(exact.q_d);
        if (es.info() != Eigen::Success) {
            throw NumericalError("simulate: factoring the step covariance failed");
        }
        noise_matrix = es.eigenvectors() *
                       es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    const Eigen::Index n_channels = noise_matrix.cols();

    std::vector<TrajectoryAccumulator> partials(cfg.n_traj);

    const auto run_trajectory = [&](int traj) {
        GaussianStream rng(splitmix64(cfg.seed + static_cast<std::uint64_t>(traj)));
        Vector state = Vector::Zero(dim);
        Vector noise(n_channels);
        TrajectoryAccumulator acc;
        acc.sum = Vector::Zero(dim);
        acc.sum_outer = Matrix::Zero(dim, dim);
        for (std::int64_t step = 0; step < n_steps; ++step) {
            for (Eigen::Index i = 0; i < n_channels; ++i) {
                noise(i) = rng.next();
            }
            state = step_matrix * state + noise_matrix * noise;
            if ((step & 1023) == 0 &&
                (!state.allFinite() || state.squaredNorm() > 1e24)) {
                throw InstabilityError("simulate: trajectory " + std::to_string(traj) +
                                       " diverged at step " + std::to_string(step));
            }
            if (step >= burn_steps) {
                acc.sum += state;
                acc.sum_outer.selfadjointView<Eigen::Lower>().rankUpdate(state);
                ++acc.count;
            }
        }
        if (!acc.sum_outer.allFinite()) {
            throw InstabilityError("simulate: trajectory " + std::to_string(traj) + " diverged");
        }
        partials[static_cast<std::size_t>(traj)] = std::move(acc);
    };

    const unsigned n_threads =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                           static_cast<unsigned>(cfg.n_traj));
    if (n_threads <= 1) {
        for (int traj = 0; traj < cfg.n_traj; ++traj) {
            run_trajectory(traj);
        }
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(n_threads);
        for (unsigned worker = 0; worker < n_threads; ++worker) {
            workers.emplace_back([&, worker] {
                try {
                    for (int traj = static_cast<int>(worker); traj < cfg.n_traj;
                         traj += static_cast<int>(n_threads)) {
                        run_trajectory(traj);
                    }
                } catch (...) {
                    errors[worker] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) {
            w.join();
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    // Merge in trajectory order so the reduction is schedule-independent.
    Vector total_sum = Vector::Zero(dim);
    Matrix total_outer = Matrix::Zero(dim, dim);
    std::int64_t total_count = 0;
    for (const auto& acc : partials) {
        total_sum += acc.sum;
        total_outer += acc.sum_outer;
        total_count += acc.count;
    }
    total_outer = total_outer.selfadjointView<Eigen::Lower>();

    TrajectoryStats stats;
    stats.config = cfg;
    stats.effective_samples = total_count;
    stats.sample_mean = total_sum / static_cast<double>(total_count);
    stats.sample_cov = total_outer / static_cast<double>(total_count) -
                       stats.sample_mean * stats.sample_mean.transpose();
    stats.sample_cov = 0.5 * (stats.sample_cov + stats.sample_cov.transpose()).eval();
    return stats;
}

double empirical_objective(const TrajectoryStats& stats, const Matrix& e_tilde,
                           const Eigen::Matrix2d& q1) {
    if (e_tilde.rows() != 2 || e_tilde.cols() != stats.sample_cov.cols()) {
        throw InvalidInputError("empirical_objective: selector does not match the statistics");
    }
    return (stats.sample_cov * e_tilde.transpose() * q1 * e_tilde).trace();
}

ExactDiscretization exact_discretization(const Matrix& a, const Matrix& q, double dt) {
    if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols()) {
        throw InvalidInputError("exact_discretization: dimension mismatch");
    }
    if (!(dt > 0.0)) {
        throw InvalidInputError("exact_discretization: dt must be > 0");
    }
    const Eigen::Index n = a.rows();
    // Van Loan block trick: exp([[-A, Q], [0, A^T]] dt) yields e^{A dt} and
    // the integrated noise covariance in its blocks.
    Matrix block = Matrix::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = -a;
    block.topRightCorner(n, n) = q;
    block.bottomRightCorner(n, n) = a.transpose();
    const Matrix e = (block * dt).exp();

    ExactDiscretization result;
    result.a_d = e.bottomRightCorner(n, n).transpose();
    result.q_d = result.a_d * e.topRightCorner(n, n);
    result.q_d = 0.5 * (result.q_d + result.q_d.transpose()).eval();
    return result;
}

} // namespace nmlqg
