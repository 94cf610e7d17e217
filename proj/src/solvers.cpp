#include "nmlqg/solvers.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace nmlqg {

namespace {

using Eigen::MatrixXcd;
using Cplx = std::complex<double>;

constexpr double kResidualTol = 1e-9;  // relative to 1 + ||Q||_F

void require(bool condition, const std::string& msg) {
    if (!condition) {
        throw InvalidInputError(msg);
    }
}

void require_square(const Matrix& m, const char* name) {
    require(m.rows() == m.cols() && m.rows() > 0,
            std::string(name) + " must be square and nonempty");
}

bool is_symmetric(const Matrix& m, double tol = 1e-10) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

Matrix symmetrized(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

// Unitary similarity that exchanges the adjacent diagonal entries t(k,k) and
// t(k+1,k+1) of a complex Schur form, applied in place to t and u.
void swap_schur_entries(MatrixXcd& t, MatrixXcd& u, Eigen::Index k) {
    const Cplx t11 = t(k, k);
    const Cplx t12 = t(k, k + 1);
    const Cplx t22 = t(k + 1, k + 1);
    // Eigenvector of [[t11, t12], [0, t22]] for eigenvalue t22, rotated onto e1.
    const Cplx v1 = t12;
    const Cplx v2 = t22 - t11;
    const double norm_v = std::sqrt(std::norm(v1) + std::norm(v2));
    if (norm_v == 0.0) {
        return;  // equal eigenvalues; order is immaterial
    }
    Eigen::Matrix2cd g;
    g << std::conj(v1) / norm_v, std::conj(v2) / norm_v,
         -v2 / norm_v, v1 / norm_v;
    t.middleRows(k, 2) = g * t.middleRows(k, 2);
    t.middleCols(k, 2) = t.middleCols(k, 2) * g.adjoint();
    u.middleCols(k, 2) = u.middleCols(k, 2) * g.adjoint();
    t(k + 1, k) = 0.0;
}

// Reorders a complex Schur form so all eigenvalues with negative real part
// come first; returns their count.
Eigen::Index order_stable_first(MatrixXcd& t, MatrixXcd& u) {
    const Eigen::Index n = t.rows();
    bool swapped = true;
    while (swapped) {
        swapped = false;
        for (Eigen::Index k = 0; k + 1 < n; ++k) {
            if (t(k, k).real() >= 0.0 && t(k + 1, k + 1).real() < 0.0) {
                swap_schur_entries(t, u, k);
                swapped = true;
            }
        }
    }
    Eigen::Index count = 0;
    while (count < n && t(count, count).real() < 0.0) {
        ++count;
    }
    return count;
}

// Reduced problem with the cross weight folded into the drift and state cost:
// a_hat = A - B R^{-1} S^T, q_hat = Q - S R^{-1} S^T.
struct ReducedCare {
    Matrix a_hat;
    Matrix q_hat;
    Matrix r_inv_bt;  // R^{-1} B^T
};

bool has_cross_term(const CareProblem& p) {
    return p.s.size() > 0 && p.s.cwiseAbs().maxCoeff() > 0.0;
}

ReducedCare reduce_cross_term(const CareProblem& p) {
    Eigen::LLT<Matrix> r_llt(p.r);
    if (r_llt.info() != Eigen::Success) {
        throw InvalidInputError("CARE: r must be symmetric positive definite");
    }
    ReducedCare reduced;
    reduced.r_inv_bt = r_llt.solve(p.b.transpose());
    if (has_cross_term(p)) {
        const Matrix r_inv_st = r_llt.solve(p.s.transpose());
        reduced.a_hat = p.a - p.b * r_inv_st;
        reduced.q_hat = symmetrized(p.q - p.s * r_inv_st);
    } else {
        reduced.a_hat = p.a;
        reduced.q_hat = symmetrized(p.q);
    }
    return reduced;
}

// Gain and closed loop induced by a candidate solution, in original coordinates.
Matrix care_gain(const CareProblem& p, const Matrix& x) {
    Matrix bt_x_st = p.b.transpose() * x;
    if (has_cross_term(p)) {
        bt_x_st += p.s.transpose();
    }
    return Eigen::LLT<Matrix>(p.r).solve(bt_x_st);
}

double care_residual(const CareProblem& p, const Matrix& x) {
    const Matrix gain = care_gain(p, x);
    Matrix xb_s = x * p.b;
    if (has_cross_term(p)) {
        xb_s += p.s;
    }
    const Matrix residual =
        p.a.transpose() * x + x * p.a - xb_s * gain + p.q;
    return residual.norm();
}

void validate_care_problem(const CareProblem& p) {
    require_square(p.a, "CARE a");
    require_square(p.r, "CARE r");
    require_square(p.q, "CARE q");
    const Eigen::Index n = p.a.rows();
    const Eigen::Index m = p.b.cols();
    require(p.b.rows() == n, "CARE b must have as many rows as a");
    require(p.q.rows() == n, "CARE q must match the dimension of a");
    require(p.r.rows() == m, "CARE r must match the input dimension");
    if (p.s.size() > 0) {
        require(p.s.rows() == n && p.s.cols() == m, "CARE s must be n x m");
    }
    require(is_symmetric(p.q), "CARE q must be symmetric");
    require(is_symmetric(p.r), "CARE r must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> q_eig(symmetrized(p.q));
    require(q_eig.eigenvalues().minCoeff() >= -1e-10 * (1.0 + p.q.norm()),
            "CARE q must be positive semidefinite");
}

// PBH rank test over the eigenvalues of a with real part >= -margin.
bool pbh_rank_full(const Matrix& a, const Matrix& b, double tol) {
    const Eigen::Index n = a.rows();
    const Eigen::VectorXcd eigs = eigenvalues(a);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (eigs(i).real() < -1e-12) {
            continue;
        }
        MatrixXcd pencil(n, n + b.cols());
        pencil.leftCols(n) = a.cast<Cplx>() - eigs(i) * MatrixXcd::Identity(n, n);
        pencil.rightCols(b.cols()) = b.cast<Cplx>();
        Eigen::JacobiSVD<MatrixXcd> svd(pencil);
        svd.setThreshold(tol);
        if (svd.rank() < n) {
            return false;
        }
    }
    return true;
}

Matrix care_subspace(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
    const Eigen::Index n = a.rows();
    const Matrix g = b * Eigen::LLT<Matrix>(r).solve(b.transpose());

    Matrix hamiltonian(2 * n, 2 * n);
    hamiltonian << a, -g,
                   -q, -a.transpose();

    Eigen::ComplexSchur<MatrixXcd> schur(hamiltonian.cast<Cplx>());
    if (schur.info() != Eigen::Success) {
        throw NumericalError("CARE: Schur decomposition of the Hamiltonian failed");
    }
    MatrixXcd t = schur.matrixT();
    MatrixXcd u = schur.matrixU();
    const Eigen::Index stable = order_stable_first(t, u);
    if (stable != n) {
        throw SynthesisInfeasibleError(
            "CARE: Hamiltonian has a stable invariant subspace of dimension " +
            std::to_string(stable) + ", expected " + std::to_string(n) +
            " (eigenvalues on the imaginary axis)");
    }

    const MatrixXcd u11 = u.topLeftCorner(n, n);
    const MatrixXcd u21 = u.bottomLeftCorner(n, n);
    Eigen::FullPivLU<MatrixXcd> lu(u11.transpose());
    if (!lu.isInvertible()) {
        throw SynthesisInfeasibleError("CARE: stable subspace basis is degenerate");
    }
    const MatrixXcd x = lu.solve(u21.transpose()).transpose();
    return symmetrized(x.real());
}

SolveReport make_report(const CareProblem& p, const Matrix& x) {
    SolveReport report;
    report.solution = symmetrized(x);
    report.residual_norm = care_residual(p, report.solution);
    report.closed_loop_abscissa = spectral_abscissa(p.a - p.b * care_gain(p, report.solution));
    return report;
}

// One Newton-Kleinman pass on the reduced problem, in place.
Matrix newton_kleinman_reduced(const ReducedCare& reduced, const Matrix& b, const Matrix& r,
                               Matrix x, int max_iterations, double target) {
    Eigen::LLT<Matrix> r_llt(r);
    double best_residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iterations; ++iter) {
        const Matrix gain = r_llt.solve(b.transpose() * x);
        const Matrix a_cl = reduced.a_hat - b * gain;
        if (spectral_abscissa(a_cl) >= 0.0) {
            throw SynthesisInfeasibleError(
                "Newton-Kleinman: iterate gain is not stabilizing");
        }
        x = solve_lyapunov(a_cl.transpose(),
                           symmetrized(reduced.q_hat + gain.transpose() * r * gain));
        const Matrix residual = reduced.a_hat.transpose() * x + x * reduced.a_hat -
                                x * b * r_llt.solve(b.transpose() * x) + reduced.q_hat;
        const double res_norm = residual.norm();
        if (res_norm <= target || res_norm >= best_residual) {
            break;  // converged or stagnated at roundoff level
        }
        best_residual = res_norm;
    }
    return x;
}

} // namespace

double spectral_abscissa(const Matrix& a) {
    return eigenvalues(a).real().maxCoeff();
}

Eigen::VectorXcd eigenvalues(const Matrix& a) {
    require_square(a, "a");
    Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigenvalue iteration failed to converge");
    }
    return es.eigenvalues();
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    require_square(a, "Lyapunov a");
    require(q.rows() == a.rows() && q.cols() == a.cols(),
            "Lyapunov q must have the same dimension as a");
    require(is_symmetric(q), "Lyapunov q must be symmetric");

    const double abscissa = spectral_abscissa(a);
    if (abscissa >= 0.0) {
        throw SynthesisInfeasibleError(
            "Lyapunov equation has no unique stable solution: a is not Hurwitz "
            "(spectral abscissa " + std::to_string(abscissa) + ")");
    }

    const Eigen::Index n = a.rows();
    Eigen::ComplexSchur<MatrixXcd> schur(a.cast<Cplx>());
    if (schur.info() != Eigen::Success) {
        throw NumericalError("Lyapunov: Schur decomposition failed");
    }
    const MatrixXcd& t = schur.matrixT();
    const MatrixXcd& u = schur.matrixU();

    // A = U T U^H turns A X + X A^T + Q = 0 into T Y + Y T^T + C = 0 with
    // Y = U^H X conj(U), C = U^H Q conj(U); solve columns back to front.
    const MatrixXcd c = u.adjoint() * q.cast<Cplx>() * u.conjugate();
    MatrixXcd y(n, n);
    for (Eigen::Index j = n - 1; j >= 0; --j) {
        Eigen::VectorXcd rhs = -c.col(j);
        for (Eigen::Index k = j + 1; k < n; ++k) {
            rhs -= t(j, k) * y.col(k);
        }
        MatrixXcd shifted = t;
        shifted.diagonal().array() += t(j, j);
        y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    const Matrix x = symmetrized((u * y * u.transpose()).real());

    const double residual = (a * x + x * a.transpose() + q).norm();
    if (residual > kResidualTol * (1.0 + q.norm())) {
        throw NumericalError("Lyapunov solve residual " + std::to_string(residual) +
                             " exceeds tolerance");
    }
    return x;
}

Matrix lyapunov_oracle(const Matrix& a, const Matrix& q) {
    require_square(a, "Lyapunov a");
    require(q.rows() == a.rows() && q.cols() == a.cols(),
            "Lyapunov q must have the same dimension as a");
    const Eigen::Index n = a.rows();
    const Matrix identity = Matrix::Identity(n, n);
    const Matrix system = Eigen::kroneckerProduct(identity, a).eval() +
                          Eigen::kroneckerProduct(a, identity).eval();
    Eigen::FullPivLU<Matrix> lu(system);
    if (!lu.isInvertible()) {
        throw NumericalError("lyapunov_oracle: I (x) A + A (x) I is singular");
    }
    const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
    const Vector vec_x = lu.solve(rhs);
    return Eigen::Map<const Matrix>(vec_x.data(), n, n);
}

SolveReport solve_care(const CareProblem& problem) {
    validate_care_problem(problem);
    const ReducedCare reduced = reduce_cross_term(problem);
    const Eigen::Index n = problem.a.rows();

    Eigen::SelfAdjointEigenSolver<Matrix> q_hat_eig(reduced.q_hat);
    if (q_hat_eig.eigenvalues().minCoeff() < -1e-10 * (1.0 + reduced.q_hat.norm())) {
        throw InvalidInputError(
            "CARE: q - s r^{-1} s^T must be positive semidefinite "
            "(the [[q, s], [s^T, r]] block must be PSD)");
    }

    if (!is_stabilizable(reduced.a_hat, problem.b)) {
        throw SynthesisInfeasibleError("CARE: (a, b) is not stabilizable");
    }
    // Detectability of (q^{1/2}, a) is sufficient but not necessary for a
    // stabilizing solution; feasibility is certified by the dimension of the
    // stable Hamiltonian subspace and the final closed-loop check instead.

    const double target = kResidualTol * (1.0 + problem.q.norm());

    // Zero state cost with a stable drift: P = 0 without the subspace method.
    if (reduced.q_hat.cwiseAbs().maxCoeff() == 0.0 &&
        spectral_abscissa(reduced.a_hat) < 0.0) {
        return make_report(problem, Matrix::Zero(n, n));
    }

    Matrix x = care_subspace(reduced.a_hat, problem.b, reduced.q_hat, problem.r);
    SolveReport report = make_report(problem, x);
    if (report.residual_norm > target) {
        x = newton_kleinman_reduced(reduced, problem.b, problem.r, report.solution, 25, target);
        report = make_report(problem, x);
        if (report.residual_norm > target) {
            throw ConvergenceError("CARE residual " + std::to_string(report.residual_norm) +
                                   " above tolerance after refinement");
        }
    }
    if (report.closed_loop_abscissa >= 0.0) {
        throw SynthesisInfeasibleError("CARE: computed solution is not stabilizing");
    }
    return report;
}

SolveReport newton_kleinman(const CareProblem& problem, const Matrix& initial,
                            int max_iterations) {
    validate_care_problem(problem);
    require(initial.rows() == problem.a.rows() && initial.cols() == problem.a.cols(),
            "Newton-Kleinman initial guess has wrong dimensions");
    const ReducedCare reduced = reduce_cross_term(problem);
    const double target = kResidualTol * (1.0 + problem.q.norm());
    const Matrix x = newton_kleinman_reduced(reduced, problem.b, problem.r,
                                             symmetrized(initial), max_iterations, target);
    SolveReport report = make_report(problem, x);
    if (report.residual_norm > target) {
        throw ConvergenceError("Newton-Kleinman residual " +
                               std::to_string(report.residual_norm) +
                               " above tolerance after " +
                               std::to_string(max_iterations) + " iterations");
    }
    return report;
}

bool is_stabilizable(const Matrix& a, const Matrix& b, double tol) {
    require_square(a, "a");
    require(b.rows() == a.rows(), "b must have as many rows as a");
    return pbh_rank_full(a, b, tol);
}

bool is_detectable(const Matrix& a, const Matrix& c, double tol) {
    require_square(a, "a");
    require(c.cols() == a.rows(), "c must have as many columns as a has rows");
    // Dual pair: (a, c) is detectable iff (a^T, c^T) is stabilizable.
    return pbh_rank_full(a.transpose(), c.transpose(), tol);
}

} // namespace nmlqg
