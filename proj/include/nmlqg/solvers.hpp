#pragma once

#include <Eigen/Dense>

#include "nmlqg/errors.hpp"
#include "nmlqg/model.hpp"

namespace nmlqg {

// Data of the continuous-time algebraic Riccati equation
//   0 = A^T P + P A - (P B + S) R^{-1} (B^T P + S^T) + Q.
// An empty (0x0) s means no cross weight.
struct CareProblem {
    Matrix a;  // n x n
    Matrix b;  // n x m
    Matrix q;  // n x n, symmetric PSD
    Matrix r;  // m x m, symmetric PD
    Matrix s;  // n x m cross weight, or empty
};

struct SolveReport {
    Matrix solution;                     // symmetric stabilizing solution
    double residual_norm = 0.0;          // Frobenius norm of the defining equation
    double closed_loop_abscissa = 0.0;   // max Re eig of A - B R^{-1} (B^T P + S^T)
};

// Max real part over the eigenvalues of a.
double spectral_abscissa(const Matrix& a);

// Eigenvalues of a real square matrix.
Eigen::VectorXcd eigenvalues(const Matrix& a);

// Unique symmetric solution of A X + X A^T + Q = 0 for Hurwitz A, computed by
// reduction to complex Schur form and back-substitution.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

// Independent route for the same equation: dense solve of the vectorized
// system (I (x) A + A (x) I) vec(X) = -vec(Q). Test oracle; O(n^6).
Matrix lyapunov_oracle(const Matrix& a, const Matrix& q);

// Stabilizing solution of the CARE via the ordered invariant subspace of the
// 2n x 2n Hamiltonian matrix, with Newton-Kleinman fallback refinement when
// the subspace residual misses the target.
SolveReport solve_care(const CareProblem& problem);

// Newton-Kleinman iteration (one Lyapunov solve per step) started from a
// symmetric initial guess whose induced gain is stabilizing. Used as the
// refinement path and as an independent check of solve_care.
SolveReport newton_kleinman(const CareProblem& problem, const Matrix& initial,
                            int max_iterations = 50);

// PBH rank tests at tolerance tol: every eigenvalue of a with nonnegative
// real part must be controllable (resp. observable).
bool is_stabilizable(const Matrix& a, const Matrix& b, double tol = 1e-8);
bool is_detectable(const Matrix& a, const Matrix& c, double tol = 1e-8);

} // namespace nmlqg
