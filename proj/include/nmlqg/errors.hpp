#pragma once

#include <stdexcept>
#include <string>

namespace nmlqg {

// Invariant or dimension violation in caller-supplied data.
class InvalidInputError : public std::invalid_argument {
public:
    explicit InvalidInputError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A Riccati or Lyapunov problem has no (unique) stabilizing solution,
// e.g. a stabilizability/detectability condition failed.
class SynthesisInfeasibleError : public std::runtime_error {
public:
    explicit SynthesisInfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative refinement did not reach the residual target.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A closed loop turned out unstable, or a simulated trajectory diverged.
class InstabilityError : public std::runtime_error {
public:
    explicit InstabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// An eigenvalue or matrix decomposition failed.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace nmlqg
