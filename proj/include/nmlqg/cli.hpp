#pragma once

#include <iosfwd>
#include <limits>
#include <string>

#include "nmlqg/model.hpp"
#include "nmlqg/simulate.hpp"

namespace nmlqg {

// Everything a single CLI invocation needs. Defaults are the reference
// parameter set; a config file and command-line flags may override them
// (flags win over the file, the file wins over defaults).
struct RunConfig {
    PhysicalParams params;

    // sweep grid
    double n_min = 0.0;
    double n_max = 5.0;
    int n_steps = 11;

    // spectrum grid; NaN means "derive from omega_0 +- 5 gamma_0"
    double omega_min = std::numeric_limits<double>::quiet_NaN();
    double omega_max = std::numeric_limits<double>::quiet_NaN();
    int omega_points = 1001;

    SimConfig sim;
    std::string controller = "whitening";  // simulate: whitening | markovian

    std::string out_path;  // empty = stdout
};

// Dispatches the subcommands (model, synthesize, analyze, sweep, spectrum,
// simulate). Returns 0 on success, 2 on invalid arguments or configuration,
// 1 on synthesis/solver failure. Results go to `out` (or the --out file),
// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience overload writing to std::cout / std::cerr.
int run(int argc, const char* const* argv);

} // namespace nmlqg
