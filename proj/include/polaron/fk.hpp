#pragma once

#include <cstddef>
#include <cstdint>

namespace polaron {

// Direct path-integral estimate of f_P(T): an independent validation route,
// usable only at small (alpha, T) where the weight variance is manageable.
struct PathConfig {
    double T = 2.0;
    std::size_t steps = 800;     // time cells; paths are simulated at step T/steps/2
    std::size_t paths = 100000;
    double alpha = 1.0;
    double P = 0.0;
    std::uint64_t seed = 1;
};

struct FkEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    double sine_mean = 0.0;    // must vanish by radial symmetry
    double sine_stderr = 0.0;
};

// Monte Carlo mean of cos(P.X_T) exp(alpha/2 * S), where S is the midpoint
// discretization of the double time integral of exp(-|t-s|)/|X_{s,t}|.
// Diagonal cells replace 1/|X| by its exact conditional expectation
// sqrt(2/(pi|t-s|)) integrated in closed form over the cell, so there is no
// singularity to excise. Path batches are sharded deterministically.
FkEstimate fk_estimate(const PathConfig& config);

// Second-order weak-coupling anchors (valid only as alpha -> 0), closed form
// and the defining radial quadratures.
double perturbative_E0(double alpha);              // -sqrt(2) alpha
double perturbative_E0_quadrature(double alpha);
double perturbative_meff(double alpha);            // 1 + sqrt(2) alpha / 6
double perturbative_meff_quadrature(double alpha);

}  // namespace polaron
