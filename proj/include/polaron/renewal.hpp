#pragma once

#include <cstddef>
#include <vector>

#include "polaron/ensemble.hpp"

namespace polaron {

// Binned empirical kernel nu_P: weights[k] carries the mass of rows with
// tau in ((k-1)h, kh], tilted by exp(logw - P^2 sigma^2/2) and normalized by
// the row count. weights[0] is always zero (tau > 0). Mass beyond the last
// bin is reported separately, never folded in.
struct EmpiricalNu {
    double h = 0.0;
    std::vector<double> weights;  // size K+1, index 0 unused
    double tail_mass = 0.0;
    double P = 0.0;
    double alpha = 0.0;           // source-ensemble coupling
    std::size_t source_rows = 0;

    std::size_t bins() const { return weights.empty() ? 0 : weights.size() - 1; }
    double total_mass() const;
};

// f on the grid kh, k = 0..K. f[0] = 1 by construction.
struct RenewalSolution {
    double h = 0.0;
    std::vector<double> f;
    double P = 0.0;

    double t_max() const { return h * static_cast<double>(f.size() - 1); }
};

EmpiricalNu empirical_nu(const Ensemble& ensemble, double P, double h, double T_max);

// Forward recursion f[k] = z_P(kh) + sum_{m=1..k} nu[m] f[k-m] with
// z_P(T) = exp(-P^2 T / 2). Atoms sit on right bin edges.
RenewalSolution solve_renewal(const EmpiricalNu& nu);

// Truncated Neumann series sum_{n<=n_max} nu^{*n} * z_P on the same grid,
// with the a-priori remainder bound mass^{n_max+1} * max f.
struct SeriesSolution {
    RenewalSolution solution;
    double remainder_bound = 0.0;
};
SeriesSolution series_solution(const EmpiricalNu& nu, std::size_t n_max);

// Large-T limit of exp(EP*T) f(T), read as the mean over the last quartile
// of the grid. The drift diagnostic is |slope| * T_max / mean of a linear
// fit over the window; above 5% the plateau is rejected.
struct PlateauFit {
    double value = 0.0;
    double drift_ratio = 0.0;
};
PlateauFit plateau(const RenewalSolution& solution, double EP);

// int_0^T_max exp(lambda T) f(T) dT by trapezoid, plus the analytic tail
// plateau * exp((lambda-EP) T_max) / (EP - lambda). Requires lambda < EP.
double laplace_transform(const RenewalSolution& solution, double lambda, double EP);

}  // namespace polaron
