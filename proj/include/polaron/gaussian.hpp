#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "polaron/excursion.hpp"
#include "polaron/linalg.hpp"
#include "polaron/rng.hpp"

namespace polaron {

// An excursion together with the auxiliary variables attached to it: one
// nonnegative u_i and one Brownian displacement norm |X_i| per interval.
struct DressedExcursion {
    Excursion excursion;
    std::vector<double> u;
    std::vector<double> displacement_norms;
};

// Gram matrix of the interval indicator functions: C_ij is the length of
// [s_i,t_i] `intersect` [s_j,t_j]. Symmetric positive semidefinite.
Matrix overlap_matrix(std::span<const Interval> intervals);

// Joint draw of the 3-d Brownian displacements over the intervals: the common
// refinement of all endpoints is built, one independent N(0, cell-length)
// 3-vector is drawn per cell, and each displacement is the sum of the cells
// its interval contains. Per coordinate, Cov(X_i, X_j) = C_ij.
std::vector<std::array<double, 3>> sample_displacements(Rng& rng, const Excursion& exc);

// Same joint draw extended with the Brownian position at time t (the
// refinement additionally contains 0 and t).
struct DisplacementDraw {
    std::vector<std::array<double, 3>> per_interval;
    std::array<double, 3> at_t;
};
DisplacementDraw sample_displacements_at(Rng& rng, std::span<const Interval> intervals, double t);

// Half-normal importance draw of the u variables given displacement norms:
// u_i has density proportional to exp(-u_i^2 |X_i|^2 / 2) on [0,inf). The
// log importance weight -sum log|X_i| makes weight*estimand reproduce the
// flat (2/pi)^{n/2} du integral.
struct USample {
    std::vector<double> u;
    double log_weight = 0.0;
};
USample sample_u(Rng& rng, std::span<const double> displacement_norms);

// Residual variance of the Brownian endpoint B_t after projecting onto the
// noisy observations {u_i B_{s_i,t_i} + Z_i}: t - b^T (I + D_u C D_u)^{-1} b
// with b_i = u_i * |[s_i,t_i] intersect [0,t]|, solved by Cholesky.
double sigma_squared_t(std::span<const Interval> intervals, std::span<const double> u, double t);

// sigma_squared_t evaluated at the excursion lifetime tau.
double sigma_squared(const DressedExcursion& dressed);

// Normalization of the tilted path measure: det(I + D_u C D_u)^{-3/2}, equal
// to E[exp(-sum u_i^2 |X_i|^2 / 2)] over the 3-d Wiener measure. In (0, 1].
double gaussian_normalization(std::span<const Interval> intervals, std::span<const double> u);
double log_gaussian_normalization(std::span<const Interval> intervals, std::span<const double> u);

// Deterministic quadrature of the u-integral
//   int du (2/pi)^{n/2} phi(xi,u) g(sigma^2_t(xi,u))
// over [0,inf)^n for n <= 2. Cross-check path for the importance-sampling
// route; adaptive Simpson after mapping each axis to (0,1).
double u_functional_quadrature(std::span<const Interval> intervals, double t,
                               const std::function<double(double)>& g, double rel_tol = 1e-9);

}  // namespace polaron
