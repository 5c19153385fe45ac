#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "polaron/ensemble.hpp"

namespace polaron {

// Point estimate of Lambda(P, lambda) = mu(exp(-P^2 sigma^2/2 + lambda T1))
// on a fixed ensemble, with its Monte Carlo diagnostics.
struct LambdaEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    double ess = 0.0;
    double max_share = 0.0;
};

struct E0Result {
    double value = 0.0;
    double stderr_ = 0.0;   // jackknife over 32 contiguous batches
    LambdaEstimate at_root;
};

enum class PointKind { interior_root, plateau };

struct EnergyCurvePoint {
    double P = 0.0;
    double energy = 0.0;
    PointKind kind = PointKind::interior_root;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    LambdaEstimate diag;       // Lambda estimate at the returned energy
    double energy_stderr = 0.0;  // jackknife; 0 unless requested
};

struct MeffResult {
    double value = 0.0;
    double stderr_ = 0.0;
};

struct OverlapResult {
    double value = 0.0;
    bool in_physical_range = true;  // (0, 1]; synthetic ensembles may leave it
};

enum class TailVerdict { finite_looking, heavy_tailed, inconclusive };

struct I0Probe {
    double estimate = 0.0;  // mu_hat(exp(-P^2 sigma^2/2 + T1))
    double ess = 0.0;
    double max_share = 0.0;
    double hill_tail_index = 0.0;
    TailVerdict verdict = TailVerdict::inconclusive;
};

struct CurveDiagnostics {
    bool monotone = false;
    bool concave_in_p2 = false;
    bool quasiparticle_bound = false;
    double max_monotone_violation = 0.0;
    double max_concavity_violation = 0.0;
    double max_quasiparticle_violation = 0.0;
};

struct EnergyCurve {
    std::vector<EnergyCurvePoint> points;
    CurveDiagnostics diagnostics;
    MeffResult meff;
    E0Result e0;
};

// --- operations ---------------------------------------------------------

LambdaEstimate lambda_hat(const Ensemble& ensemble, double P, double lambda);

// Unique lambda with Lambda(0, lambda) = 1, by bisection; the map is exactly
// nondecreasing pathwise on a fixed ensemble, so the root is deterministic.
// |Lambda - 1| <= tol at return and the result must be < 0.
E0Result solve_E0(const Ensemble& ensemble, double tol = 1e-6);

// E(P): bisection below the cut min(P^2/2, E0 + 1 - 2*stderr(E0)); if Lambda
// stays below 1 up to the cut, the point is classified as a plateau with
// energy E0 + 1.
EnergyCurvePoint solve_EP(const Ensemble& ensemble, double P, const E0Result& e0,
                          double tol = 1e-6, bool with_stderr = false);

// m_eff = sum w tau / sum w sigma2 with w = exp(logw + E0 tau); the common
// normalization cancels. Jackknife re-solves E0 per replicate.
MeffResult effective_mass(const Ensemble& ensemble, const E0Result& e0);

// <Omega, (H(P) - lambda)^-1 Omega> = 1/((P^2/2 - lambda)(1 - Lambda(P,lambda))).
double resolvent(const Ensemble& ensemble, double P, double lambda, const E0Result& e0);
double resolvent_at(const Ensemble& ensemble, double P, double lambda,
                    const EnergyCurvePoint& ep);

// Squared vacuum overlap 1/((P^2/2 - E(P)) mu(T1 e^{-P^2 sigma^2/2 + E(P) T1})).
OverlapResult overlap(const Ensemble& ensemble, double P, const EnergyCurvePoint& ep);

// Tail probe for the boundedness question: the estimate is reported together
// with ESS, max weight share and a Hill tail-index estimate; the verdict is a
// heuristic label, never a pass/fail claim.
I0Probe i0_probe(const Ensemble& ensemble, double P, const E0Result& e0);

EnergyCurve energy_curve(const Ensemble& ensemble, std::span<const double> P_grid,
                         double tol = 1e-6, bool with_stderr = false);

// --- low-level reduction (shared with the serial reference and benchmarks) --

// Accumulated sums of the tilted weights w_j = exp(logw_j - p2_half*sigma2_j
// + lambda*tau_j), held in the shifted domain exp(x_j - shift) with
// shift = max x_j over the included rows. Blocked deterministic reduction:
// fixed-size blocks are summed serially and combined in block order, so the
// result does not depend on the thread count.
struct TiltedSums {
    double shift = 0.0;
    double w = 0.0;      // sum exp(x - shift)
    double w2 = 0.0;     // sum exp(2(x - shift))
    double wtau = 0.0;   // sum exp(x - shift) * tau
    double wsig = 0.0;   // sum exp(x - shift) * sigma2
    std::size_t count = 0;
};

// Reduction over rows, optionally excluding the index range [skip_lo, skip_hi)
// (used by the jackknife).
TiltedSums tilted_sums(std::span<const DressedSample> rows, double p2_half, double lambda,
                       std::size_t skip_lo = 0, std::size_t skip_hi = 0);

// log of the Lambda estimate from sums (shift + log(w/count)).
double log_lambda_from(const TiltedSums& s);

}  // namespace polaron
