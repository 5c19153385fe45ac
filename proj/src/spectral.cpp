#include "polaron/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "polaron/errors.hpp"

namespace polaron {

namespace {

constexpr std::size_t kBlock = 8192;
constexpr std::size_t kJackknifeBatches = 32;
constexpr double kLambdaTol = 1e-6;   // bisection tolerance in lambda
constexpr double kCutMargin = 1e-9;   // stay strictly below the search cut
constexpr int kMaxExpand = 60;        // bracket expansion steps, factor 2

double exponent_of(const DressedSample& r, double p2_half, double lambda) {
    return r.logw - p2_half * r.sigma2 + lambda * r.tau;
}

}  // namespace

TiltedSums tilted_sums(std::span<const DressedSample> rows, double p2_half, double lambda,
                       std::size_t skip_lo, std::size_t skip_hi) {
    const std::size_t n = rows.size();
    skip_hi = std::min(skip_hi, n);
    skip_lo = std::min(skip_lo, skip_hi);

    TiltedSums out;
    out.count = n - (skip_hi - skip_lo);
    if (out.count == 0) {
        out.shift = -std::numeric_limits<double>::infinity();
        return out;
    }

    double shift = -std::numeric_limits<double>::infinity();
    const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for reduction(max : shift) schedule(static)
    for (std::ptrdiff_t j = 0; j < sn; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (uj >= skip_lo && uj < skip_hi) continue;
        shift = std::max(shift, exponent_of(rows[uj], p2_half, lambda));
    }
    out.shift = shift;

    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<std::array<double, 4>> partials(nblocks, {0.0, 0.0, 0.0, 0.0});
    const std::ptrdiff_t snb = static_cast<std::ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < snb; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        const std::size_t hi = std::min(lo + kBlock, n);
        double w = 0.0, w2 = 0.0, wtau = 0.0, wsig = 0.0;
        for (std::size_t j = lo; j < hi; ++j) {
            if (j >= skip_lo && j < skip_hi) continue;
            const double e = std::exp(exponent_of(rows[j], p2_half, lambda) - shift);
            w += e;
            w2 += e * e;
            wtau += e * rows[j].tau;
            wsig += e * rows[j].sigma2;
        }
        partials[static_cast<std::size_t>(b)] = {w, w2, wtau, wsig};
    }
    for (const auto& p : partials) {
        out.w += p[0];
        out.w2 += p[1];
        out.wtau += p[2];
        out.wsig += p[3];
    }
    return out;
}

double log_lambda_from(const TiltedSums& s) {
    if (s.count == 0 || !(s.w > 0.0)) return -std::numeric_limits<double>::infinity();
    return s.shift + std::log(s.w / static_cast<double>(s.count));
}

namespace {

LambdaEstimate estimate_from(const TiltedSums& s) {
    const double n = static_cast<double>(s.count);
    const double logv = log_lambda_from(s);
    if (logv > 709.0)
        throw DiagnosticError(
            "lambda_hat: estimate overflows double even after shifting; use a smaller lambda");
    LambdaEstimate est;
    est.value = std::exp(logv);
    const double var_shifted = std::max(0.0, (s.w2 - s.w * s.w / n) / std::max(1.0, n - 1.0));
    est.stderr_ = var_shifted > 0.0
                      ? std::exp(s.shift + 0.5 * std::log(var_shifted) - 0.5 * std::log(n))
                      : 0.0;
    est.ess = s.w2 > 0.0 ? s.w * s.w / s.w2 : 0.0;
    est.max_share = s.w > 0.0 ? 1.0 / s.w : 1.0;
    return est;
}

// Bisection for log Lambda(lambda) = 0 on [lo, hi], expanding lo downward
// (and hi up to hi_max) by doubling steps until the root is bracketed.
// Returns the root; `sums_out` receives the tilted sums at the root.
double find_root(std::span<const DressedSample> rows, double p2_half, double lo, double hi,
                 double hi_max, double tol, std::size_t skip_lo, std::size_t skip_hi,
                 TiltedSums* sums_out) {
    auto log_at = [&](double lam) {
        return log_lambda_from(tilted_sums(rows, p2_half, lam, skip_lo, skip_hi));
    };

    double fhi = log_at(hi);
    double step = std::max(hi - lo, 0.25);
    for (int i = 0; fhi < 0.0 && hi < hi_max && i < kMaxExpand; ++i) {
        hi = std::min(hi_max, hi + step);
        step *= 2.0;
        fhi = log_at(hi);
    }
    if (fhi < 0.0) return std::numeric_limits<double>::quiet_NaN();  // no root below hi_max

    double flo = log_at(lo);
    step = std::max(hi - lo, 0.25);
    for (int i = 0; flo >= 0.0 && i < kMaxExpand; ++i) {
        lo -= step;
        step *= 2.0;
        flo = log_at(lo);
    }
    if (flo >= 0.0) throw DiagnosticError("root finding: could not bracket the root from below");

    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const TiltedSums s = tilted_sums(rows, p2_half, mid, skip_lo, skip_hi);
        const double f = log_lambda_from(s);
        if (std::abs(std::expm1(f)) <= tol && hi - lo <= kLambdaTol) {
            if (sums_out) *sums_out = s;
            return mid;
        }
        if (f >= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    throw std::logic_error("root finding: bisection failed to converge");
}

double jackknife_stderr(std::span<const double> replicates, double) {
    const double g = static_cast<double>(replicates.size());
    if (g < 2.0) return 0.0;
    double mean = 0.0;
    for (const double r : replicates) mean += r;
    mean /= g;
    double ss = 0.0;
    for (const double r : replicates) ss += (r - mean) * (r - mean);
    return std::sqrt((g - 1.0) / g * ss);
}

// Contiguous batch r of kJackknifeBatches over [0, n).
std::pair<std::size_t, std::size_t> batch_range(std::size_t n, std::size_t r) {
    const std::size_t lo = n * r / kJackknifeBatches;
    const std::size_t hi = n * (r + 1) / kJackknifeBatches;
    return {lo, hi};
}

bool jackknife_feasible(std::size_t n) { return n >= 2 * kJackknifeBatches; }

double solve_e0_on(std::span<const DressedSample> rows, double alpha, double tol,
                   std::size_t skip_lo, std::size_t skip_hi, double hint,
                   TiltedSums* sums_out) {
    const bool hinted = std::isfinite(hint);
    const double lo = hinted ? hint - 0.05 : -std::numbers::sqrt2 * alpha - 1.0;
    const double hi = hinted ? std::min(0.0, hint + 0.05) : 0.0;
    const double root = find_root(rows, 0.0, lo, hi, 0.0, tol, skip_lo, skip_hi, sums_out);
    if (std::isnan(root))
        throw DiagnosticError(
            "solve_E0: Lambda(0,0) < 1 on this ensemble; generate a larger ensemble");
    return root;
}

}  // namespace

LambdaEstimate lambda_hat(const Ensemble& ensemble, double P, double lambda) {
    if (ensemble.rows.empty()) throw std::invalid_argument("lambda_hat: empty ensemble");
    if (P < 0.0) throw std::invalid_argument("lambda_hat: P must be >= 0");
    return estimate_from(tilted_sums(ensemble.rows, 0.5 * P * P, lambda));
}

E0Result solve_E0(const Ensemble& ensemble, double tol) {
    if (ensemble.rows.empty()) throw std::invalid_argument("solve_E0: empty ensemble");
    const auto rows = std::span<const DressedSample>(ensemble.rows);

    E0Result res;
    TiltedSums sums;
    res.value = solve_e0_on(rows, ensemble.meta.alpha, tol, 0, 0,
                            std::numeric_limits<double>::quiet_NaN(), &sums);
    res.at_root = estimate_from(sums);
    if (!(res.value < 0.0))
        throw DiagnosticError("solve_E0: root is not negative; ensemble is inconsistent");

    if (jackknife_feasible(rows.size())) {
        std::vector<double> reps(kJackknifeBatches);
        for (std::size_t r = 0; r < kJackknifeBatches; ++r) {
            const auto [blo, bhi] = batch_range(rows.size(), r);
            reps[r] = solve_e0_on(rows, ensemble.meta.alpha, tol, blo, bhi, res.value, nullptr);
        }
        res.stderr_ = jackknife_stderr(reps, res.value);
    }
    return res;
}

EnergyCurvePoint solve_EP(const Ensemble& ensemble, double P, const E0Result& e0, double tol,
                          bool with_stderr) {
    if (ensemble.rows.empty()) throw std::invalid_argument("solve_EP: empty ensemble");
    if (P < 0.0) throw std::invalid_argument("solve_EP: P must be >= 0");
    const auto rows = std::span<const DressedSample>(ensemble.rows);
    const double p2h = 0.5 * P * P;

    // Classification cut: the uncertainty of E0 widens the plateau band.
    const double cut =
        std::min(p2h, e0.value + 1.0 - 2.0 * e0.stderr_) - kCutMargin;

    EnergyCurvePoint pt;
    pt.P = P;

    const TiltedSums at_cut = tilted_sums(rows, p2h, cut);
    if (log_lambda_from(at_cut) < 0.0) {
        pt.kind = PointKind::plateau;
        pt.energy = e0.value + 1.0;
        pt.bracket_lo = cut;
        pt.bracket_hi = cut;
        pt.diag = estimate_from(at_cut);
        pt.energy_stderr = e0.stderr_;
        return pt;
    }

    TiltedSums sums;
    const double lo0 = std::min(e0.value, cut - 0.5);
    const double root = find_root(rows, p2h, lo0, cut, cut, tol, 0, 0, &sums);
    pt.kind = PointKind::interior_root;
    pt.energy = root;
    pt.bracket_lo = lo0;
    pt.bracket_hi = cut;
    pt.diag = estimate_from(sums);

    if (with_stderr && jackknife_feasible(rows.size())) {
        std::vector<double> reps(kJackknifeBatches);
        for (std::size_t r = 0; r < kJackknifeBatches; ++r) {
            const auto [blo, bhi] = batch_range(rows.size(), r);
            const double rep =
                find_root(rows, p2h, root - 0.05, std::min(cut, root + 0.05), cut, tol, blo, bhi,
                          nullptr);
            reps[r] = std::isnan(rep) ? e0.value + 1.0 : rep;
        }
        pt.energy_stderr = jackknife_stderr(reps, root);
    }
    return pt;
}

MeffResult effective_mass(const Ensemble& ensemble, const E0Result& e0) {
    if (ensemble.rows.empty()) throw std::invalid_argument("effective_mass: empty ensemble");
    const auto rows = std::span<const DressedSample>(ensemble.rows);

    const TiltedSums s = tilted_sums(rows, 0.0, e0.value);
    if (!(s.wsig > 0.0)) throw DiagnosticError("effective_mass: degenerate denominator");

    MeffResult res;
    res.value = s.wtau / s.wsig;

    if (jackknife_feasible(rows.size())) {
        std::vector<double> reps(kJackknifeBatches);
        for (std::size_t r = 0; r < kJackknifeBatches; ++r) {
            const auto [blo, bhi] = batch_range(rows.size(), r);
            const double e0r =
                solve_e0_on(rows, ensemble.meta.alpha, 1e-6, blo, bhi, e0.value, nullptr);
            const TiltedSums sr = tilted_sums(rows, 0.0, e0r, blo, bhi);
            reps[r] = sr.wtau / sr.wsig;
        }
        res.stderr_ = jackknife_stderr(reps, res.value);
    }
    return res;
}

double resolvent_at(const Ensemble& ensemble, double P, double lambda,
                    const EnergyCurvePoint& ep) {
    const double p2h = 0.5 * P * P;
    if (!(lambda < p2h)) throw std::domain_error("resolvent: lambda must be < P^2/2");
    if (!(lambda < ep.energy)) throw std::domain_error("resolvent: lambda must be < E(P)");
    const LambdaEstimate lam = lambda_hat(ensemble, P, lambda);
    if (lam.value >= 1.0)
        throw std::domain_error("resolvent: Lambda >= 1 below E(P); inconsistent inputs");
    return 1.0 / ((p2h - lambda) * (1.0 - lam.value));
}

double resolvent(const Ensemble& ensemble, double P, double lambda, const E0Result& e0) {
    return resolvent_at(ensemble, P, lambda, solve_EP(ensemble, P, e0));
}

OverlapResult overlap(const Ensemble& ensemble, double P, const EnergyCurvePoint& ep) {
    if (ep.kind == PointKind::plateau)
        throw std::domain_error("overlap: no ground state at a plateau point");
    const auto rows = std::span<const DressedSample>(ensemble.rows);
    const TiltedSums s = tilted_sums(rows, 0.5 * P * P, ep.energy);
    const double m1 = std::exp(s.shift) * s.wtau / static_cast<double>(s.count);
    if (!(m1 > 0.0)) throw DiagnosticError("overlap: degenerate T1 moment");

    OverlapResult res;
    res.value = 1.0 / ((0.5 * P * P - ep.energy) * m1);
    res.in_physical_range = res.value > 0.0 && res.value <= 1.0 + 1e-12;
    return res;
}

I0Probe i0_probe(const Ensemble& ensemble, double P, const E0Result& e0) {
    if (ensemble.rows.empty()) throw std::invalid_argument("i0_probe: empty ensemble");
    const auto rows = std::span<const DressedSample>(ensemble.rows);
    const double p2h = 0.5 * P * P;
    const double lambda = e0.value + 1.0;

    const TiltedSums s = tilted_sums(rows, p2h, lambda);
    I0Probe probe;
    probe.estimate = std::exp(log_lambda_from(s));  // may be inf; reported as such
    probe.ess = s.w2 > 0.0 ? s.w * s.w / s.w2 : 0.0;
    probe.max_share = s.w > 0.0 ? 1.0 / s.w : 1.0;

    // Hill estimate of the weight tail index on the top order statistics.
    const std::size_t n = rows.size();
    std::vector<double> exponents(n);
    for (std::size_t j = 0; j < n; ++j) exponents[j] = exponent_of(rows[j], p2h, lambda);
    const std::size_t k = std::min<std::size_t>(std::max<std::size_t>(n / 20, 10), 1000);
    if (k + 1 < n) {
        std::nth_element(exponents.begin(), exponents.begin() + static_cast<std::ptrdiff_t>(k),
                         exponents.end(), std::greater<double>());
        const double ref = exponents[k];
        double h = 0.0;
        for (std::size_t i = 0; i < k; ++i) h += exponents[i] - ref;
        h /= static_cast<double>(k);
        probe.hill_tail_index = h > 0.0 ? 1.0 / h : std::numeric_limits<double>::infinity();
    } else {
        probe.hill_tail_index = std::numeric_limits<double>::infinity();
    }

    if (probe.hill_tail_index < 2.0 || probe.max_share > 0.05 || !std::isfinite(probe.estimate))
        probe.verdict = TailVerdict::heavy_tailed;
    else if (probe.hill_tail_index >= 4.0 && probe.ess >= 100.0 && probe.max_share <= 0.01)
        probe.verdict = TailVerdict::finite_looking;
    else
        probe.verdict = TailVerdict::inconclusive;
    return probe;
}

EnergyCurve energy_curve(const Ensemble& ensemble, std::span<const double> P_grid, double tol,
                         bool with_stderr) {
    if (P_grid.empty()) throw std::invalid_argument("energy_curve: empty grid");
    for (std::size_t i = 0; i < P_grid.size(); ++i) {
        if (P_grid[i] < 0.0) throw std::invalid_argument("energy_curve: P must be >= 0");
        if (i > 0 && P_grid[i] <= P_grid[i - 1])
            throw std::invalid_argument("energy_curve: grid must be strictly increasing");
    }

    EnergyCurve curve;
    curve.e0 = solve_E0(ensemble, tol);
    curve.meff = effective_mass(ensemble, curve.e0);
    curve.points.reserve(P_grid.size());
    for (const double P : P_grid)
        curve.points.push_back(solve_EP(ensemble, P, curve.e0, tol, with_stderr));

    // Diagnostics. Pathwise these hold exactly; the slack covers bisection
    // tolerance plus, when available, two jackknife standard errors.
    auto slack2 = [&](std::size_t i, std::size_t j) {
        return 1e-5 + 2.0 * (curve.points[i].energy_stderr + curve.points[j].energy_stderr);
    };
    CurveDiagnostics& d = curve.diagnostics;
    d.monotone = true;
    d.concave_in_p2 = true;
    d.quasiparticle_bound = true;

    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
        const double viol = curve.points[i].energy - curve.points[i + 1].energy;
        d.max_monotone_violation = std::max(d.max_monotone_violation, viol);
        if (viol > slack2(i, i + 1)) d.monotone = false;
    }

    for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& m = curve.points[i];
        const auto& b = curve.points[i + 1];
        if (a.kind != PointKind::interior_root || m.kind != PointKind::interior_root ||
            b.kind != PointKind::interior_root)
            continue;
        const double xa = a.P * a.P, xm = m.P * m.P, xb = b.P * b.P;
        const double chord = a.energy + (b.energy - a.energy) * (xm - xa) / (xb - xa);
        const double viol = chord - m.energy;  // concave: value above chord
        d.max_concavity_violation = std::max(d.max_concavity_violation, viol);
        if (viol > slack2(i - 1, i + 1) + 2.0 * m.energy_stderr) d.concave_in_p2 = false;
    }

    for (const auto& pt : curve.points) {
        if (pt.kind != PointKind::interior_root) continue;
        const double bound = pt.P * pt.P / (2.0 * curve.meff.value);
        const double slack = 1e-5 + 2.0 * (pt.energy_stderr + curve.e0.stderr_ +
                                           bound / curve.meff.value * curve.meff.stderr_);
        const double viol = (pt.energy - curve.e0.value) - bound;
        d.max_quasiparticle_violation = std::max(d.max_quasiparticle_violation, viol);
        if (viol > slack) d.quasiparticle_bound = false;
    }
    return curve;
}

}  // namespace polaron
