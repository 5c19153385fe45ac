#include "polaron/fk.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "polaron/errors.hpp"
#include "polaron/quadrature.hpp"
#include "polaron/rng.hpp"

namespace polaron {

namespace {

constexpr std::size_t kBatchPaths = 512;

// Exact integral over one h x h diagonal cell of exp(-|t-s|) sqrt(2/(pi|t-s|)),
// i.e. of the singular factor replaced by its conditional expectation:
//   2 sqrt(2/pi) [ (h - 1/2) sqrt(pi) erf(sqrt(h)) + sqrt(h) exp(-h) ].
double diagonal_cell(double h) {
    const double sq = std::sqrt(h);
    return 2.0 * std::sqrt(2.0 / std::numbers::pi) *
           ((h - 0.5) * std::sqrt(std::numbers::pi) * std::erf(sq) + sq * std::exp(-h));
}

struct BatchSums {
    double c = 0.0, c2 = 0.0, s = 0.0, s2 = 0.0;
};

}  // namespace

FkEstimate fk_estimate(const PathConfig& cfg) {
    if (!(cfg.T > 0.0)) throw std::invalid_argument("fk_estimate: T must be > 0");
    if (cfg.steps < 2) throw std::invalid_argument("fk_estimate: steps must be >= 2");
    if (cfg.paths < 1) throw std::invalid_argument("fk_estimate: paths must be >= 1");
    if (cfg.alpha < 0.0) throw std::invalid_argument("fk_estimate: alpha must be >= 0");
    if (cfg.P < 0.0) throw std::invalid_argument("fk_estimate: P must be >= 0");

    const std::size_t S = cfg.steps;
    const double h = cfg.T / static_cast<double>(S);
    const double half_h = 0.5 * h;

    std::vector<double> decay(S);  // exp(-d h) for off-diagonal cell distance d
    for (std::size_t d = 1; d < S; ++d) decay[d] = std::exp(-h * static_cast<double>(d));
    const double diag_total = static_cast<double>(S) * diagonal_cell(h);

    const std::size_t nbatch = (cfg.paths + kBatchPaths - 1) / kBatchPaths;
    std::vector<BatchSums> partials(nbatch);

    const auto snb = static_cast<std::ptrdiff_t>(nbatch);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t b = 0; b < snb; ++b) {
        Rng rng(shard_seed(cfg.seed, static_cast<std::uint64_t>(b)));
        const std::size_t lo = static_cast<std::size_t>(b) * kBatchPaths;
        const std::size_t hi = std::min(lo + kBatchPaths, cfg.paths);

        std::vector<double> mx(S), my(S), mz(S);
        BatchSums acc;
        const double sd = std::sqrt(half_h);

        for (std::size_t p = lo; p < hi; ++p) {
            // Walk at half-step resolution: odd nodes are the cell midpoints.
            double x = 0.0, y = 0.0, z = 0.0;
            for (std::size_t i = 0; i < S; ++i) {
                x += sd * rng.normal();
                y += sd * rng.normal();
                z += sd * rng.normal();
                mx[i] = x;
                my[i] = y;
                mz[i] = z;
                x += sd * rng.normal();
                y += sd * rng.normal();
                z += sd * rng.normal();
            }
            const double end_x = x;

            double weight = 1.0;
            if (cfg.alpha > 0.0) {
                double sum = diag_total;
                for (std::size_t i = 1; i < S; ++i) {
                    const double xi = mx[i], yi = my[i], zi = mz[i];
                    double row = 0.0;
                    for (std::size_t j = 0; j < i; ++j) {
                        const double dx = xi - mx[j];
                        const double dy = yi - my[j];
                        const double dz = zi - mz[j];
                        row += decay[i - j] / std::sqrt(dx * dx + dy * dy + dz * dz);
                    }
                    sum += 2.0 * h * h * row;
                }
                weight = std::exp(0.5 * cfg.alpha * sum);
            }

            const double c = std::cos(cfg.P * end_x) * weight;
            const double si = std::sin(cfg.P * end_x) * weight;
            acc.c += c;
            acc.c2 += c * c;
            acc.s += si;
            acc.s2 += si * si;
        }
        partials[static_cast<std::size_t>(b)] = acc;
    }

    BatchSums total;
    for (const auto& p : partials) {
        total.c += p.c;
        total.c2 += p.c2;
        total.s += p.s;
        total.s2 += p.s2;
    }

    const double n = static_cast<double>(cfg.paths);
    FkEstimate est;
    est.value = total.c / n;
    est.sine_mean = total.s / n;
    if (cfg.paths > 1) {
        est.stderr_ = std::sqrt(std::max(0.0, (total.c2 - total.c * total.c / n) / (n - 1.0)) / n);
        est.sine_stderr =
            std::sqrt(std::max(0.0, (total.s2 - total.s * total.s / n) / (n - 1.0)) / n);
    }
    if (est.sine_stderr > 0.0 && std::abs(est.sine_mean) > 4.0 * est.sine_stderr)
        throw DiagnosticError("fk_estimate: sine estimator mean not consistent with 0");
    return est;
}

double perturbative_E0(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("perturbative_E0: alpha must be > 0");
    return -std::numbers::sqrt2 * alpha;
}

double perturbative_E0_quadrature(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("perturbative_E0: alpha must be > 0");
    // -int |v(k)|^2 / (k^2/2 + 1) d^3k with |v(k)|^2 = alpha / (2 pi^2 k^2).
    const double radial =
        integrate_semiline([](double k) { return 1.0 / (0.5 * k * k + 1.0); });
    return -(2.0 * alpha / std::numbers::pi) * radial;
}

double perturbative_meff(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("perturbative_meff: alpha must be > 0");
    return 1.0 + std::numbers::sqrt2 * alpha / 6.0;
}

double perturbative_meff_quadrature(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("perturbative_meff: alpha must be > 0");
    const double radial = integrate_semiline([](double k) {
        const double d = 0.5 * k * k + 1.0;
        return k * k / (d * d * d);
    });
    return 1.0 + (2.0 / 3.0) * (2.0 * alpha / std::numbers::pi) * radial;
}

}  // namespace polaron
