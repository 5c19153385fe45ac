#include "polaron/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polaron/errors.hpp"

namespace polaron {

double EmpiricalNu::total_mass() const {
    double s = 0.0;
    for (const double w : weights) s += w;
    return s;
}

EmpiricalNu empirical_nu(const Ensemble& ensemble, double P, double h, double T_max) {
    if (ensemble.rows.empty()) throw std::invalid_argument("empirical_nu: empty ensemble");
    if (!(h > 0.0)) throw std::invalid_argument("empirical_nu: h must be > 0");
    if (!(T_max >= h)) throw std::invalid_argument("empirical_nu: T_max must be >= h");

    const auto K = static_cast<std::size_t>(std::llround(T_max / h));
    EmpiricalNu nu;
    nu.h = h;
    nu.P = P;
    nu.alpha = ensemble.meta.alpha;
    nu.source_rows = ensemble.size();
    nu.weights.assign(K + 1, 0.0);

    const double p2h = 0.5 * P * P;
    const double inv_n = 1.0 / static_cast<double>(ensemble.size());
    for (const auto& r : ensemble.rows) {
        const double w = std::exp(r.logw - p2h * r.sigma2) * inv_n;
        const auto k = static_cast<std::size_t>(std::ceil(r.tau / h));
        if (k > K)
            nu.tail_mass += w;
        else
            nu.weights[std::max<std::size_t>(k, 1)] += w;
    }
    return nu;
}

RenewalSolution solve_renewal(const EmpiricalNu& nu) {
    const std::size_t K = nu.bins();
    RenewalSolution sol;
    sol.h = nu.h;
    sol.P = nu.P;
    sol.f.assign(K + 1, 0.0);

    const double p2h = 0.5 * nu.P * nu.P;
    for (std::size_t k = 0; k <= K; ++k) {
        double v = std::exp(-p2h * nu.h * static_cast<double>(k));
        for (std::size_t m = 1; m <= k; ++m) v += nu.weights[m] * sol.f[k - m];
        sol.f[k] = v;
    }
    return sol;
}

SeriesSolution series_solution(const EmpiricalNu& nu, std::size_t n_max) {
    const std::size_t K = nu.bins();
    const double p2h = 0.5 * nu.P * nu.P;

    std::vector<double> term(K + 1);
    for (std::size_t k = 0; k <= K; ++k)
        term[k] = std::exp(-p2h * nu.h * static_cast<double>(k));

    SeriesSolution out;
    out.solution.h = nu.h;
    out.solution.P = nu.P;
    out.solution.f = term;

    std::vector<double> next(K + 1);
    for (std::size_t n = 0; n < n_max; ++n) {
        for (std::size_t k = 0; k <= K; ++k) {
            double v = 0.0;
            for (std::size_t m = 1; m <= k; ++m) v += nu.weights[m] * term[k - m];
            next[k] = v;
        }
        term.swap(next);
        for (std::size_t k = 0; k <= K; ++k) out.solution.f[k] += term[k];
    }

    // Tail of the series is nu^{*(n_max+1)} * f, bounded by mass^{n_max+1} max f.
    const double mass = nu.total_mass();
    const double max_f =
        *std::max_element(out.solution.f.begin(), out.solution.f.end());
    out.remainder_bound = std::pow(mass, static_cast<double>(n_max + 1)) * max_f;
    return out;
}

PlateauFit plateau(const RenewalSolution& solution, double EP) {
    const std::size_t K = solution.f.size() - 1;
    const std::size_t lo = K - K / 4;  // last quartile
    if (K < 8) throw std::invalid_argument("plateau: grid too short");

    // Mean and linear drift of exp(EP*kh) f[k] over the window.
    double sy = 0.0, sx = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t k = lo; k <= K; ++k) {
        const double x = solution.h * static_cast<double>(k);
        const double y = std::exp(EP * x) * solution.f[k];
        sy += y;
        sx += x;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    const double n = static_cast<double>(m);
    const double mean = sy / n;
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    PlateauFit fit;
    fit.value = mean;
    fit.drift_ratio = std::abs(slope) * solution.t_max() / std::abs(mean);
    if (fit.drift_ratio >= 0.05)
        throw NoPlateauError("plateau: drift " + std::to_string(fit.drift_ratio) +
                                 " exceeds 5%; horizon too short",
                             fit.drift_ratio);
    return fit;
}

double laplace_transform(const RenewalSolution& solution, double lambda, double EP) {
    if (!(lambda < EP))
        throw std::domain_error("laplace_transform: lambda must be < EP");

    const std::size_t K = solution.f.size() - 1;
    double integral = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
        const double t = solution.h * static_cast<double>(k);
        const double y = std::exp(lambda * t) * solution.f[k];
        integral += (k == 0 || k == K) ? 0.5 * y : y;
    }
    integral *= solution.h;

    const PlateauFit fit = plateau(solution, EP);
    const double tail =
        fit.value * std::exp((lambda - EP) * solution.t_max()) / (EP - lambda);
    return integral + tail;
}

}  // namespace polaron
