#include "polaron/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polaron {

namespace {

void require_valid_intervals(std::span<const Interval> intervals) {
    for (const auto& iv : intervals) {
        if (!(0.0 <= iv.birth && iv.birth < iv.death))
            throw std::invalid_argument("invalid interval: birth/death out of order");
    }
}

// G = I + D_u C D_u, factored in place. G >= I, so the factorization cannot
// fail for valid inputs.
Matrix observation_gram_factor(std::span<const Interval> intervals, std::span<const double> u) {
    Matrix g = overlap_matrix(intervals);
    const std::size_t n = g.n;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) g(i, j) *= u[i] * u[j];
        g(i, i) += 1.0;
    }
    if (!cholesky_inplace(g))
        throw std::logic_error("observation Gram matrix not positive definite");
    return g;
}

}  // namespace

Matrix overlap_matrix(std::span<const Interval> intervals) {
    require_valid_intervals(intervals);
    const std::size_t n = intervals.size();
    Matrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double lo = std::max(intervals[i].birth, intervals[j].birth);
            const double hi = std::min(intervals[i].death, intervals[j].death);
            const double v = std::max(0.0, hi - lo);
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

DisplacementDraw sample_displacements_at(Rng& rng, std::span<const Interval> intervals, double t) {
    require_valid_intervals(intervals);
    if (t < 0.0) throw std::invalid_argument("sample_displacements_at: t must be >= 0");

    std::vector<double> edges;
    edges.reserve(2 * intervals.size() + 2);
    for (const auto& iv : intervals) {
        edges.push_back(iv.birth);
        edges.push_back(iv.death);
    }
    edges.push_back(0.0);
    edges.push_back(t);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    DisplacementDraw draw;
    draw.per_interval.assign(intervals.size(), {0.0, 0.0, 0.0});
    draw.at_t = {0.0, 0.0, 0.0};

    for (std::size_t c = 0; c + 1 < edges.size(); ++c) {
        const double lo = edges[c];
        const double hi = edges[c + 1];
        const double len = hi - lo;
        if (len <= 0.0) continue;

        const bool in_t = 0.0 <= lo && hi <= t;
        bool needed = in_t;
        for (std::size_t i = 0; i < intervals.size() && !needed; ++i)
            needed = intervals[i].birth <= lo && hi <= intervals[i].death;
        if (!needed) continue;

        const double sd = std::sqrt(len);
        const std::array<double, 3> cell = {sd * rng.normal(), sd * rng.normal(),
                                            sd * rng.normal()};
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            if (intervals[i].birth <= lo && hi <= intervals[i].death) {
                for (int d = 0; d < 3; ++d) draw.per_interval[i][d] += cell[d];
            }
        }
        if (in_t) {
            for (int d = 0; d < 3; ++d) draw.at_t[d] += cell[d];
        }
    }
    return draw;
}

std::vector<std::array<double, 3>> sample_displacements(Rng& rng, const Excursion& exc) {
    return sample_displacements_at(rng, exc.intervals, 0.0).per_interval;
}

USample sample_u(Rng& rng, std::span<const double> displacement_norms) {
    USample out;
    out.u.reserve(displacement_norms.size());
    for (const double r : displacement_norms) {
        if (!(r > 0.0)) throw std::invalid_argument("sample_u: displacement norm must be > 0");
        out.u.push_back(std::abs(rng.normal()) / r);
        out.log_weight -= std::log(r);
    }
    return out;
}

double sigma_squared_t(std::span<const Interval> intervals, std::span<const double> u, double t) {
    if (u.size() != intervals.size())
        throw std::invalid_argument("sigma_squared_t: u/interval size mismatch");
    if (t < 0.0) throw std::invalid_argument("sigma_squared_t: t must be >= 0");
    for (const double ui : u)
        if (!(ui >= 0.0)) throw std::invalid_argument("sigma_squared_t: u must be >= 0");
    if (intervals.empty()) return t;

    const std::size_t n = intervals.size();
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double olap =
            std::max(0.0, std::min(intervals[i].death, t) - std::max(intervals[i].birth, 0.0));
        b[i] = u[i] * olap;
    }
    const Matrix factor = observation_gram_factor(intervals, u);
    std::vector<double> x = b;
    cholesky_solve(factor, x);
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) quad += b[i] * x[i];

    const double result = t - quad;
    if (result < -1e-10)
        throw std::logic_error("sigma_squared_t: negative residual variance");
    return result;
}

double sigma_squared(const DressedExcursion& dressed) {
    return sigma_squared_t(dressed.excursion.intervals, dressed.u, dressed.excursion.tau);
}

double log_gaussian_normalization(std::span<const Interval> intervals, std::span<const double> u) {
    if (u.size() != intervals.size())
        throw std::invalid_argument("gaussian_normalization: u/interval size mismatch");
    for (const double ui : u)
        if (!(ui >= 0.0)) throw std::invalid_argument("gaussian_normalization: u must be >= 0");
    if (intervals.empty()) return 0.0;
    const Matrix factor = observation_gram_factor(intervals, u);
    return -1.5 * cholesky_logdet(factor);
}

double gaussian_normalization(std::span<const Interval> intervals, std::span<const double> u) {
    return std::exp(log_gaussian_normalization(intervals, u));
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate01(const std::function<double(double)>& f, double tol) {
    const double fa = f(1e-300);
    const double fb = f(1.0 - 1e-16);
    const double fm = f(0.5);
    const double whole = (fa + 4.0 * fm + fb) / 6.0;
    return adaptive_simpson(f, 0.0, 1.0, fa, fm, fb, whole, tol, 40);
}

}  // namespace

double u_functional_quadrature(std::span<const Interval> intervals, double t,
                               const std::function<double(double)>& g, double rel_tol) {
    const std::size_t n = intervals.size();
    if (n > 2)
        throw std::invalid_argument("u_functional_quadrature: only n <= 2 supported");
    if (n == 0) return g(t);

    const double scale = std::pow(2.0 / std::numbers::pi, static_cast<double>(n) / 2.0);
    // Map each axis u = s/(1-s), du = ds/(1-s)^2.
    if (n == 1) {
        auto integrand = [&](double s) {
            const double u = s / (1.0 - s);
            const double jac = 1.0 / ((1.0 - s) * (1.0 - s));
            const std::array<double, 1> uv = {u};
            return gaussian_normalization(intervals, std::span<const double>(uv)) *
                   g(sigma_squared_t(intervals, std::span<const double>(uv), t)) * jac;
        };
        return scale * integrate01(integrand, rel_tol);
    }
    auto outer = [&](double s1) {
        const double u1 = s1 / (1.0 - s1);
        const double jac1 = 1.0 / ((1.0 - s1) * (1.0 - s1));
        auto inner = [&](double s2) {
            const double u2 = s2 / (1.0 - s2);
            const double jac2 = 1.0 / ((1.0 - s2) * (1.0 - s2));
            const std::array<double, 2> uv = {u1, u2};
            return gaussian_normalization(intervals, std::span<const double>(uv)) *
                   g(sigma_squared_t(intervals, std::span<const double>(uv), t)) * jac2;
        };
        return integrate01(inner, rel_tol) * jac1;
    };
    return scale * integrate01(outer, rel_tol);
}

}  // namespace polaron
