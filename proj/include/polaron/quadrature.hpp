#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace polaron {

// Composite Simpson on [0,1], refined until two successive levels agree.
inline double simpson01(const std::function<double(double)>& f, double tol = 1e-12) {
    double prev = 0.0;
    for (std::size_t n = 64; n <= 1u << 20; n *= 2) {
        const double h = 1.0 / static_cast<double>(n);
        double s = f(1e-15) + f(1.0 - 1e-15);
        for (std::size_t i = 1; i < n; ++i)
            s += f(static_cast<double>(i) * h) * (i % 2 ? 4.0 : 2.0);
        s *= h / 3.0;
        if (n > 64 && std::abs(s - prev) <= tol * (1.0 + std::abs(s))) return s;
        prev = s;
    }
    return prev;
}

// Integral of f over [0, inf) via the map k = t/(1-t). The integrand must
// decay at least like 1/k^2.
inline double integrate_semiline(const std::function<double(double)>& f, double tol = 1e-12) {
    return simpson01(
        [&](double t) {
            const double k = t / (1.0 - t);
            return f(k) / ((1.0 - t) * (1.0 - t));
        },
        tol);
}

}  // namespace polaron
