#pragma once

// Quantiles by direct numerical integration of the density and bisection on
// the resulting CDF. Slow, but shares nothing with the library's special
// functions.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

inline double bisect(const std::function<double(double)>& g, double lo, double hi, double target) {
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double normal_cdf(double x) {
    const auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
    return x >= 0.0 ? 0.5 + simpson(pdf, 0.0, x) : 0.5 - simpson(pdf, x, 0.0);
}

// Upper-alpha point: P(Z > z) = alpha.
inline double normal_upper_quantile(double alpha) {
    return bisect(normal_cdf, -10.0, 10.0, 1.0 - alpha);
}

inline double f_density(double x, double d1, double d2) {
    if (x <= 0.0) return 0.0;
    const double log_beta = std::lgamma(d1 / 2) + std::lgamma(d2 / 2) - std::lgamma((d1 + d2) / 2);
    return std::exp(0.5 * d1 * std::log(d1 / d2) + (0.5 * d1 - 1.0) * std::log(x) -
                    0.5 * (d1 + d2) * std::log1p(d1 * x / d2) - log_beta);
}

// Substituting x = u^2 removes the integrable singularity at 0 when d1 = 1.
inline double f_cdf(double x, double d1, double d2) {
    if (x <= 0.0) return 0.0;
    const auto g = [&](double u) {
        if (u > 0.0) return f_density(u * u, d1, d2) * 2.0 * u;
        if (d1 != 1.0) return 0.0;
        return 2.0 * std::exp(-0.5 * std::log(d2) - std::lgamma(0.5) - std::lgamma(d2 / 2) + std::lgamma((1 + d2) / 2));
    };
    return simpson(g, 0.0, std::sqrt(x));
}

inline double f_upper_quantile(double d1, double d2, double alpha) {
    return bisect([&](double x) { return f_cdf(x, d1, d2); }, 0.0, 1000.0, 1.0 - alpha);
}

} // namespace oracle
