#include "stpg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stpg {

std::pair<double, double> legendre_with_derivative(int n, double x) {
    if (n == 0) return {1.0, 0.0};
    double p_prev = 1.0;
    double p = x;
    for (int k = 2; k <= n; ++k) {
        const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = p_next;
    }
    // P_n' from the standard identity; at the endpoints use the closed form.
    double dp;
    if (std::abs(1.0 - x * x) < 1e-14) {
        const double sign = (x > 0.0 || n % 2 == 1) ? 1.0 : -1.0;
        dp = sign * 0.5 * n * (n + 1.0);
    } else {
        dp = n * (x * p - p_prev) / (x * x - 1.0);
    }
    return {p, dp};
}

QuadratureRule QuadratureRule::gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre_with_derivative(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const auto [p, dp] = legendre_with_derivative(n, x);
        (void)p;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]
        rule.points[i] = 0.5 * (1.0 - x);
        rule.points[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

QuadratureRule QuadratureRule::gauss_lobatto(int n) {
    if (n < 2) throw std::invalid_argument("gauss_lobatto: need at least two points");
    const int m = n - 1;  // interior points are the roots of P_m'
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x;
        if (i == 0) {
            x = 1.0;
        } else {
            // Chebyshev-Gauss-Lobatto initial guess, Newton on P_m'.
            x = std::cos(std::numbers::pi * i / m);
            for (int it = 0; it < 100; ++it) {
                const auto [p, dp] = legendre_with_derivative(m, x);
                // P_m'' from the Legendre ODE: (1-x^2) P'' = 2x P' - m(m+1) P
                const double d2p = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
                const double dx = dp / d2p;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
        }
        const double p = legendre_with_derivative(m, x).first;
        const double w = 2.0 / (m * (m + 1.0) * p * p);
        rule.points[i] = 0.5 * (1.0 - x);
        rule.points[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

}  // namespace stpg
