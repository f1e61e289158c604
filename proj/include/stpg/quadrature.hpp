#pragma once

#include <utility>
#include <vector>

namespace stpg {

/// Value and first derivative of the Legendre polynomial P_n at x in [-1, 1].
std::pair<double, double> legendre_with_derivative(int n, double x);

/// Quadrature rule on the reference interval [0, 1]. Weights sum to 1.
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;

    /// n-point Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.
    static QuadratureRule gauss_legendre(int n);

    /// n-point Gauss-Lobatto rule (n >= 2), endpoints included, exact up to 2n-3.
    static QuadratureRule gauss_lobatto(int n);

    std::size_t size() const { return points.size(); }
};

}  // namespace stpg
