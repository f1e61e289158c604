#include "stpg/fem_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "stpg/errors.hpp"
#include "stpg/quadrature.hpp"

namespace stpg {
namespace {

using Triplet = Eigen::Triplet<double>;

/// Equispaced Lagrange shape functions of degree p on [0, 1].
struct ShapeFunctions1d {
    explicit ShapeFunctions1d(int p) : degree(p) {
        for (int a = 0; a <= p; ++a) nodes.push_back(static_cast<double>(a) / p);
    }

    double value(int a, double xi) const {
        double v = 1.0;
        for (int b = 0; b <= degree; ++b)
            if (b != a) v *= (xi - nodes[b]) / (nodes[a] - nodes[b]);
        return v;
    }

    double derivative(int a, double xi) const {
        double sum = 0.0;
        for (int l = 0; l <= degree; ++l) {
            if (l == a) continue;
            double term = 1.0 / (nodes[a] - nodes[l]);
            for (int b = 0; b <= degree; ++b)
                if (b != a && b != l) term *= (xi - nodes[b]) / (nodes[a] - nodes[b]);
            sum += term;
        }
        return sum;
    }

    int degree;
    std::vector<double> nodes;
};

// Global node g = e * p + a; interior nodes 1 .. n*p - 1 map to dof g - 1.
int dof_of(int element, int local, int p, int n) {
    const int g = element * p + local;
    if (g == 0 || g == n * p) return -1;
    return g - 1;
}

void assemble_1d(int n, int p, SparseMatrix& mass, SparseMatrix& stiffness) {
    const ShapeFunctions1d shape(p);
    const auto rule = QuadratureRule::gauss_legendre(p + 1);
    const double h = 1.0 / n;
    Eigen::MatrixXd me = Eigen::MatrixXd::Zero(p + 1, p + 1);
    Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(p + 1, p + 1);
    for (std::size_t g = 0; g < rule.size(); ++g) {
        for (int a = 0; a <= p; ++a) {
            for (int b = 0; b <= p; ++b) {
                me(a, b) += rule.weights[g] * h * shape.value(a, rule.points[g]) *
                            shape.value(b, rule.points[g]);
                ke(a, b) += rule.weights[g] / h * shape.derivative(a, rule.points[g]) *
                            shape.derivative(b, rule.points[g]);
            }
        }
    }
    const int dofs = n * p - 1;
    std::vector<Triplet> mt, kt;
    for (int e = 0; e < n; ++e) {
        for (int a = 0; a <= p; ++a) {
            const int r = dof_of(e, a, p, n);
            if (r < 0) continue;
            for (int b = 0; b <= p; ++b) {
                const int c = dof_of(e, b, p, n);
                if (c < 0) continue;
                mt.emplace_back(r, c, me(a, b));
                kt.emplace_back(r, c, ke(a, b));
            }
        }
    }
    mass.resize(dofs, dofs);
    stiffness.resize(dofs, dofs);
    mass.setFromTriplets(mt.begin(), mt.end());
    stiffness.setFromTriplets(kt.begin(), kt.end());
}

/// Quadrature with p + 3 Gauss points per element and direction.
SpatialQuadrature quadrature_1d(int n, int p) {
    const ShapeFunctions1d shape(p);
    const auto rule = QuadratureRule::gauss_legendre(p + 3);
    const double h = 1.0 / n;
    const int nq = static_cast<int>(rule.size());
    SpatialQuadrature quad;
    quad.points.resize(n * nq);
    quad.weights.resize(n * nq);
    std::vector<Triplet> vt, dt;
    for (int e = 0; e < n; ++e) {
        for (int g = 0; g < nq; ++g) {
            const int row = e * nq + g;
            quad.points[row] = {h * (e + rule.points[g]), 0.0};
            quad.weights[row] = h * rule.weights[g];
            for (int a = 0; a <= p; ++a) {
                const int c = dof_of(e, a, p, n);
                if (c < 0) continue;
                vt.emplace_back(row, c, shape.value(a, rule.points[g]));
                dt.emplace_back(row, c, shape.derivative(a, rule.points[g]) / h);
            }
        }
    }
    const int dofs = n * p - 1;
    quad.values.resize(n * nq, dofs);
    quad.dx.resize(n * nq, dofs);
    quad.values.setFromTriplets(vt.begin(), vt.end());
    quad.dx.setFromTriplets(dt.begin(), dt.end());
    return quad;
}

SpatialQuadrature tensor_quadrature(const SpatialQuadrature& q1) {
    SpatialQuadrature quad;
    const auto nq = static_cast<Eigen::Index>(q1.points.size());
    quad.points.resize(nq * nq);
    quad.weights.resize(nq * nq);
    for (Eigen::Index qy = 0; qy < nq; ++qy) {
        for (Eigen::Index qx = 0; qx < nq; ++qx) {
            quad.points[qy * nq + qx] = {q1.points[qx].x, q1.points[qy].x};
            quad.weights[qy * nq + qx] = q1.weights[qx] * q1.weights[qy];
        }
    }
    quad.values = Eigen::kroneckerProduct(q1.values, q1.values).eval();
    quad.dx = Eigen::kroneckerProduct(q1.values, q1.dx).eval();
    quad.dy = Eigen::kroneckerProduct(q1.dx, q1.values).eval();
    return quad;
}

std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> factorize(const SparseMatrix& a,
                                                                    const char* name) {
    auto factor = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(a);
    if (factor->info() != Eigen::Success)
        throw NumericalFailure(std::string("Cholesky factorization of the ") + name +
                               " matrix failed");
    return factor;
}

}  // namespace

FemSpace FemSpace::assemble(int dimension, int elements_per_side, int degree) {
    if (dimension != 1 && dimension != 2)
        throw std::invalid_argument("FemSpace: dimension must be 1 or 2");
    if (degree < 1 || degree > 3)
        throw std::invalid_argument("FemSpace: degree must be 1, 2 or 3");
    if (elements_per_side < 2)
        throw std::invalid_argument("FemSpace: need at least 2 elements per side");

    FemSpace space;
    space.dimension_ = dimension;
    space.elements_ = elements_per_side;
    space.degree_ = degree;
    const int d1 = elements_per_side * degree - 1;
    space.coords_1d_.resize(d1);
    for (int r = 0; r < d1; ++r)
        space.coords_1d_[r] = static_cast<double>(r + 1) / (elements_per_side * degree);

    assemble_1d(elements_per_side, degree, space.mass_1d_, space.stiffness_1d_);
    auto q1 = quadrature_1d(elements_per_side, degree);
    if (dimension == 1) {
        space.mass_ = space.mass_1d_;
        space.stiffness_ = space.stiffness_1d_;
        space.quadrature_ = std::make_shared<const SpatialQuadrature>(std::move(q1));
    } else {
        const auto& m = space.mass_1d_;
        const auto& k = space.stiffness_1d_;
        space.mass_ = Eigen::kroneckerProduct(m, m).eval();
        SparseMatrix km = Eigen::kroneckerProduct(k, m).eval();
        SparseMatrix mk = Eigen::kroneckerProduct(m, k).eval();
        space.stiffness_ = km + mk;
        space.quadrature_ = std::make_shared<const SpatialQuadrature>(tensor_quadrature(q1));
    }
    space.mass_.makeCompressed();
    space.stiffness_.makeCompressed();
    space.mass_factor_ = factorize(space.mass_, "mass");
    space.stiffness_factor_ = factorize(space.stiffness_, "stiffness");
    return space;
}

Point FemSpace::dof_point(int dof) const {
    const int d1 = static_cast<int>(coords_1d_.size());
    if (dimension_ == 1) return {coords_1d_[dof], 0.0};
    return {coords_1d_[dof % d1], coords_1d_[dof / d1]};
}

Eigen::VectorXd FemSpace::load_vector(const SpatialFunction& g) const {
    const auto& quad = *quadrature_;
    Eigen::VectorXd weighted(quad.points.size());
    for (std::size_t i = 0; i < quad.points.size(); ++i)
        weighted[i] = quad.weights[i] * g(quad.points[i]);
    return quad.values.transpose() * weighted;
}

Eigen::VectorXd FemSpace::interpolate(const SpatialFunction& g) const {
    Eigen::VectorXd c(dof_count());
    for (int r = 0; r < dof_count(); ++r) c[r] = g(dof_point(r));
    return c;
}

void FemSpace::locate_1d(double x, std::vector<int>& dofs, std::vector<double>& values,
                         std::vector<double>& derivatives) const {
    const ShapeFunctions1d shape(degree_);
    const double h = 1.0 / elements_;
    int e = static_cast<int>(std::floor(x / h));
    e = std::clamp(e, 0, elements_ - 1);
    const double xi = x / h - e;
    dofs.resize(degree_ + 1);
    values.resize(degree_ + 1);
    derivatives.resize(degree_ + 1);
    for (int a = 0; a <= degree_; ++a) {
        dofs[a] = dof_of(e, a, degree_, elements_);
        values[a] = shape.value(a, xi);
        derivatives[a] = shape.derivative(a, xi) / h;
    }
}

double FemSpace::evaluate(const Eigen::VectorXd& c, const Point& x) const {
    std::vector<int> dx, dy;
    std::vector<double> vx, vy, gx, gy;
    locate_1d(x.x, dx, vx, gx);
    if (dimension_ == 1) {
        double sum = 0.0;
        for (std::size_t a = 0; a < dx.size(); ++a)
            if (dx[a] >= 0) sum += c[dx[a]] * vx[a];
        return sum;
    }
    locate_1d(x.y, dy, vy, gy);
    const int d1 = static_cast<int>(coords_1d_.size());
    double sum = 0.0;
    for (std::size_t b = 0; b < dy.size(); ++b)
        for (std::size_t a = 0; a < dx.size(); ++a)
            if (dx[a] >= 0 && dy[b] >= 0) sum += c[dx[a] + d1 * dy[b]] * vx[a] * vy[b];
    return sum;
}

std::array<double, 2> FemSpace::evaluate_gradient(const Eigen::VectorXd& c, const Point& x) const {
    std::vector<int> dx, dy;
    std::vector<double> vx, vy, gx, gy;
    locate_1d(x.x, dx, vx, gx);
    if (dimension_ == 1) {
        double sum = 0.0;
        for (std::size_t a = 0; a < dx.size(); ++a)
            if (dx[a] >= 0) sum += c[dx[a]] * gx[a];
        return {sum, 0.0};
    }
    locate_1d(x.y, dy, vy, gy);
    const int d1 = static_cast<int>(coords_1d_.size());
    std::array<double, 2> g{0.0, 0.0};
    for (std::size_t b = 0; b < dy.size(); ++b) {
        for (std::size_t a = 0; a < dx.size(); ++a) {
            if (dx[a] < 0 || dy[b] < 0) continue;
            const double coeff = c[dx[a] + d1 * dy[b]];
            g[0] += coeff * gx[a] * vy[b];
            g[1] += coeff * vx[a] * gy[b];
        }
    }
    return g;
}

Eigen::VectorXd FemSpace::solve_mass(const Eigen::VectorXd& rhs) const {
    return mass_factor_->solve(rhs);
}

Eigen::VectorXd FemSpace::solve_stiffness(const Eigen::VectorXd& rhs) const {
    return stiffness_factor_->solve(rhs);
}

Eigen::VectorXd l2_project(const FemSpace& space, const SpatialFunction& g) {
    Eigen::VectorXd c = space.solve_mass(space.load_vector(g));
    if (!c.allFinite()) throw NumericalFailure("l2_project: mass solve produced non-finite values");
    return c;
}

namespace {

SpectralDecomposition dense_pencil(const SparseMatrix& k, const SparseMatrix& m) {
    const Eigen::MatrixXd kd(k);
    const Eigen::MatrixXd md(m);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(kd, md);
    if (solver.info() != Eigen::Success)
        throw NumericalFailure("generalized eigensolver did not converge (dimension " +
                               std::to_string(kd.rows()) + ")");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace

SpectralDecomposition spectral_dense(const FemSpace& space) {
    return dense_pencil(space.stiffness(), space.mass());
}

SpectralDecomposition spectral(const FemSpace& space) {
    if (space.dimension() == 1) return spectral_dense(space);
    const auto one = dense_pencil(space.stiffness_1d(), space.mass_1d());
    const auto d = one.eigenvalues.size();
    std::vector<std::pair<double, Eigen::Index>> order;
    order.reserve(d * d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i)
            order.emplace_back(one.eigenvalues[i] + one.eigenvalues[j], j * d + i);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    SpectralDecomposition result;
    result.eigenvalues.resize(d * d);
    result.eigenvectors.resize(d * d, d * d);
    for (Eigen::Index c = 0; c < d * d; ++c) {
        const auto [lambda, idx] = order[c];
        const Eigen::Index i = idx % d;
        const Eigen::Index j = idx / d;
        result.eigenvalues[c] = lambda;
        // entry (ix, iy) at ix + d * iy
        for (Eigen::Index iy = 0; iy < d; ++iy)
            result.eigenvectors.col(c).segment(iy * d, d) =
                one.eigenvectors(iy, j) * one.eigenvectors.col(i);
    }
    return result;
}

Eigen::VectorXd spectral_values(const FemSpace& space) {
    const auto one = dense_pencil(space.stiffness_1d(), space.mass_1d()).eigenvalues;
    if (space.dimension() == 1) return one;
    const auto d = one.size();
    Eigen::VectorXd values(d * d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) values[j * d + i] = one[i] + one[j];
    std::sort(values.begin(), values.end());
    return values;
}

double fractional_norm(const FemSpace& space, const SpectralDecomposition& decomposition,
                       const Eigen::VectorXd& v, double s) {
    const Eigen::VectorXd coeffs = decomposition.eigenvectors.transpose() * (space.mass() * v);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < coeffs.size(); ++j)
        sum += std::pow(decomposition.eigenvalues[j], s) * coeffs[j] * coeffs[j];
    return std::sqrt(sum);
}

}  // namespace stpg
