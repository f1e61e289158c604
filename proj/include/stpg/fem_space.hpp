#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace stpg {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// A point of the spatial domain; `y` is ignored in one dimension.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

using SpatialFunction = std::function<double(const Point&)>;

/// Quadrature points over the whole spatial domain together with the
/// interpolation operators that evaluate a coefficient vector there.
struct SpatialQuadrature {
    std::vector<Point> points;
    Eigen::VectorXd weights;
    SparseMatrix values;  // points x dofs
    SparseMatrix dx;      // d/dx at points
    SparseMatrix dy;      // d/dy at points (empty in 1D)
};

/// Continuous Lagrange elements of degree p on a uniform mesh of (0,1) or
/// its tensor product (0,1)^2, with homogeneous Dirichlet nodes removed.
///
/// Two-dimensional matrices are built from the one-dimensional factors,
/// M2 = M (x) M and K2 = K (x) M + M (x) K, and the degree of freedom
/// (ix, iy) is stored at index ix + d * iy with d the 1D dof count.
class FemSpace {
public:
    static FemSpace assemble(int dimension, int elements_per_side, int degree);

    int dimension() const { return dimension_; }
    int elements_per_side() const { return elements_; }
    int degree() const { return degree_; }
    int dof_count() const { return static_cast<int>(mass_.rows()); }
    double h() const { return 1.0 / elements_; }

    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& stiffness() const { return stiffness_; }
    const SparseMatrix& mass_1d() const { return mass_1d_; }
    const SparseMatrix& stiffness_1d() const { return stiffness_1d_; }

    Point dof_point(int dof) const;
    const SpatialQuadrature& quadrature() const { return *quadrature_; }

    /// Entries int g * phi_r over the domain.
    Eigen::VectorXd load_vector(const SpatialFunction& g) const;
    /// Nodal interpolant.
    Eigen::VectorXd interpolate(const SpatialFunction& g) const;

    /// Value of the finite element function with coefficients c at x.
    double evaluate(const Eigen::VectorXd& c, const Point& x) const;
    /// Gradient of the finite element function at x (second entry 0 in 1D).
    std::array<double, 2> evaluate_gradient(const Eigen::VectorXd& c, const Point& x) const;

    Eigen::VectorXd solve_mass(const Eigen::VectorXd& rhs) const;
    Eigen::VectorXd solve_stiffness(const Eigen::VectorXd& rhs) const;

    double mass_norm(const Eigen::VectorXd& v) const { return std::sqrt(v.dot(mass_ * v)); }
    double energy_norm(const Eigen::VectorXd& v) const { return std::sqrt(v.dot(stiffness_ * v)); }

private:
    using Factor = Eigen::SimplicialLLT<SparseMatrix>;

    FemSpace() = default;

    // Shape values/derivatives of the 1D element containing x, with dof ids (-1 on the boundary).
    void locate_1d(double x, std::vector<int>& dofs, std::vector<double>& values,
                   std::vector<double>& derivatives) const;

    int dimension_ = 1;
    int elements_ = 0;
    int degree_ = 1;
    std::vector<double> coords_1d_;
    SparseMatrix mass_1d_;
    SparseMatrix stiffness_1d_;
    SparseMatrix mass_;
    SparseMatrix stiffness_;
    std::shared_ptr<const SpatialQuadrature> quadrature_;
    std::shared_ptr<const Factor> mass_factor_;
    std::shared_ptr<const Factor> stiffness_factor_;
};

/// Solves M c = (g, phi_r)_r.
Eigen::VectorXd l2_project(const FemSpace& space, const SpatialFunction& g);

/// Generalized eigenpairs K phi = lambda M phi, ascending, M-orthonormal.
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // columns
};

/// Dense generalized eigensolve. In 2D the Kronecker structure is used:
/// eigenpairs are (lambda_i + lambda_j, phi_j (x) phi_i).
SpectralDecomposition spectral(const FemSpace& space);

/// Direct dense eigensolve of (K, M) regardless of dimension.
SpectralDecomposition spectral_dense(const FemSpace& space);

/// Eigenvalues only, ascending; cheap in 2D.
Eigen::VectorXd spectral_values(const FemSpace& space);

/// (sum_j lambda_j^s (phi_j^T M v)^2)^(1/2), the discrete H^s-dot norm.
double fractional_norm(const FemSpace& space, const SpectralDecomposition& decomposition,
                       const Eigen::VectorXd& v, double s);

}  // namespace stpg
