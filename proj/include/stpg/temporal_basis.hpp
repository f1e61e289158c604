#pragma once

#include <vector>

#include <Eigen/Dense>

namespace stpg {

/// Polynomial basis of a given degree on the reference interval [0, 1].
///
/// `Legendre` is the shifted family P_j(2t - 1), orthogonal in L2(0, 1) with
/// squared norms 1 / (2j + 1). `NodalLagrange` interpolates at the
/// Gauss-Lobatto points, so the first and last functions carry the endpoint
/// values.
class TemporalBasis {
public:
    enum class Kind { NodalLagrange, Legendre };

    TemporalBasis(int degree, Kind kind);

    int degree() const { return degree_; }
    Kind kind() const { return kind_; }
    int size() const { return degree_ + 1; }

    double value(int j, double tau) const;
    /// d/dtau on the reference interval.
    double derivative(int j, double tau) const;

    /// Interpolation nodes (Lagrange only; empty for Legendre).
    const std::vector<double>& nodes() const { return nodes_; }

private:
    int degree_;
    Kind kind_;
    std::vector<double> nodes_;
    std::vector<double> denominators_;
};

/// Reference-interval integrals pairing the degree-q Legendre trial basis
/// {L_j} with the degree-(q+1) Lobatto-Lagrange test basis {l_m}.
///
/// On an interval of width k the physical integrals are
///   int L_j l_m ds = k * coupling(m, j),
///   int L_j (-dl_m/ds) ds = -derivative_coupling(m, j),
///   int l_m l_n ds = k * test_mass(m, n),
///   int l_m' l_n' ds = test_stiffness(m, n) / k,
///   int (P l_m)(P l_n) ds = k * projected_test_mass(m, n), P the L2 projector onto degree q.
struct ReferenceTemporalMatrices {
    explicit ReferenceTemporalMatrices(int q);

    int q;
    TemporalBasis trial;
    TemporalBasis test;
    Eigen::MatrixXd coupling;             // (q+2) x (q+1)
    Eigen::MatrixXd derivative_coupling;  // (q+2) x (q+1)
    Eigen::MatrixXd test_mass;            // (q+2) x (q+2)
    Eigen::MatrixXd test_stiffness;       // (q+2) x (q+2)
    Eigen::MatrixXd projected_test_mass;  // (q+2) x (q+2)
};

}  // namespace stpg
