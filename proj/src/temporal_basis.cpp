#include "stpg/temporal_basis.hpp"

#include <stdexcept>

#include "stpg/quadrature.hpp"

namespace stpg {

TemporalBasis::TemporalBasis(int degree, Kind kind) : degree_(degree), kind_(kind) {
    if (degree < 0) throw std::invalid_argument("TemporalBasis: negative degree");
    if (kind_ == Kind::NodalLagrange) {
        if (degree_ == 0) {
            nodes_ = {0.5};
        } else {
            nodes_ = QuadratureRule::gauss_lobatto(degree_ + 1).points;
            nodes_.front() = 0.0;
            nodes_.back() = 1.0;
        }
        denominators_.resize(nodes_.size());
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            double d = 1.0;
            for (std::size_t i = 0; i < nodes_.size(); ++i)
                if (i != j) d *= nodes_[j] - nodes_[i];
            denominators_[j] = d;
        }
    }
}

double TemporalBasis::value(int j, double tau) const {
    if (kind_ == Kind::Legendre) return legendre_with_derivative(j, 2.0 * tau - 1.0).first;
    double v = 1.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (static_cast<int>(i) != j) v *= tau - nodes_[i];
    return v / denominators_[j];
}

double TemporalBasis::derivative(int j, double tau) const {
    if (kind_ == Kind::Legendre) return 2.0 * legendre_with_derivative(j, 2.0 * tau - 1.0).second;
    // product rule over the numerator factors
    double sum = 0.0;
    for (std::size_t l = 0; l < nodes_.size(); ++l) {
        if (static_cast<int>(l) == j) continue;
        double term = 1.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (static_cast<int>(i) != j && i != l) term *= tau - nodes_[i];
        sum += term;
    }
    return sum / denominators_[j];
}

ReferenceTemporalMatrices::ReferenceTemporalMatrices(int q_)
    : q(q_),
      trial(q_, TemporalBasis::Kind::Legendre),
      test(q_ + 1, TemporalBasis::Kind::NodalLagrange) {
    const int nt = q + 2;
    const int nr = q + 1;
    coupling = Eigen::MatrixXd::Zero(nt, nr);
    derivative_coupling = Eigen::MatrixXd::Zero(nt, nr);
    test_mass = Eigen::MatrixXd::Zero(nt, nt);
    test_stiffness = Eigen::MatrixXd::Zero(nt, nt);
    // integrands have degree <= 2q+2
    const auto rule = QuadratureRule::gauss_legendre(q + 3);
    for (std::size_t g = 0; g < rule.size(); ++g) {
        const double tau = rule.points[g];
        const double w = rule.weights[g];
        for (int m = 0; m < nt; ++m) {
            const double lm = test.value(m, tau);
            const double dlm = test.derivative(m, tau);
            for (int j = 0; j < nr; ++j) {
                const double lj = trial.value(j, tau);
                coupling(m, j) += w * lm * lj;
                derivative_coupling(m, j) += w * dlm * lj;
            }
            for (int n = 0; n < nt; ++n) {
                test_mass(m, n) += w * lm * test.value(n, tau);
                test_stiffness(m, n) += w * dlm * test.derivative(n, tau);
            }
        }
    }
    // projection coefficients of l_m onto L_j are (2j+1) * coupling(m, j)
    Eigen::VectorXd scale(nr);
    for (int j = 0; j < nr; ++j) scale(j) = 2.0 * j + 1.0;
    projected_test_mass = coupling * scale.asDiagonal() * coupling.transpose();
}

}  // namespace stpg
