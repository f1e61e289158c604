#include "stpg/diagnostics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "stpg/errors.hpp"

namespace stpg {
namespace {

void guard(const FemSpace& space, const TimePartition& partition, int q) {
    const long long dim =
        (static_cast<long long>(partition.intervals()) * (q + 1) + 1) * space.dof_count();
    if (dim > kDenseDiagnosticsLimit)
        throw std::invalid_argument("dense diagnostics limited to " +
                                    std::to_string(kDenseDiagnosticsLimit) +
                                    " unknowns, requested " + std::to_string(dim));
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& g, const char* name) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw NumericalFailure(std::string("Gram matrix of ") + name + " is not positive definite");
    return llt.matrixL();
}

double largest_generalized_eigenvalue(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericalFailure("generalized eigensolve for c_S failed (dimension " +
                               std::to_string(a.rows()) + ")");
    return solver.eigenvalues().maxCoeff();
}

// M K^{-1} M assembled from the spectral decomposition: sum_j (M phi_j)(M phi_j)^T / lambda_j.
Eigen::MatrixXd dual_gram(const FemSpace& space, const SpectralDecomposition& dec) {
    const Eigen::MatrixXd m_phi = space.mass() * dec.eigenvectors;
    return m_phi * dec.eigenvalues.cwiseInverse().asDiagonal() * m_phi.transpose();
}

// Full-space test Gram matrices: derivative term, and V-term without/with projection.
struct SpaceTimeGrams {
    Eigen::MatrixXd continuous;
    Eigen::MatrixXd discrete;
};

SpaceTimeGrams space_time_test_grams(const FemSpace& space, const TimePartition& partition, int q,
                                     bool include_initial_term) {
    const auto grams = temporal_test_grams(partition, q);
    const auto dec = spectral(space);
    const Eigen::MatrixXd dual = dual_gram(space, dec);
    const Eigen::MatrixXd k = Eigen::MatrixXd(space.stiffness());
    const Eigen::MatrixXd derivative = Eigen::kroneckerProduct(grams.derivative, dual);
    SpaceTimeGrams out;
    out.continuous = derivative + Eigen::MatrixXd(Eigen::kroneckerProduct(grams.mass, k));
    out.discrete = derivative + Eigen::MatrixXd(Eigen::kroneckerProduct(grams.projected_mass, k));
    if (include_initial_term) {
        const Eigen::Index d = space.dof_count();
        const Eigen::MatrixXd m(space.mass());
        out.continuous.topLeftCorner(d, d) += m;
        out.discrete.topLeftCorner(d, d) += m;
    }
    return out;
}

}  // namespace

TemporalTestGrams temporal_test_grams(const TimePartition& partition, int q) {
    const ReferenceTemporalMatrices ref(q);
    const int n = partition.intervals();
    const Eigen::Index dim = static_cast<Eigen::Index>(n) * (q + 1) + 1;
    TemporalTestGrams g{Eigen::MatrixXd::Zero(dim, dim), Eigen::MatrixXd::Zero(dim, dim),
                        Eigen::MatrixXd::Zero(dim, dim)};
    for (int i = 0; i < n; ++i) {
        const double k = partition.widths()[i];
        const Eigen::Index o = static_cast<Eigen::Index>(i) * (q + 1);
        g.derivative.block(o, o, q + 2, q + 2) += ref.test_stiffness / k;
        g.mass.block(o, o, q + 2, q + 2) += k * ref.test_mass;
        g.projected_mass.block(o, o, q + 2, q + 2) += k * ref.projected_test_mass;
    }
    return g;
}

InfSupResult infsup_discrete(const FemSpace& space, const TimePartition& partition, int q) {
    guard(space, partition, q);
    const Eigen::Index d = space.dof_count();
    const int n = partition.intervals();
    const Eigen::Index dim = (static_cast<Eigen::Index>(n) * (q + 1) + 1) * d;

    // trial Gram: int ||A^{1/2} U1||^2 = sum_i k_i sum_j c_ij^T K c_ij / (2j+1), plus ||U2||^2
    Eigen::MatrixXd gy = Eigen::MatrixXd::Zero(dim, dim);
    const Eigen::MatrixXd k_dense(space.stiffness());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= q; ++j) {
            const Eigen::Index o = (static_cast<Eigen::Index>(i) * (q + 1) + j) * d;
            gy.block(o, o, d, d) = partition.widths()[i] / (2.0 * j + 1.0) * k_dense;
        }
    gy.bottomRightCorner(d, d) = Eigen::MatrixXd(space.mass());

    const Eigen::MatrixXd gx = space_time_test_grams(space, partition, q, true).discrete;
    const Eigen::MatrixXd b(assemble_space_time_operator(space, partition, q));

    const Eigen::MatrixXd ly = cholesky_factor(gy, "the trial space");
    const Eigen::MatrixXd lx = cholesky_factor(gx, "the test space");
    // Ly^{-1} B Lx^{-T} has the singular values of G_Y^{-1/2} B G_X^{-1/2}
    Eigen::MatrixXd z = ly.triangularView<Eigen::Lower>().solve(b);
    z = lx.triangularView<Eigen::Lower>().solve(z.transpose()).transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(z);
    const auto& s = svd.singularValues();
    return {s.minCoeff(), s.maxCoeff()};
}

double cs_constant(const FemSpace& space, const TimePartition& partition, int q,
                   bool include_initial_term) {
    guard(space, partition, q);
    const auto grams = space_time_test_grams(space, partition, q, include_initial_term);
    return std::sqrt(largest_generalized_eigenvalue(grams.continuous, grams.discrete));
}

double cs_constant_modal(const Eigen::VectorXd& eigenvalues, const TimePartition& partition,
                         int q, bool include_initial_term) {
    const auto grams = temporal_test_grams(partition, q);
    double best = 1.0;
    double previous = -1.0;
    for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
        const double lambda = eigenvalues[j];
        if (std::abs(lambda - previous) <= 1e-13 * lambda) continue;  // repeated in 2D
        previous = lambda;
        Eigen::MatrixXd a = grams.derivative / lambda + lambda * grams.mass;
        Eigen::MatrixXd b = grams.derivative / lambda + lambda * grams.projected_mass;
        if (include_initial_term) {
            a(0, 0) += 1.0;
            b(0, 0) += 1.0;
        }
        best = std::max(best, largest_generalized_eigenvalue(a, b));
    }
    return std::sqrt(best);
}

double cfl_constant(const Eigen::VectorXd& eigenvalues, double k_max) {
    return k_max * eigenvalues.maxCoeff();
}

double cfl_constant(const SpectralDecomposition& decomposition, double k_max) {
    return cfl_constant(decomposition.eigenvalues, k_max);
}

nlohmann::json to_json(const DiagnosticsReport& r) {
    return {{"c_B", r.c_B}, {"C_B", r.C_B}, {"c_S", r.c_S}, {"C_CFL", r.C_CFL}};
}

DiagnosticsReport diagnose(const FemSpace& space, const TimePartition& partition, int q) {
    DiagnosticsReport r;
    const auto infsup = infsup_discrete(space, partition, q);
    r.c_B = infsup.c_B;
    r.C_B = infsup.C_B;
    r.c_S = cs_constant(space, partition, q);
    r.C_CFL = cfl_constant(spectral_values(space), partition.k_max());
    return r;
}

nlohmann::json to_json(const StabilityReport& r) {
    return {{"lhs", r.lhs},
            {"rhs", r.rhs},
            {"c_S", r.c_S},
            {"forcing_dual_sq", r.forcing_dual_sq},
            {"cs_intervals", r.cs_intervals},
            {"cs_surrogate", r.cs_surrogate},
            {"holds", r.holds}};
}

StabilityReport stability_check(const ProblemSpec& problem, const FemSpace& space,
                                const SpaceTimeSolution& solution, const SolverOptions& options,
                                int max_cs_intervals) {
    if (!problem.impulses.empty())
        throw std::invalid_argument("stability_check: impulses are not covered by the bound");
    const int q = solution.q;
    const auto& partition = solution.partition;
    StabilityReport r;

    double u1_sq = 0.0;
    for (int i = 0; i < partition.intervals(); ++i)
        for (int j = 0; j <= q; ++j) {
            const auto c = solution.u1[i].col(j);
            u1_sq += partition.widths()[i] / (2.0 * j + 1.0) * c.dot(space.stiffness() * c);
        }
    const double u2_sq = solution.u2.back().dot(space.mass() * solution.u2.back());
    r.lhs = u1_sq + u2_sq;

    const auto rule = time_rule(q, options);
    const auto& t = partition.nodes();
    for (int i = 0; i < partition.intervals(); ++i)
        for (const auto& [s, w] : interval_samples(t[i], t[i + 1], rule, problem.time_breakpoints)) {
            const Eigen::VectorXd b = spatial_load(space, problem.rhs, s);
            r.forcing_dual_sq += w * b.dot(space.solve_stiffness(b));
        }

    r.cs_intervals = std::min(partition.intervals(), max_cs_intervals);
    r.cs_surrogate = r.cs_intervals < partition.intervals();
    const TimePartition cs_partition =
        r.cs_surrogate ? TimePartition(std::vector<double>(t.begin(), t.begin() + r.cs_intervals + 1))
                       : partition;
    r.c_S = cs_constant_modal(spectral_values(space), cs_partition, q);

    const double u0_sq = solution.u2.front().dot(space.mass() * solution.u2.front());
    r.rhs = r.c_S * r.c_S * r.forcing_dual_sq + u0_sq;
    r.holds = r.lhs <= r.rhs;
    return r;
}

}  // namespace stpg
