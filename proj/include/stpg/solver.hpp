#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "stpg/fem_space.hpp"
#include "stpg/problems.hpp"
#include "stpg/temporal_basis.hpp"
#include "stpg/time_mesh.hpp"

namespace stpg {

/// Discrete solution of the weak space-time problem.
///
/// `u1[i]` holds U1 restricted to interval i as a dof x (q+1) matrix whose
/// column j multiplies the shifted Legendre polynomial of degree j.
/// `u2[n]` approximates u(t_n); u2[0] is the projected initial datum.
struct SpaceTimeSolution {
    int q = 0;
    TimePartition partition = TimePartition::uniform(1.0, 1);
    std::vector<Eigen::MatrixXd> u1;
    std::vector<Eigen::VectorXd> u2;

    /// U1 evaluated at time t inside interval `interval`.
    Eigen::VectorXd u1_at(int interval, double t) const;
};

nlohmann::json to_json(const SpaceTimeSolution& solution);
SpaceTimeSolution solution_from_json(const nlohmann::json& j);

struct SolverOptions {
    /// Gauss points per interval (and per sub-interval at breakpoints); 0 means q + 3.
    int time_quadrature_points = 0;
    /// Replaces the L2 projection of the problem's initial datum.
    std::optional<Eigen::VectorXd> initial_vector;
};

/// Time rule actually used for degree q under `options`.
QuadratureRule time_rule(int q, const SolverOptions& options);

/// Spatial load vector (f(., t), phi_r)_r.
Eigen::VectorXd spatial_load(const FemSpace& space, const SpaceTimeFunction& f, double t);

/// Test-function moments int_{[a,b]} (f(s), phi_r) l_m(s) ds for the q+2
/// Lobatto-Lagrange test functions of degree q+1 on [a, b].
std::vector<Eigen::VectorXd> interval_moments(const FemSpace& space, const ProblemSpec& problem,
                                              double a, double b,
                                              const ReferenceTemporalMatrices& ref,
                                              const QuadratureRule& rule);

struct StepResult {
    Eigen::MatrixXd u1;
    Eigen::VectorXd u2_out;
};

/// Solves the local problem on one interval:
///   int_I <U1, -X' + A X> ds + <U2_out, X(b)> = int_I <f, X> ds + <U2_in, X(a)>
/// for all X in P^{q+1}(I) (x) V_h. The U2_out row carries only the mass
/// matrix and is eliminated; the remaining (q+1)-block system is factored
/// once per interval width.
class IntervalStepper {
public:
    IntervalStepper(const FemSpace& space, int q);

    /// `moments` as produced by interval_moments; `impulse_load` is the load
    /// vector of a jump located at the right end point.
    StepResult step(double k, const Eigen::VectorXd& u2_in,
                    const std::vector<Eigen::VectorXd>& moments,
                    const Eigen::VectorXd* impulse_load = nullptr);

    const ReferenceTemporalMatrices& reference() const { return ref_; }

private:
    struct Factorization;

    void refactor(double k);

    const FemSpace& space_;
    ReferenceTemporalMatrices ref_;
    double factored_k_ = -1.0;
    std::shared_ptr<Factorization> factor_;
};

/// One interval step; see IntervalStepper.
StepResult step_interval(const FemSpace& space, double a, double b, int q,
                         const Eigen::VectorXd& u2_in, const std::vector<Eigen::VectorXd>& moments,
                         const Eigen::VectorXd* impulse_load = nullptr);

/// Sequential interval-by-interval solve.
SpaceTimeSolution run_decomposed(const ProblemSpec& problem, const FemSpace& space,
                                 const TimePartition& partition, int q,
                                 const SolverOptions& options = {});

/// Matrix of B*(Y, X) with rows indexing trial blocks (interval i, Legendre
/// degree j) at i(q+1)+j followed by the final nodal block, and columns
/// indexing continuous test blocks, node-ordered, at i(q+1)+m.
SparseMatrix assemble_space_time_operator(const FemSpace& space, const TimePartition& partition,
                                          int q);

/// F(X) over the continuous test basis, same column ordering as above.
Eigen::VectorXd assemble_space_time_load(const ProblemSpec& problem, const FemSpace& space,
                                         const TimePartition& partition, int q,
                                         const SolverOptions& options = {});

/// One coupled solve over the whole time interval. Interior nodal values are
/// recovered afterwards with reconstruct_u2.
SpaceTimeSolution solve_global(const ProblemSpec& problem, const FemSpace& space,
                               const TimePartition& partition, int q,
                               const SolverOptions& options = {});

/// Nodal value U2 at t_n computed from U1 on interval n-1 alone.
Eigen::VectorXd reconstruct_u2(const ProblemSpec& problem, const FemSpace& space,
                               const SpaceTimeSolution& solution, int n,
                               const SolverOptions& options = {});

/// Primal (Crank-Nicolson) iterates
///   (M + k/2 K) W_{i+1} = (M - k/2 K) W_i + int_{I_i} (f(s), phi) ds.
std::vector<Eigen::VectorXd> crank_nicolson(const ProblemSpec& problem, const FemSpace& space,
                                            const TimePartition& partition,
                                            const SolverOptions& options = {});

/// Test-space residual r with B*(U, X) - F(X) = X^T r.
Eigen::VectorXd galerkin_residual(const ProblemSpec& problem, const FemSpace& space,
                                  const SpaceTimeSolution& solution,
                                  const SolverOptions& options = {});

}  // namespace stpg
