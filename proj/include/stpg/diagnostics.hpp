#pragma once

#include <json.hpp>

#include "stpg/fem_space.hpp"
#include "stpg/solver.hpp"
#include "stpg/time_mesh.hpp"

namespace stpg {

/// Largest total trial dimension (N(q+1)+1) * dofs accepted by the dense diagnostics.
inline constexpr int kDenseDiagnosticsLimit = 2000;

/// Gram matrices of the continuous piecewise P^{q+1} temporal test space on a
/// partition, node-ordered: int X'Y', int XY and int (PX)(PY) with P the
/// interval-wise L2 projector onto degree q.
struct TemporalTestGrams {
    Eigen::MatrixXd derivative;
    Eigen::MatrixXd mass;
    Eigen::MatrixXd projected_mass;
};

TemporalTestGrams temporal_test_grams(const TimePartition& partition, int q);

struct InfSupResult {
    double c_B = 0.0;
    double C_B = 0.0;
};

/// Extreme singular values of G_Y^{-1/2} B G_X^{-1/2}, where B is the
/// space-time operator, G_Y the Gram matrix of
///   ||Y||^2 = int ||A^{1/2} Y1||^2 + ||Y2||^2
/// and G_X that of
///   ||X||^2 = ||X(0)||^2 + sum_i int_{I_i} ||A^{-1/2} X'||^2 + ||A^{1/2} P X||^2,
/// with A^{+-1/2} realized through the discrete spectral decomposition.
InfSupResult infsup_discrete(const FemSpace& space, const TimePartition& partition, int q);

/// Square root of the largest generalized eigenvalue of
///   int ||A^{-1/2} X'||^2 + ||A^{1/2} X||^2   against
///   int ||A^{-1/2} X'||^2 + ||A^{1/2} P X||^2
/// over the full discrete test space. With `include_initial_term` both forms
/// also carry ||X(0)||^2.
double cs_constant(const FemSpace& space, const TimePartition& partition, int q,
                   bool include_initial_term = false);

/// The same constant through the spectral decoupling of space: the maximum
/// over eigenvalues lambda of the temporal pencil
///   (S / lambda + lambda Mt, S / lambda + lambda Pt).
double cs_constant_modal(const Eigen::VectorXd& eigenvalues, const TimePartition& partition,
                         int q, bool include_initial_term = false);

/// k_max * sup_v ||v||_V / ||v||_{V*} = k_max * lambda_max.
double cfl_constant(const Eigen::VectorXd& eigenvalues, double k_max);
double cfl_constant(const SpectralDecomposition& decomposition, double k_max);

struct DiagnosticsReport {
    double c_B = 0.0;
    double C_B = 0.0;
    double c_S = 0.0;
    double C_CFL = 0.0;
};

nlohmann::json to_json(const DiagnosticsReport& report);

/// All four constants on one discretization (dense; guarded).
DiagnosticsReport diagnose(const FemSpace& space, const TimePartition& partition, int q);

/// Discrete stability bound
///   ||U1||^2_{L2(V)} + ||U2(T)||^2 <= c_S^2 ||f||^2_{L2(V*)} + ||U2(0)||^2,
/// with the dual norm of f taken over V_h and time integrals computed with
/// the solver's rule. c_S is evaluated modally; when the partition has more
/// than `max_cs_intervals` intervals, on its first `max_cs_intervals` ones.
struct StabilityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double c_S = 0.0;
    double forcing_dual_sq = 0.0;
    int cs_intervals = 0;
    bool cs_surrogate = false;
    bool holds = false;
};

nlohmann::json to_json(const StabilityReport& report);

StabilityReport stability_check(const ProblemSpec& problem, const FemSpace& space,
                                const SpaceTimeSolution& solution,
                                const SolverOptions& options = {}, int max_cs_intervals = 64);

}  // namespace stpg
