#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "stpg/solver.hpp"

namespace stpg {

/// Errors of a discrete solution against the exact one.
struct ErrorReport {
    /// (int_0^T |grad(u - U1)|^2 dt)^(1/2)
    double err_u1_L2V = 0.0;
    /// max over n = 1..N of ||u(t_n) - U2(n)||_L2
    double err_u2_nodal_max = 0.0;
    double err_u2_nodal_final = 0.0;
    /// L2 errors at every node, n = 0..N
    std::vector<double> nodal;
};

nlohmann::json to_json(const ErrorReport& report);

/// Time integrals use Gauss rules with q + 4 points per interval (cut at the
/// problem's breakpoints); space integrals use the space's quadrature.
/// Throws std::invalid_argument if the problem has no exact solution.
ErrorReport error_norms(const FemSpace& space, const ProblemSpec& problem,
                        const SpaceTimeSolution& solution);

/// Least-squares slope of log(error) against log(k) over all pairs.
double fit_rate(const std::vector<std::pair<double, double>>& pairs);

/// Slopes between consecutive pairs; first entry is NaN.
std::vector<double> pairwise_rates(const std::vector<std::pair<double, double>>& pairs);

}  // namespace stpg
