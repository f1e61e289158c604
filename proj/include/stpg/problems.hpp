#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stpg/fem_space.hpp"

namespace stpg {

using SpaceTimeFunction = std::function<double(const Point&, double)>;

/// Closed-form solution used for error measurement and residual checks.
struct ExactSolution {
    SpaceTimeFunction value;
    SpaceTimeFunction time_derivative;
    SpaceTimeFunction laplacian;
    std::function<std::array<double, 2>(const Point&, double)> gradient;
};

/// A prescribed jump of the solution at `time`.
struct Impulse {
    double time;
    SpatialFunction jump;
};

/// du/dt - Laplace(u) = f on (0,1)^d x (0,T], u = 0 on the boundary,
/// u(0) = u0, plus optional impulses.
struct ProblemSpec {
    std::string id;
    int dimension = 1;
    double final_time = 1.0;
    SpaceTimeFunction rhs;
    std::vector<Impulse> impulses;
    SpatialFunction initial;
    std::optional<ExactSolution> exact;
    /// Times where the data lose smoothness; time quadrature is cut there.
    std::vector<double> time_breakpoints;
};

/// f = 2 pi sin(2 pi x)(cos(2 pi t) + 2 pi sin(2 pi t)), u = sin(2 pi x) sin(2 pi t).
ProblemSpec problem_1d_smooth();

/// f = pi sin(pi x) sin(pi y)(cos(pi t) + 2 pi sin(pi t)), u = sin(pi x) sin(pi y) sin(pi t).
ProblemSpec problem_2d_smooth();

/// u = |t - 1/2|^((3 - eps)/2) sin(pi x); only the first time derivative is square integrable.
ProblemSpec problem_1d_lowreg(double epsilon = 0.1);

/// Zero forcing and initial datum with a single jump `zeta` at `t_star`.
ProblemSpec problem_impulse(SpatialFunction zeta, double t_star, int dimension = 1,
                            double final_time = 1.0);

/// Zero forcing with initial datum u0.
ProblemSpec problem_homogeneous(SpatialFunction u0, int dimension = 1, double final_time = 1.0);

/// du/dt - Laplace(u) - f of the attached exact solution at (x, t).
double manufactured_residual(const ProblemSpec& problem, const Point& x, double t);

/// Evaluates the residual at `samples` random space-time points and throws
/// std::invalid_argument if any exceeds tol * max(1, |f|).
void check_manufactured(const ProblemSpec& problem, std::uint64_t seed, int samples = 20,
                        double tol = 1e-8);

/// Parameters accepted by the string-keyed catalog.
struct ProblemParams {
    double epsilon = 0.1;
    double impulse_time = 0.5;
    int dimension = 1;
};

/// Catalog lookup: "heat1d-smooth", "heat2d-smooth", "heat1d-lowreg", "impulse".
ProblemSpec make_problem(const std::string& id, const ProblemParams& params = {});

}  // namespace stpg
