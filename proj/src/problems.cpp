#include "stpg/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace stpg {
namespace {
constexpr double pi = std::numbers::pi;
}

ProblemSpec problem_1d_smooth() {
    ProblemSpec p;
    p.id = "heat1d-smooth";
    p.dimension = 1;
    p.final_time = 1.0;
    p.rhs = [](const Point& x, double t) {
        return 2.0 * pi * std::sin(2.0 * pi * x.x) *
               (std::cos(2.0 * pi * t) + 2.0 * pi * std::sin(2.0 * pi * t));
    };
    p.initial = [](const Point&) { return 0.0; };
    ExactSolution u;
    u.value = [](const Point& x, double t) {
        return std::sin(2.0 * pi * x.x) * std::sin(2.0 * pi * t);
    };
    u.time_derivative = [](const Point& x, double t) {
        return 2.0 * pi * std::sin(2.0 * pi * x.x) * std::cos(2.0 * pi * t);
    };
    u.laplacian = [](const Point& x, double t) {
        return -4.0 * pi * pi * std::sin(2.0 * pi * x.x) * std::sin(2.0 * pi * t);
    };
    u.gradient = [](const Point& x, double t) {
        return std::array<double, 2>{2.0 * pi * std::cos(2.0 * pi * x.x) * std::sin(2.0 * pi * t),
                                     0.0};
    };
    p.exact = std::move(u);
    return p;
}

ProblemSpec problem_2d_smooth() {
    ProblemSpec p;
    p.id = "heat2d-smooth";
    p.dimension = 2;
    p.final_time = 1.0;
    p.rhs = [](const Point& x, double t) {
        return pi * std::sin(pi * x.x) * std::sin(pi * x.y) *
               (std::cos(pi * t) + 2.0 * pi * std::sin(pi * t));
    };
    p.initial = [](const Point&) { return 0.0; };
    ExactSolution u;
    u.value = [](const Point& x, double t) {
        return std::sin(pi * x.x) * std::sin(pi * x.y) * std::sin(pi * t);
    };
    u.time_derivative = [](const Point& x, double t) {
        return pi * std::sin(pi * x.x) * std::sin(pi * x.y) * std::cos(pi * t);
    };
    u.laplacian = [](const Point& x, double t) {
        return -2.0 * pi * pi * std::sin(pi * x.x) * std::sin(pi * x.y) * std::sin(pi * t);
    };
    u.gradient = [](const Point& x, double t) {
        const double st = std::sin(pi * t);
        return std::array<double, 2>{pi * std::cos(pi * x.x) * std::sin(pi * x.y) * st,
                                     pi * std::sin(pi * x.x) * std::cos(pi * x.y) * st};
    };
    p.exact = std::move(u);
    return p;
}

ProblemSpec problem_1d_lowreg(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("problem_1d_lowreg: epsilon must lie in (0, 1)");
    const double alpha = (3.0 - epsilon) / 2.0;
    auto temporal = [alpha](double t) { return std::pow(std::abs(t - 0.5), alpha); };
    auto temporal_dot = [alpha](double t) {
        const double d = t - 0.5;
        if (d == 0.0) return 0.0;
        return (d > 0.0 ? 1.0 : -1.0) * alpha * std::pow(std::abs(d), alpha - 1.0);
    };

    ProblemSpec p;
    p.id = "heat1d-lowreg";
    p.dimension = 1;
    p.final_time = 1.0;
    p.time_breakpoints = {0.5};
    p.rhs = [=](const Point& x, double t) {
        return (temporal_dot(t) + pi * pi * temporal(t)) * std::sin(pi * x.x);
    };
    p.initial = [=](const Point& x) { return temporal(0.0) * std::sin(pi * x.x); };
    ExactSolution u;
    u.value = [=](const Point& x, double t) { return temporal(t) * std::sin(pi * x.x); };
    u.time_derivative = [=](const Point& x, double t) {
        return temporal_dot(t) * std::sin(pi * x.x);
    };
    u.laplacian = [=](const Point& x, double t) {
        return -pi * pi * temporal(t) * std::sin(pi * x.x);
    };
    u.gradient = [=](const Point& x, double t) {
        return std::array<double, 2>{pi * temporal(t) * std::cos(pi * x.x), 0.0};
    };
    p.exact = std::move(u);
    return p;
}

ProblemSpec problem_impulse(SpatialFunction zeta, double t_star, int dimension,
                            double final_time) {
    if (!(t_star > 0.0 && t_star <= final_time))
        throw std::invalid_argument("problem_impulse: t_star must lie in (0, T]");
    ProblemSpec p;
    p.id = "impulse";
    p.dimension = dimension;
    p.final_time = final_time;
    p.rhs = [](const Point&, double) { return 0.0; };
    p.initial = [](const Point&) { return 0.0; };
    p.impulses.push_back({t_star, std::move(zeta)});
    return p;
}

ProblemSpec problem_homogeneous(SpatialFunction u0, int dimension, double final_time) {
    ProblemSpec p;
    p.id = "homogeneous";
    p.dimension = dimension;
    p.final_time = final_time;
    p.rhs = [](const Point&, double) { return 0.0; };
    p.initial = std::move(u0);
    return p;
}

double manufactured_residual(const ProblemSpec& problem, const Point& x, double t) {
    if (!problem.exact)
        throw std::invalid_argument("manufactured_residual: problem has no exact solution");
    const auto& u = *problem.exact;
    return u.time_derivative(x, t) - u.laplacian(x, t) - problem.rhs(x, t);
}

void check_manufactured(const ProblemSpec& problem, std::uint64_t seed, int samples,
                        double tol) {
    if (!problem.exact) return;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < samples; ++s) {
        const Point x{unit(rng), problem.dimension == 2 ? unit(rng) : 0.0};
        const double t = problem.final_time * unit(rng);
        const double r = manufactured_residual(problem, x, t);
        const double scale = std::max(1.0, std::abs(problem.rhs(x, t)));
        if (!(std::abs(r) <= tol * scale))
            throw std::invalid_argument("problem '" + problem.id +
                                        "': exact solution does not satisfy the PDE (residual " +
                                        std::to_string(r) + " at t=" + std::to_string(t) + ")");
    }
}

ProblemSpec make_problem(const std::string& id, const ProblemParams& params) {
    if (id == "heat1d-smooth") return problem_1d_smooth();
    if (id == "heat2d-smooth") return problem_2d_smooth();
    if (id == "heat1d-lowreg") return problem_1d_lowreg(params.epsilon);
    if (id == "impulse") {
        const int dim = params.dimension;
        SpatialFunction zeta = [dim](const Point& x) {
            return dim == 2 ? std::sin(pi * x.x) * std::sin(pi * x.y) : std::sin(pi * x.x);
        };
        return problem_impulse(std::move(zeta), params.impulse_time, dim);
    }
    throw std::invalid_argument("unknown problem id '" + id + "'");
}

}  // namespace stpg
