#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "stpg/problems.hpp"

using namespace stpg;

TEST(SmoothProblem1d, ResidualVanishes) {
    const auto p = problem_1d_smooth();
    EXPECT_NEAR(manufactured_residual(p, {0.3, 0.0}, 0.7), 0.0, 1e-10);
    EXPECT_NO_THROW(check_manufactured(p, 1));
}

TEST(SmoothProblem1d, InitialAndBoundaryValuesVanish) {
    const auto p = problem_1d_smooth();
    for (double x : {0.0, 0.2, 0.6, 1.0}) {
        EXPECT_NEAR(p.exact->value({x, 0}, 0.0), 0.0, 1e-15);
        EXPECT_NEAR(p.initial({x, 0}), 0.0, 1e-15);
    }
    for (double t : {0.1, 0.5, 0.9}) {
        EXPECT_NEAR(p.exact->value({0, 0}, t), 0.0, 1e-15);
        EXPECT_NEAR(p.exact->value({1, 0}, t), 0.0, 1e-14);
    }
    EXPECT_EQ(p.dimension, 1);
    EXPECT_EQ(p.final_time, 1.0);
}

TEST(SmoothProblem1d, RightHandSideFormula) {
    const auto p = problem_1d_smooth();
    const double x = 0.37, t = 0.61, tp = 2 * M_PI;
    EXPECT_NEAR(p.rhs({x, 0}, t), tp * std::sin(tp * x) * (std::cos(tp * t) + tp * std::sin(tp * t)),
                1e-12);
}

TEST(SmoothProblem2d, ResidualAndValues) {
    const auto p = problem_2d_smooth();
    EXPECT_NEAR(manufactured_residual(p, {0.2, 0.6}, 0.4), 0.0, 1e-10);
    EXPECT_NEAR(p.exact->value({0.5, 0.5}, 0.5), 1.0, 1e-15);
    EXPECT_NEAR(p.exact->value({0.3, 0.8}, 0.0), 0.0, 1e-15);
    EXPECT_NO_THROW(check_manufactured(p, 2));
    EXPECT_EQ(p.dimension, 2);
}

TEST(LowRegularity, KinkAndInitialValue) {
    const auto p = problem_1d_lowreg(0.1);
    for (double x : {0.1, 0.5, 0.9}) EXPECT_EQ(p.exact->value({x, 0}, 0.5), 0.0);
    EXPECT_NEAR(p.initial({0.5, 0}), std::pow(0.5, 1.45), 1e-15);
    EXPECT_NEAR(p.initial({0.5, 0}), 0.36600, 5e-5);
    EXPECT_NEAR(manufactured_residual(p, {0.3, 0}, 0.9), 0.0, 1e-9);
    EXPECT_NO_THROW(check_manufactured(p, 3));
    ASSERT_EQ(p.time_breakpoints.size(), 1u);
    EXPECT_EQ(p.time_breakpoints[0], 0.5);
}

TEST(LowRegularity, TimeDerivativeMatchesDifferenceQuotient) {
    const auto p = problem_1d_lowreg(0.3);
    const double h = 1e-6;
    for (double t : {0.1, 0.45, 0.55, 0.95}) {
        const double fd = (p.exact->value({0.4, 0}, t + h) - p.exact->value({0.4, 0}, t - h)) / (2 * h);
        EXPECT_NEAR(p.exact->time_derivative({0.4, 0}, t), fd, 1e-6);
    }
}

TEST(LowRegularity, RejectsEpsilonOutsideUnitInterval) {
    EXPECT_THROW(problem_1d_lowreg(0.0), std::invalid_argument);
    EXPECT_THROW(problem_1d_lowreg(1.0), std::invalid_argument);
    EXPECT_THROW(problem_1d_lowreg(-0.2), std::invalid_argument);
}

TEST(ImpulseProblem, Structure) {
    const auto p = problem_impulse([](const Point& x) { return std::sin(M_PI * x.x); }, 0.5);
    EXPECT_FALSE(p.exact.has_value());
    ASSERT_EQ(p.impulses.size(), 1u);
    EXPECT_EQ(p.impulses[0].time, 0.5);
    EXPECT_EQ(p.rhs({0.3, 0}, 0.2), 0.0);
    EXPECT_EQ(p.initial({0.3, 0}), 0.0);
    EXPECT_NO_THROW(problem_impulse([](const Point&) { return 1.0; }, 1.0));
    EXPECT_THROW(problem_impulse([](const Point&) { return 1.0; }, 0.0), std::invalid_argument);
    EXPECT_THROW(problem_impulse([](const Point&) { return 1.0; }, 1.5), std::invalid_argument);
}

TEST(ManufacturedCheck, DetectsInconsistentExactSolution) {
    auto p = problem_1d_smooth();
    p.rhs = [](const Point& x, double t) { return std::sin(M_PI * x.x) * t; };
    EXPECT_THROW(check_manufactured(p, 9), std::invalid_argument);
    EXPECT_THROW(manufactured_residual(problem_homogeneous([](const Point&) { return 0.0; }), {0.1, 0}, 0.1),
                 std::invalid_argument);
}

TEST(ManufacturedCheck, RandomPointsAcrossSeeds) {
    std::mt19937 gen(99);
    for (int s = 0; s < 5; ++s) {
        const auto seed = gen();
        EXPECT_NO_THROW(check_manufactured(problem_1d_smooth(), seed));
        EXPECT_NO_THROW(check_manufactured(problem_2d_smooth(), seed));
        EXPECT_NO_THROW(check_manufactured(problem_1d_lowreg(0.1), seed));
    }
}

TEST(Registry, KnownIds) {
    EXPECT_EQ(make_problem("heat1d-smooth").id, "heat1d-smooth");
    EXPECT_EQ(make_problem("heat2d-smooth").dimension, 2);
    ProblemParams lp;
    lp.epsilon = 0.5;
    const auto low = make_problem("heat1d-lowreg", lp);
    EXPECT_NEAR(low.initial({0.5, 0}), std::pow(0.5, 1.25), 1e-15);
    ProblemParams ip;
    ip.impulse_time = 0.25;
    const auto imp = make_problem("impulse", ip);
    EXPECT_EQ(imp.impulses[0].time, 0.25);
    ip.dimension = 2;
    EXPECT_NEAR(make_problem("impulse", ip).impulses[0].jump({0.5, 0.5}), 1.0, 1e-15);
    EXPECT_THROW(make_problem("heat3d"), std::invalid_argument);
}
