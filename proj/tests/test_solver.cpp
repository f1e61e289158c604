#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "stpg/solver.hpp"

using namespace stpg;

namespace {

// The one-dof space has M = 1/3, K = 4, so lambda = 12.  Scaling time by 1/12
// turns it into the unit-eigenvalue scalar model.
constexpr double kLambda = 12.0;
const FemSpace& scalar_space() {
    static const FemSpace s = FemSpace::assemble(1, 2, 1);
    return s;
}

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

std::vector<Eigen::VectorXd> zero_moments(int q, int d) {
    return std::vector<Eigen::VectorXd>(q + 2, Eigen::VectorXd::Zero(d));
}

ProblemSpec zero_problem(int dim = 1) {
    return problem_homogeneous([](const Point&) { return 0.0; }, dim);
}

// Independent reference basis for the local oracle.
double legendre(int j, double tau) {
    const double x = 2 * tau - 1;
    switch (j) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return 1.5 * x * x - 0.5;
        default: return 2.5 * x * x * x - 1.5 * x;
    }
}

std::vector<double> lobatto_nodes(int degree) {
    switch (degree) {
        case 1: return {0.0, 1.0};
        case 2: return {0.0, 0.5, 1.0};
        default: {
            const double o = 0.5 / std::sqrt(5.0);
            return {0.0, 0.5 - o, 0.5 + o, 1.0};
        }
    }
}

double lagrange(const std::vector<double>& nodes, int m, double tau) {
    double v = 1.0;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
        if (i != m) v *= (tau - nodes[i]) / (nodes[m] - nodes[i]);
    return v;
}

double lagrange_derivative(const std::vector<double>& nodes, int m, double tau) {
    const double h = 1e-5;
    // five-point stencil, exact for the cubic basis up to round-off
    return (-lagrange(nodes, m, tau + 2 * h) + 8 * lagrange(nodes, m, tau + h) -
            8 * lagrange(nodes, m, tau - h) + lagrange(nodes, m, tau - 2 * h)) /
           (12 * h);
}

// Composite Simpson on [0,1]; exact for cubics per panel.
template <typename F>
double simpson(F f, int panels = 200) {
    double s = 0.0;
    const double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = p * h;
        s += h / 6 * (f(a) + 4 * f(a + h / 2) + f(a + h));
    }
    return s;
}

double max_relative_difference(const SpaceTimeSolution& a, const SpaceTimeSolution& b) {
    double scale = 1e-300, diff = 0.0;
    for (std::size_t i = 0; i < a.u1.size(); ++i) {
        scale = std::max(scale, a.u1[i].cwiseAbs().maxCoeff());
        diff = std::max(diff, (a.u1[i] - b.u1[i]).cwiseAbs().maxCoeff());
    }
    for (std::size_t i = 0; i < a.u2.size(); ++i) {
        scale = std::max(scale, a.u2[i].cwiseAbs().maxCoeff());
        diff = std::max(diff, (a.u2[i] - b.u2[i]).cwiseAbs().maxCoeff());
    }
    return diff / scale;
}

TimePartition random_partition(int n, std::mt19937& gen) {
    std::uniform_real_distribution<double> w(0.5, 1.5);
    std::vector<double> nodes{0.0};
    for (int i = 0; i < n; ++i) nodes.push_back(nodes.back() + w(gen));
    for (auto& t : nodes) t /= nodes.back();
    return TimePartition(nodes);
}

}  // namespace

TEST(StepInterval, ScalarHomogeneousStep) {
    const double k = 0.1 / kLambda;
    const auto r = step_interval(scalar_space(), 0.0, k, 0, vec1(1.0), zero_moments(0, 1));
    EXPECT_NEAR(r.u1(0, 0), 1.0 / 1.05, 1e-14);
    EXPECT_NEAR(r.u2_out(0), 0.95 / 1.05, 1e-14);
}

TEST(StepInterval, ScalarConstantForcing) {
    // f_h = 12 in the M-sense so that (k/2) f_h = 0.05 with k = 0.1/12
    const double k = 0.1 / kLambda;
    const double m = 1.0 / 3.0;
    std::vector<Eigen::VectorXd> moments{vec1(0.5 * k * 12 * m), vec1(0.5 * k * 12 * m)};
    const auto r = step_interval(scalar_space(), 0.0, k, 0, vec1(0.0), moments);
    EXPECT_NEAR(r.u1(0, 0), 1.0 / 21.0, 1e-14);
    EXPECT_NEAR(r.u2_out(0), 0.95 / 21.0 + 0.05, 1e-14);
}

TEST(StepInterval, ZeroDataGivesZero) {
    const auto& s = FemSpace::assemble(1, 6, 2);
    for (int q = 0; q <= 2; ++q) {
        const auto r = step_interval(s, 0.0, 0.1, q, Eigen::VectorXd::Zero(s.dof_count()),
                                     zero_moments(q, s.dof_count()));
        EXPECT_EQ(r.u1.norm(), 0.0);
        EXPECT_EQ(r.u2_out.norm(), 0.0);
    }
}

TEST(StepInterval, RejectsMalformedInput) {
    const auto& s = scalar_space();
    EXPECT_THROW(step_interval(s, 0.0, 0.1, 0, Eigen::VectorXd::Zero(2), zero_moments(0, 1)),
                 std::invalid_argument);
    EXPECT_THROW(step_interval(s, 0.0, 0.1, 1, vec1(0.0), zero_moments(0, 1)), std::invalid_argument);
    EXPECT_THROW(step_interval(s, 0.1, 0.1, 0, vec1(0.0), zero_moments(0, 1)), std::invalid_argument);
    EXPECT_THROW(IntervalStepper(s, -1), std::invalid_argument);
}

class LocalOracle : public ::testing::TestWithParam<int> {};

TEST_P(LocalOracle, MatchesIndependentDenseSolve) {
    const int q = GetParam();
    const auto& s = scalar_space();
    const double m = 1.0 / 3.0, kap = 4.0;
    const auto nodes = lobatto_nodes(q + 1);
    std::mt19937 gen(41 + q);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double k : {0.01, 0.2, 3.0}) {
        std::vector<Eigen::VectorXd> moments;
        for (int i = 0; i < q + 2; ++i) moments.push_back(vec1(u(gen)));
        const double u2_in = u(gen);
        const int n = q + 2;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd rhs(n);
        for (int r = 0; r < n; ++r) {
            for (int j = 0; j <= q; ++j) {
                const double dmj = simpson([&](double t) { return lagrange_derivative(nodes, r, t) * legendre(j, t); });
                const double cmj = simpson([&](double t) { return lagrange(nodes, r, t) * legendre(j, t); });
                a(r, j) = -dmj * m + k * cmj * kap;
            }
            rhs(r) = moments[r](0);
        }
        a(n - 1, n - 1) = m;
        rhs(0) += m * u2_in;
        const Eigen::VectorXd x = a.fullPivLu().solve(rhs);
        const auto got = step_interval(s, 1.0, 1.0 + k, q, vec1(u2_in), moments);
        for (int j = 0; j <= q; ++j) EXPECT_NEAR(got.u1(0, j), x(j), 1e-9 * (1 + std::abs(x(j))));
        EXPECT_NEAR(got.u2_out(0), x(n - 1), 1e-9 * (1 + std::abs(x(n - 1))));
    }
}

INSTANTIATE_TEST_SUITE_P(Degrees, LocalOracle, ::testing::Values(0, 1, 2));

TEST(StepInterval, StepperReusesFactorAcrossWidths) {
    const auto s = FemSpace::assemble(1, 5, 2);
    IntervalStepper stepper(s, 1);
    std::mt19937 gen(2);
    std::normal_distribution<double> g;
    Eigen::VectorXd u0(s.dof_count());
    for (auto& v : u0) v = g(gen);
    const auto z = zero_moments(1, s.dof_count());
    const auto a = stepper.step(0.1, u0, z);
    const auto b = stepper.step(0.3, u0, z);
    const auto c = stepper.step(0.1, u0, z);
    EXPECT_LE((a.u2_out - c.u2_out).norm(), 1e-14 * a.u2_out.norm());
    EXPECT_GT((a.u2_out - b.u2_out).norm(), 1e-6);
}

TEST(RunDecomposed, SmoothProblemIsAccurate) {
    const auto p = problem_1d_smooth();
    const auto s = FemSpace::assemble(1, 8, 2);
    const auto sol = run_decomposed(p, s, TimePartition::uniform(1.0, 16), 0);
    ASSERT_EQ(sol.u1.size(), 16u);
    ASSERT_EQ(sol.u2.size(), 17u);
    for (const auto& v : sol.u2) EXPECT_TRUE(v.allFinite());
    EXPECT_EQ(sol.u2.front().norm(), 0.0);
    // exact u(.,1) = 0; the final value shrinks like k^2 while time dominates
    const double coarse = s.mass_norm(sol.u2.back());
    const double fine = s.mass_norm(run_decomposed(p, s, TimePartition::uniform(1.0, 32), 0).u2.back());
    EXPECT_LT(coarse, 0.1);
    EXPECT_GT(coarse / fine, 3.0);
}

TEST(RunDecomposed, ZeroDataGivesZeroSolution) {
    const auto s = FemSpace::assemble(2, 3, 2);
    for (int q = 0; q <= 2; ++q) {
        const auto sol = run_decomposed(zero_problem(2), s, TimePartition::uniform(1.0, 3), q);
        for (const auto& c : sol.u1) EXPECT_EQ(c.norm(), 0.0);
        for (const auto& v : sol.u2) EXPECT_EQ(v.norm(), 0.0);
    }
}

TEST(RunDecomposed, SingleIntervalMatchesTwoEquationReduction) {
    const auto p = problem_1d_smooth();
    const auto s = FemSpace::assemble(1, 6, 2);
    const double k = 0.3;
    SolverOptions opt;
    opt.time_quadrature_points = 6;
    const auto sol = run_decomposed(p, s, TimePartition({0.0, k}), 0, opt);
    // moments against the hat functions by an independent 6-point Gauss rule
    const double gp[3] = {0.2386191860831969, 0.6612093864662645, 0.9324695142031521};
    const double gw[3] = {0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
    Eigen::VectorXd fl = Eigen::VectorXd::Zero(s.dof_count()), fr = fl;
    for (int i = 0; i < 3; ++i)
        for (int sgn : {-1, 1}) {
            const double tau = 0.5 * (1 + sgn * gp[i]);
            const Eigen::VectorXd load = s.load_vector([&](const Point& x) { return p.rhs(x, tau * k); });
            fl += 0.5 * gw[i] * k * (1 - tau) * load;
            fr += 0.5 * gw[i] * k * tau * load;
        }
    Eigen::MatrixXd m(s.mass()), kk(s.stiffness());
    const Eigen::VectorXd u1 = (m + 0.5 * k * kk).ldlt().solve(m * sol.u2[0] + fl);
    const Eigen::VectorXd u2 = m.ldlt().solve(m * u1 - 0.5 * k * kk * u1 + fr);
    EXPECT_LE((sol.u1[0].col(0) - u1).norm(), 1e-12 * u1.norm());
    EXPECT_LE((sol.u2[1] - u2).norm(), 1e-12 * u2.norm());
}

TEST(RunDecomposed, UnconditionallySolvable) {
    const auto p = problem_1d_smooth();
    const auto s = FemSpace::assemble(1, 8, 1);
    const double h2 = s.h() * s.h();
    for (double ratio : {0.01, 1.0, 100.0})
        for (int q = 0; q <= 2; ++q) {
            const double k = std::min(1.0, ratio * h2);
            const int n = std::max(1, static_cast<int>(std::lround(1.0 / k)));
            const auto sol = run_decomposed(p, s, TimePartition::uniform(1.0, n), q);
            for (const auto& v : sol.u2) ASSERT_TRUE(v.allFinite());
        }
}

TEST(RunDecomposed, RejectsMisalignedImpulseAndDimensionMismatch) {
    const auto imp = problem_impulse([](const Point& x) { return std::sin(M_PI * x.x); }, 0.3);
    const auto s = FemSpace::assemble(1, 4, 1);
    EXPECT_THROW(run_decomposed(imp, s, TimePartition::uniform(1.0, 4), 0), std::invalid_argument);
    EXPECT_THROW(run_decomposed(problem_2d_smooth(), s, TimePartition::uniform(1.0, 4), 0),
                 std::invalid_argument);
    EXPECT_THROW(run_decomposed(problem_1d_smooth(), s, TimePartition::uniform(1.0, 4), -1),
                 std::invalid_argument);
}

TEST(Impulse, ZeroBeforeAndProjectedJumpAt) {
    const auto s = FemSpace::assemble(1, 6, 2);
    SpatialFunction zeta = [](const Point& x) { return x.x * x.x * (1 - x.x); };
    const auto p = problem_impulse(zeta, 0.5);
    for (int q = 0; q <= 1; ++q) {
        const auto sol = run_decomposed(p, s, TimePartition::uniform(1.0, 4), q);
        EXPECT_EQ(sol.u2[0].norm(), 0.0);
        EXPECT_EQ(sol.u2[1].norm(), 0.0);
        const Eigen::VectorXd jump = sol.u2[2] - sol.u2[1] - l2_project(s, zeta);
        EXPECT_LE(s.mass_norm(jump), 1e-10);
    }
}

TEST(Impulse, EigenmodeDecaysWithCrankNicolsonFactor) {
    const auto s = FemSpace::assemble(1, 6, 1);
    const auto dec = spectral(s);
    const Eigen::VectorXd phi = dec.eigenvectors.col(0);
    const auto p = problem_impulse([&](const Point& x) { return s.evaluate(phi, x); }, 0.5);
    const auto sol = run_decomposed(p, s, TimePartition::uniform(1.0, 4), 0);
    const double z = 0.25 * dec.eigenvalues(0);
    const double factor = (1 - z / 2) / (1 + z / 2);
    EXPECT_LE((sol.u2[2] - phi).norm(), 1e-10);
    EXPECT_LE((sol.u2[3] - factor * phi).norm(), 1e-10);
}

class GlobalEquivalence : public ::testing::TestWithParam<std::tuple<int, int, int, int>> {};

TEST_P(GlobalEquivalence, GlobalSolveEqualsDecomposedStepping) {
    const auto [q, dim, n, p] = GetParam();
    const auto s = FemSpace::assemble(dim, n, p);
    ASSERT_LE(s.dof_count(), 50);
    const auto prob = dim == 1 ? problem_1d_smooth() : problem_2d_smooth();
    std::mt19937 gen(100 + q * 10 + n);
    for (int N : {1, 3, 8}) {
        const auto part = random_partition(N, gen);
        const auto a = run_decomposed(prob, s, part, q);
        const auto b = solve_global(prob, s, part, q);
        EXPECT_LE(max_relative_difference(a, b), 1e-10) << "N=" << N;
    }
}

INSTANTIATE_TEST_SUITE_P(Configurations, GlobalEquivalence,
                         ::testing::Combine(::testing::Values(0, 1, 2), ::testing::Values(1),
                                            ::testing::Values(4, 9), ::testing::Values(1, 3)));
INSTANTIATE_TEST_SUITE_P(TwoD, GlobalEquivalence,
                         ::testing::Combine(::testing::Values(0, 1, 2), ::testing::Values(2),
                                            ::testing::Values(4), ::testing::Values(1, 2)));

TEST(SolveGlobal, ZeroDataAndScalarTwoSteps) {
    const auto& s = scalar_space();
    const auto zero = solve_global(zero_problem(), s, TimePartition::uniform(1.0, 3), 1);
    for (const auto& v : zero.u2) EXPECT_EQ(v.norm(), 0.0);
    SolverOptions opt;
    opt.initial_vector = vec1(1.0);
    const auto sol = solve_global(zero_problem(), s, TimePartition({0.0, 0.5 / kLambda, 1.0 / kLambda}), 0, opt);
    EXPECT_NEAR(sol.u2.back()(0), 0.36, 1e-13);
}

TEST(SpaceTimeOperator, LowestOrderSingleIntervalEntries) {
    const auto& s = scalar_space();
    const double k = 0.25, m = 1.0 / 3.0, kap = 4.0;
    const Eigen::MatrixXd b(assemble_space_time_operator(s, TimePartition({0.0, k}), 0));
    ASSERT_EQ(b.rows(), 2);
    EXPECT_NEAR(b(0, 0), m + 0.5 * k * kap, 1e-14);
    EXPECT_NEAR(b(0, 1), -m + 0.5 * k * kap, 1e-14);
    EXPECT_NEAR(b(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(b(1, 1), m, 1e-15);
}

TEST(CrankNicolson, ScalarStep) {
    SolverOptions opt;
    opt.initial_vector = vec1(1.0);
    const auto w = crank_nicolson(zero_problem(), scalar_space(), TimePartition({0.0, 0.1 / kLambda}), opt);
    EXPECT_NEAR(w[1](0), 0.9047619047619048, 1e-13);
}

TEST(CrankNicolson, MatchesLowestOrderSchemeWithoutForcing) {
    const auto s = FemSpace::assemble(1, 16, 2);
    const auto p = problem_homogeneous([](const Point& x) { return std::sin(M_PI * x.x); });
    SolverOptions opt;
    opt.initial_vector = s.interpolate(p.initial);
    std::mt19937 gen(8);
    const auto part = random_partition(20, gen);
    const auto w = crank_nicolson(p, s, part, opt);
    const auto u = run_decomposed(p, s, part, 0, opt);
    double worst = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) worst = std::max(worst, s.mass_norm(u.u2[n] - w[n]));
    EXPECT_LE(worst / s.mass_norm(w[0]), 1e-12);
}

TEST(CrankNicolson, ZeroDataAndImpulsesRejected) {
    const auto s = FemSpace::assemble(1, 4, 1);
    for (const auto& v : crank_nicolson(zero_problem(), s, TimePartition::uniform(1.0, 4)))
        EXPECT_EQ(v.norm(), 0.0);
    const auto imp = problem_impulse([](const Point&) { return 1.0; }, 0.5);
    EXPECT_THROW(crank_nicolson(imp, s, TimePartition::uniform(1.0, 4)), std::invalid_argument);
}

TEST(ReconstructU2, MatchesStoredValues) {
    const auto p = problem_1d_smooth();
    const auto s = FemSpace::assemble(1, 6, 2);
    for (int q = 0; q <= 2; ++q) {
        const auto sol = run_decomposed(p, s, TimePartition::uniform(1.0, 5), q);
        for (int n = 1; n <= 5; ++n) {
            const auto r = reconstruct_u2(p, s, sol, n);
            EXPECT_LE((r - sol.u2[n]).norm(), 1e-12 * std::max(1.0, sol.u2[n].norm()));
        }
        EXPECT_THROW(reconstruct_u2(p, s, sol, 0), std::invalid_argument);
        EXPECT_THROW(reconstruct_u2(p, s, sol, 6), std::invalid_argument);
    }
}

TEST(ReconstructU2, ScalarAndZero) {
    SolverOptions opt;
    opt.initial_vector = vec1(1.0);
    const auto sol = run_decomposed(zero_problem(), scalar_space(), TimePartition({0.0, 0.1 / kLambda}), 0, opt);
    EXPECT_NEAR(reconstruct_u2(zero_problem(), scalar_space(), sol, 1)(0), 0.9047619047619048, 1e-13);
    const auto z = run_decomposed(zero_problem(), scalar_space(), TimePartition::uniform(1.0, 2), 1);
    EXPECT_EQ(reconstruct_u2(zero_problem(), scalar_space(), z, 2).norm(), 0.0);
}

TEST(GalerkinResidual, OrthogonalToRandomTestFunctions) {
    const auto p = problem_1d_smooth();
    const auto s = FemSpace::assemble(1, 5, 2);
    std::mt19937 gen(31);
    std::normal_distribution<double> g;
    for (int q = 0; q <= 2; ++q) {
        const auto part = TimePartition::uniform(1.0, 6);
        const auto sol = run_decomposed(p, s, part, q);
        const Eigen::VectorXd r = galerkin_residual(p, s, sol);
        const double scale = assemble_space_time_load(p, s, part, q).norm();
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd x(r.size());
            for (auto& v : x) v = g(gen);
            EXPECT_LE(std::abs(x.dot(r)), 1e-9 * scale * x.norm());
        }
    }
}

TEST(GalerkinResidual, DetectsPerturbedSolution) {
    const auto p = problem_1d_smooth();
    const auto s = FemSpace::assemble(1, 5, 2);
    auto sol = run_decomposed(p, s, TimePartition::uniform(1.0, 4), 1);
    sol.u1[2](1, 0) += 1e-3;
    EXPECT_GT(galerkin_residual(p, s, sol).norm(), 1e-6);
}

TEST(SolutionJson, RoundTrip) {
    const auto p = problem_1d_smooth();
    const auto s = FemSpace::assemble(1, 4, 2);
    const auto sol = run_decomposed(p, s, TimePartition::uniform(1.0, 3), 1);
    const auto j = to_json(sol);
    EXPECT_EQ(j.at("q"), 1);
    EXPECT_EQ(j.at("nodes").size(), 4u);
    EXPECT_EQ(j.at("u1").size(), 3u);
    EXPECT_EQ(j.at("u1")[0].size(), 2u);
    EXPECT_EQ(j.at("u1")[0][0].size(), static_cast<std::size_t>(s.dof_count()));
    EXPECT_EQ(j.at("u2").size(), 4u);
    const auto back = solution_from_json(j);
    EXPECT_EQ(max_relative_difference(sol, back), 0.0);
}

TEST(SolutionEvaluation, U1AtReproducesLegendreSum) {
    const auto s = FemSpace::assemble(1, 4, 1);
    const auto sol = run_decomposed(problem_1d_smooth(), s, TimePartition::uniform(1.0, 2), 2);
    const double t = 0.8, tau = (t - 0.5) / 0.5;
    const Eigen::VectorXd expect = sol.u1[1].col(0) * legendre(0, tau) +
                                   sol.u1[1].col(1) * legendre(1, tau) +
                                   sol.u1[1].col(2) * legendre(2, tau);
    EXPECT_LE((sol.u1_at(1, t) - expect).norm(), 1e-13 * expect.norm());
}
