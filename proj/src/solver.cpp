#include "stpg/solver.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "stpg/errors.hpp"

namespace stpg {
namespace {

using Triplet = Eigen::Triplet<double>;

void add_block(std::vector<Triplet>& out, const SparseMatrix& a, double scale, Eigen::Index row0,
               Eigen::Index col0) {
    if (scale == 0.0) return;
    for (Eigen::Index c = 0; c < a.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(a, c); it; ++it)
            out.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

// Index of the node where each impulse acts; throws if an impulse is not a node.
std::vector<int> impulse_nodes(const ProblemSpec& problem, const TimePartition& partition) {
    std::vector<int> nodes;
    for (const auto& impulse : problem.impulses) {
        const auto idx = partition.node_index(impulse.time, 1e-12 * std::max(1.0, partition.end()));
        if (!idx || *idx == 0)
            throw std::invalid_argument("impulse at t=" + std::to_string(impulse.time) +
                                        " does not coincide with an interior or final node");
        nodes.push_back(*idx);
    }
    return nodes;
}

Eigen::VectorXd impulse_load_at(const ProblemSpec& problem, const FemSpace& space,
                                const std::vector<int>& nodes, int n) {
    Eigen::VectorXd load = Eigen::VectorXd::Zero(space.dof_count());
    for (std::size_t s = 0; s < nodes.size(); ++s)
        if (nodes[s] == n) load += space.load_vector(problem.impulses[s].jump);
    return load;
}

void check_problem(const ProblemSpec& problem, const FemSpace& space, int q) {
    if (q < 0) throw std::invalid_argument("temporal degree q must be >= 0");
    if (problem.dimension != space.dimension())
        throw std::invalid_argument("problem dimension does not match the finite element space");
}

Eigen::VectorXd initial_vector(const ProblemSpec& problem, const FemSpace& space,
                               const SolverOptions& options) {
    if (options.initial_vector) {
        if (options.initial_vector->size() != space.dof_count())
            throw std::invalid_argument("initial vector has the wrong length");
        return *options.initial_vector;
    }
    return l2_project(space, problem.initial);
}

double diagonal_spread(const SparseMatrix& a) {
    const Eigen::VectorXd d = a.diagonal().cwiseAbs();
    if (d.size() == 0 || d.minCoeff() == 0.0) return std::numeric_limits<double>::infinity();
    return d.maxCoeff() / d.minCoeff();
}

}  // namespace

Eigen::VectorXd SpaceTimeSolution::u1_at(int interval, double t) const {
    const double a = partition.nodes()[interval];
    const double k = partition.widths()[interval];
    const double x = 2.0 * (t - a) / k - 1.0;
    const auto& c = u1[interval];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(c.rows());
    for (Eigen::Index j = 0; j < c.cols(); ++j)
        v += legendre_with_derivative(static_cast<int>(j), x).first * c.col(j);
    return v;
}

nlohmann::json to_json(const SpaceTimeSolution& solution) {
    nlohmann::json j;
    j["q"] = solution.q;
    j["nodes"] = solution.partition.nodes();
    auto& u1 = j["u1"] = nlohmann::json::array();
    for (const auto& block : solution.u1) {
        nlohmann::json interval = nlohmann::json::array();
        for (Eigen::Index c = 0; c < block.cols(); ++c)
            interval.push_back(std::vector<double>(block.col(c).begin(), block.col(c).end()));
        u1.push_back(std::move(interval));
    }
    auto& u2 = j["u2"] = nlohmann::json::array();
    for (const auto& v : solution.u2) u2.push_back(std::vector<double>(v.begin(), v.end()));
    return j;
}

SpaceTimeSolution solution_from_json(const nlohmann::json& j) {
    SpaceTimeSolution s;
    s.q = j.at("q").get<int>();
    s.partition = TimePartition(j.at("nodes").get<std::vector<double>>());
    for (const auto& interval : j.at("u1")) {
        const auto cols = static_cast<Eigen::Index>(interval.size());
        const auto rows = cols > 0 ? static_cast<Eigen::Index>(interval[0].size()) : 0;
        Eigen::MatrixXd block(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto values = interval[c].get<std::vector<double>>();
            block.col(c) = Eigen::Map<const Eigen::VectorXd>(values.data(), rows);
        }
        s.u1.push_back(std::move(block));
    }
    for (const auto& node : j.at("u2")) {
        const auto values = node.get<std::vector<double>>();
        s.u2.push_back(Eigen::Map<const Eigen::VectorXd>(values.data(), values.size()));
    }
    return s;
}

QuadratureRule time_rule(int q, const SolverOptions& options) {
    const int n = options.time_quadrature_points > 0 ? options.time_quadrature_points : q + 3;
    return QuadratureRule::gauss_legendre(n);
}

Eigen::VectorXd spatial_load(const FemSpace& space, const SpaceTimeFunction& f, double t) {
    return space.load_vector([&](const Point& x) { return f(x, t); });
}

std::vector<Eigen::VectorXd> interval_moments(const FemSpace& space, const ProblemSpec& problem,
                                              double a, double b,
                                              const ReferenceTemporalMatrices& ref,
                                              const QuadratureRule& rule) {
    const int nt = ref.q + 2;
    std::vector<Eigen::VectorXd> moments(nt, Eigen::VectorXd::Zero(space.dof_count()));
    const double k = b - a;
    for (const auto& [t, w] : interval_samples(a, b, rule, problem.time_breakpoints)) {
        const Eigen::VectorXd load = spatial_load(space, problem.rhs, t);
        const double tau = (t - a) / k;
        for (int m = 0; m < nt; ++m) moments[m] += (w * ref.test.value(m, tau)) * load;
    }
    return moments;
}

struct IntervalStepper::Factorization {
    SparseMatrix matrix;
    Eigen::SimplicialLDLT<SparseMatrix> symmetric;
    Eigen::SparseLU<SparseMatrix> general;
    bool use_symmetric = false;

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        // SparseLU::solve is non-const in older Eigen releases
        return use_symmetric ? Eigen::VectorXd(symmetric.solve(rhs))
                             : Eigen::VectorXd(const_cast<Eigen::SparseLU<SparseMatrix>&>(general)
                                                   .solve(rhs));
    }
};

IntervalStepper::IntervalStepper(const FemSpace& space, int q) : space_(space), ref_(q) {
    if (q < 0) throw std::invalid_argument("IntervalStepper: q must be >= 0");
}

void IntervalStepper::refactor(double k) {
    const int q = ref_.q;
    const auto d = static_cast<Eigen::Index>(space_.dof_count());
    std::vector<Triplet> triplets;
    for (int m = 0; m <= q; ++m) {
        for (int j = 0; j <= q; ++j) {
            add_block(triplets, space_.mass(), -ref_.derivative_coupling(m, j), m * d, j * d);
            add_block(triplets, space_.stiffness(), k * ref_.coupling(m, j), m * d, j * d);
        }
    }
    auto factor = std::make_shared<Factorization>();
    factor->matrix.resize((q + 1) * d, (q + 1) * d);
    factor->matrix.setFromTriplets(triplets.begin(), triplets.end());
    factor->matrix.makeCompressed();
    bool ok;
    if (q == 0) {
        // M + (k/2) K
        factor->use_symmetric = true;
        factor->symmetric.compute(factor->matrix);
        ok = factor->symmetric.info() == Eigen::Success;
    } else {
        factor->general.compute(factor->matrix);
        ok = factor->general.info() == Eigen::Success;
    }
    if (!ok) {
        std::ostringstream msg;
        msg << "local block system is singular for k=" << k
            << " (diagonal spread " << diagonal_spread(factor->matrix) << ")";
        throw NumericalFailure(msg.str());
    }
    factor_ = std::move(factor);
    factored_k_ = k;
}

StepResult IntervalStepper::step(double k, const Eigen::VectorXd& u2_in,
                                 const std::vector<Eigen::VectorXd>& moments,
                                 const Eigen::VectorXd* impulse_load) {
    const int q = ref_.q;
    const auto d = static_cast<Eigen::Index>(space_.dof_count());
    if (u2_in.size() != d) throw std::invalid_argument("step: u2_in has the wrong length");
    if (static_cast<int>(moments.size()) != q + 2)
        throw std::invalid_argument("step: expected q+2 moment vectors");
    if (!(k > 0.0)) throw std::invalid_argument("step: interval width must be positive");
    if (!factor_ || std::abs(k - factored_k_) > 1e-14 * k) refactor(k);

    Eigen::VectorXd rhs((q + 1) * d);
    for (int m = 0; m <= q; ++m) rhs.segment(m * d, d) = moments[m];
    rhs.head(d) += space_.mass() * u2_in;

    const Eigen::VectorXd c = factor_->solve(rhs);
    if (!c.allFinite()) {
        std::ostringstream msg;
        msg << "local solve produced non-finite values for k=" << k;
        throw NumericalFailure(msg.str());
    }

    StepResult result;
    result.u1 = Eigen::Map<const Eigen::MatrixXd>(c.data(), d, q + 1);
    // last test function: only it sees U2_out, through the mass matrix
    Eigen::VectorXd last = moments[q + 1];
    if (impulse_load) last += *impulse_load;
    for (int j = 0; j <= q; ++j) {
        const auto cj = c.segment(j * d, d);
        last += ref_.derivative_coupling(q + 1, j) * (space_.mass() * cj) -
                (k * ref_.coupling(q + 1, j)) * (space_.stiffness() * cj);
    }
    result.u2_out = space_.solve_mass(last);
    return result;
}

StepResult step_interval(const FemSpace& space, double a, double b, int q,
                         const Eigen::VectorXd& u2_in, const std::vector<Eigen::VectorXd>& moments,
                         const Eigen::VectorXd* impulse_load) {
    IntervalStepper stepper(space, q);
    return stepper.step(b - a, u2_in, moments, impulse_load);
}

SpaceTimeSolution run_decomposed(const ProblemSpec& problem, const FemSpace& space,
                                 const TimePartition& partition, int q,
                                 const SolverOptions& options) {
    check_problem(problem, space, q);
    const auto jumps = impulse_nodes(problem, partition);
    const auto rule = time_rule(q, options);
    IntervalStepper stepper(space, q);

    SpaceTimeSolution solution;
    solution.q = q;
    solution.partition = partition;
    solution.u2.reserve(partition.intervals() + 1);
    solution.u1.reserve(partition.intervals());
    solution.u2.push_back(initial_vector(problem, space, options));

    const auto& t = partition.nodes();
    for (int i = 0; i < partition.intervals(); ++i) {
        const auto moments = interval_moments(space, problem, t[i], t[i + 1], stepper.reference(), rule);
        std::optional<Eigen::VectorXd> jump;
        for (int node : jumps)
            if (node == i + 1) jump = impulse_load_at(problem, space, jumps, i + 1);
        try {
            auto result = stepper.step(t[i + 1] - t[i], solution.u2.back(), moments,
                                       jump ? &*jump : nullptr);
            solution.u1.push_back(std::move(result.u1));
            solution.u2.push_back(std::move(result.u2_out));
        } catch (const NumericalFailure& e) {
            throw NumericalFailure("interval " + std::to_string(i) + ": " + e.what());
        }
    }
    return solution;
}

SparseMatrix assemble_space_time_operator(const FemSpace& space, const TimePartition& partition,
                                          int q) {
    const ReferenceTemporalMatrices ref(q);
    const auto d = static_cast<Eigen::Index>(space.dof_count());
    const int n = partition.intervals();
    const Eigen::Index blocks = static_cast<Eigen::Index>(n) * (q + 1) + 1;
    std::vector<Triplet> triplets;
    for (int i = 0; i < n; ++i) {
        const double k = partition.widths()[i];
        for (int j = 0; j <= q; ++j) {
            const Eigen::Index row = (static_cast<Eigen::Index>(i) * (q + 1) + j) * d;
            for (int m = 0; m <= q + 1; ++m) {
                const Eigen::Index col = (static_cast<Eigen::Index>(i) * (q + 1) + m) * d;
                add_block(triplets, space.mass(), -ref.derivative_coupling(m, j), row, col);
                add_block(triplets, space.stiffness(), k * ref.coupling(m, j), row, col);
            }
        }
    }
    // <U2(T), X(T)>
    add_block(triplets, space.mass(), 1.0, (blocks - 1) * d, (blocks - 1) * d);
    SparseMatrix b(blocks * d, blocks * d);
    b.setFromTriplets(triplets.begin(), triplets.end());
    b.makeCompressed();
    return b;
}

Eigen::VectorXd assemble_space_time_load(const ProblemSpec& problem, const FemSpace& space,
                                         const TimePartition& partition, int q,
                                         const SolverOptions& options) {
    check_problem(problem, space, q);
    const auto jumps = impulse_nodes(problem, partition);
    const ReferenceTemporalMatrices ref(q);
    const auto rule = time_rule(q, options);
    const auto d = static_cast<Eigen::Index>(space.dof_count());
    const int n = partition.intervals();
    Eigen::VectorXd f = Eigen::VectorXd::Zero((static_cast<Eigen::Index>(n) * (q + 1) + 1) * d);
    const auto& t = partition.nodes();
    for (int i = 0; i < n; ++i) {
        const auto moments = interval_moments(space, problem, t[i], t[i + 1], ref, rule);
        for (int m = 0; m <= q + 1; ++m)
            f.segment((static_cast<Eigen::Index>(i) * (q + 1) + m) * d, d) += moments[m];
    }
    f.head(d) += space.mass() * initial_vector(problem, space, options);
    for (std::size_t s = 0; s < jumps.size(); ++s)
        f.segment(static_cast<Eigen::Index>(jumps[s]) * (q + 1) * d, d) +=
            space.load_vector(problem.impulses[s].jump);
    return f;
}

SpaceTimeSolution solve_global(const ProblemSpec& problem, const FemSpace& space,
                               const TimePartition& partition, int q,
                               const SolverOptions& options) {
    const Eigen::VectorXd f = assemble_space_time_load(problem, space, partition, q, options);
    const SparseMatrix system = SparseMatrix(assemble_space_time_operator(space, partition, q).transpose());
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(system);
    if (lu.info() != Eigen::Success)
        throw NumericalFailure("global space-time system is singular (" +
                               std::to_string(system.rows()) + " unknowns)");
    const Eigen::VectorXd u = lu.solve(f);
    if (!u.allFinite()) throw NumericalFailure("global space-time solve produced non-finite values");

    const auto d = static_cast<Eigen::Index>(space.dof_count());
    const int n = partition.intervals();
    SpaceTimeSolution solution;
    solution.q = q;
    solution.partition = partition;
    for (int i = 0; i < n; ++i) {
        const auto block = u.segment(static_cast<Eigen::Index>(i) * (q + 1) * d, (q + 1) * d);
        solution.u1.push_back(Eigen::Map<const Eigen::MatrixXd>(block.data(), d, q + 1));
    }
    solution.u2.push_back(initial_vector(problem, space, options));
    for (int node = 1; node < n; ++node)
        solution.u2.push_back(reconstruct_u2(problem, space, solution, node, options));
    solution.u2.push_back(u.tail(d));
    return solution;
}

Eigen::VectorXd reconstruct_u2(const ProblemSpec& problem, const FemSpace& space,
                               const SpaceTimeSolution& solution, int n,
                               const SolverOptions& options) {
    if (n <= 0) throw std::invalid_argument("reconstruct_u2: U2 at node 0 is data, not computed");
    if (n > static_cast<int>(solution.u1.size()))
        throw std::invalid_argument("reconstruct_u2: U1 is not available on interval n-1");
    const int q = solution.q;
    const ReferenceTemporalMatrices ref(q);
    const auto& t = solution.partition.nodes();
    const double k = t[n] - t[n - 1];
    const auto moments = interval_moments(space, problem, t[n - 1], t[n], ref, time_rule(q, options));
    Eigen::VectorXd last = moments[q + 1];
    const auto jumps = impulse_nodes(problem, solution.partition);
    last += impulse_load_at(problem, space, jumps, n);
    const auto& c = solution.u1[n - 1];
    for (int j = 0; j <= q; ++j)
        last += ref.derivative_coupling(q + 1, j) * (space.mass() * c.col(j)) -
                (k * ref.coupling(q + 1, j)) * (space.stiffness() * c.col(j));
    return space.solve_mass(last);
}

std::vector<Eigen::VectorXd> crank_nicolson(const ProblemSpec& problem, const FemSpace& space,
                                            const TimePartition& partition,
                                            const SolverOptions& options) {
    check_problem(problem, space, 0);
    if (!problem.impulses.empty())
        throw std::invalid_argument("crank_nicolson: impulses are not supported");
    const auto rule = time_rule(0, options);
    std::vector<Eigen::VectorXd> w{initial_vector(problem, space, options)};
    Eigen::SimplicialLDLT<SparseMatrix> factor;
    double factored_k = -1.0;
    const auto& t = partition.nodes();
    for (int i = 0; i < partition.intervals(); ++i) {
        const double k = t[i + 1] - t[i];
        if (std::abs(k - factored_k) > 1e-14 * k) {
            factor.compute(SparseMatrix(space.mass() + 0.5 * k * space.stiffness()));
            if (factor.info() != Eigen::Success)
                throw NumericalFailure("crank_nicolson: factorization failed at interval " +
                                       std::to_string(i));
            factored_k = k;
        }
        Eigen::VectorXd rhs = space.mass() * w.back() - 0.5 * k * (space.stiffness() * w.back());
        for (const auto& [s, weight] : interval_samples(t[i], t[i + 1], rule, problem.time_breakpoints))
            rhs += weight * spatial_load(space, problem.rhs, s);
        w.push_back(factor.solve(rhs));
    }
    return w;
}

Eigen::VectorXd galerkin_residual(const ProblemSpec& problem, const FemSpace& space,
                                  const SpaceTimeSolution& solution,
                                  const SolverOptions& options) {
    const int q = solution.q;
    const auto d = static_cast<Eigen::Index>(space.dof_count());
    const int n = solution.partition.intervals();
    Eigen::VectorXd u((static_cast<Eigen::Index>(n) * (q + 1) + 1) * d);
    for (int i = 0; i < n; ++i)
        u.segment(static_cast<Eigen::Index>(i) * (q + 1) * d, (q + 1) * d) =
            Eigen::Map<const Eigen::VectorXd>(solution.u1[i].data(), (q + 1) * d);
    u.tail(d) = solution.u2.back();
    const SparseMatrix b = assemble_space_time_operator(space, solution.partition, q);
    return b.transpose() * u -
           assemble_space_time_load(problem, space, solution.partition, q, options);
}

}  // namespace stpg
