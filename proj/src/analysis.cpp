#include "stpg/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stpg {

nlohmann::json to_json(const ErrorReport& report) {
    return {{"err_u1_L2V", report.err_u1_L2V},
            {"err_u2_nodal_max", report.err_u2_nodal_max},
            {"err_u2_nodal_final", report.err_u2_nodal_final},
            {"nodal", report.nodal}};
}

ErrorReport error_norms(const FemSpace& space, const ProblemSpec& problem,
                        const SpaceTimeSolution& solution) {
    if (!problem.exact)
        throw std::invalid_argument("error_norms: problem '" + problem.id +
                                    "' has no exact solution");
    const auto& exact = *problem.exact;
    const auto& quad = space.quadrature();
    const auto npts = static_cast<Eigen::Index>(quad.points.size());
    const bool two_d = space.dimension() == 2;

    ErrorReport report;
    const auto rule = QuadratureRule::gauss_legendre(solution.q + 4);
    const auto& t = solution.partition.nodes();
    double u1_sq = 0.0;
    for (int i = 0; i < solution.partition.intervals(); ++i) {
        for (const auto& [s, w] : interval_samples(t[i], t[i + 1], rule, problem.time_breakpoints)) {
            const Eigen::VectorXd u = solution.u1_at(i, s);
            const Eigen::VectorXd gx = quad.dx * u;
            Eigen::VectorXd gy;
            if (two_d) gy = quad.dy * u;
            double sum = 0.0;
            for (Eigen::Index p = 0; p < npts; ++p) {
                const auto g = exact.gradient(quad.points[p], s);
                double e = (g[0] - gx[p]) * (g[0] - gx[p]);
                if (two_d) e += (g[1] - gy[p]) * (g[1] - gy[p]);
                sum += quad.weights[p] * e;
            }
            u1_sq += w * sum;
        }
    }
    report.err_u1_L2V = std::sqrt(u1_sq);

    report.nodal.resize(solution.u2.size());
    for (std::size_t n = 0; n < solution.u2.size(); ++n) {
        const Eigen::VectorXd v = quad.values * solution.u2[n];
        double sum = 0.0;
        for (Eigen::Index p = 0; p < npts; ++p) {
            const double e = exact.value(quad.points[p], t[n]) - v[p];
            sum += quad.weights[p] * e * e;
        }
        report.nodal[n] = std::sqrt(sum);
        if (n >= 1) report.err_u2_nodal_max = std::max(report.err_u2_nodal_max, report.nodal[n]);
    }
    report.err_u2_nodal_final = report.nodal.back();
    return report;
}

double fit_rate(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 2) throw std::invalid_argument("fit_rate: need at least two pairs");
    double sx = 0.0, sy = 0.0;
    for (const auto& [k, e] : pairs) {
        if (!(k > 0.0) || !(e > 0.0))
            throw std::invalid_argument("fit_rate: step sizes and errors must be positive");
        sx += std::log(k);
        sy += std::log(e);
    }
    const double n = static_cast<double>(pairs.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [k, e] : pairs) {
        const double dx = std::log(k) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(e) - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: step sizes must not all coincide");
    return sxy / sxx;
}

std::vector<double> pairwise_rates(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> rates(pairs.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i < pairs.size(); ++i)
        rates[i] = std::log(pairs[i].second / pairs[i - 1].second) /
                   std::log(pairs[i].first / pairs[i - 1].first);
    return rates;
}

}  // namespace stpg
