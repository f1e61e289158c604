#include "stpg/time_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stpg {

TimePartition::TimePartition(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2)
        throw std::invalid_argument("TimePartition: need at least two nodes");
    widths_.resize(nodes_.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        widths_[i] = nodes_[i + 1] - nodes_[i];
        if (!(widths_[i] > 0.0))
            throw std::invalid_argument("TimePartition: nodes must be strictly increasing (node " +
                                        std::to_string(i + 1) + ")");
    }
    k_max_ = *std::max_element(widths_.begin(), widths_.end());
}

TimePartition TimePartition::uniform(double final_time, int intervals) {
    if (intervals < 1) throw std::invalid_argument("TimePartition::uniform: N must be >= 1");
    if (!(final_time > 0.0)) throw std::invalid_argument("TimePartition::uniform: T must be > 0");
    std::vector<double> nodes(intervals + 1);
    for (int i = 0; i <= intervals; ++i) nodes[i] = final_time * i / intervals;
    nodes.back() = final_time;
    return TimePartition(std::move(nodes));
}

std::optional<int> TimePartition::node_index(double t, double tol) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - tol);
    if (it != nodes_.end() && std::abs(*it - t) <= tol)
        return static_cast<int>(it - nodes_.begin());
    return std::nullopt;
}

std::vector<TimeSample> interval_samples(double a, double b, const QuadratureRule& rule,
                                         const std::vector<double>& breakpoints) {
    std::vector<double> cuts{a};
    const double tol = 1e-12 * (b - a);
    for (double c : breakpoints)
        if (c > a + tol && c < b - tol) cuts.push_back(c);
    std::sort(cuts.begin() + 1, cuts.end());
    cuts.push_back(b);

    std::vector<TimeSample> samples;
    samples.reserve((cuts.size() - 1) * rule.size());
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s];
        const double width = cuts[s + 1] - lo;
        for (std::size_t g = 0; g < rule.size(); ++g)
            samples.push_back({lo + width * rule.points[g], width * rule.weights[g]});
    }
    return samples;
}

double temporal_moment(const ScalarTimeFunction& f, double a, double b,
                       const ScalarTimeFunction& phi, const QuadratureRule& rule) {
    double sum = 0.0;
    for (const auto& [t, w] : interval_samples(a, b, rule)) sum += w * f(t) * phi(t);
    return sum;
}

double LegendreSeries::operator()(double s) const {
    const double x = 2.0 * (s - a) / (b - a) - 1.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j)
        sum += coeffs[j] * legendre_with_derivative(static_cast<int>(j), x).first;
    return sum;
}

LegendreSeries project_Pq(const ScalarTimeFunction& f, double a, double b, int q,
                          const QuadratureRule& rule) {
    if (q < 0) throw std::invalid_argument("project_Pq: q must be >= 0");
    LegendreSeries series{a, b, std::vector<double>(q + 1, 0.0)};
    const double width = b - a;
    for (std::size_t g = 0; g < rule.size(); ++g) {
        const double tau = rule.points[g];
        const double fv = f(a + width * tau);
        for (int j = 0; j <= q; ++j)
            series.coeffs[j] += (2.0 * j + 1.0) * rule.weights[g] * fv *
                                legendre_with_derivative(j, 2.0 * tau - 1.0).first;
    }
    return series;
}

}  // namespace stpg
