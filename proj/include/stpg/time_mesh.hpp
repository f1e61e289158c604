#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "stpg/quadrature.hpp"

namespace stpg {

/// Ordered temporal nodes t_0 < ... < t_N.
class TimePartition {
public:
    explicit TimePartition(std::vector<double> nodes);

    /// N equal intervals on [0, T].
    static TimePartition uniform(double final_time, int intervals);

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& widths() const { return widths_; }
    int intervals() const { return static_cast<int>(widths_.size()); }
    double k_max() const { return k_max_; }
    double start() const { return nodes_.front(); }
    double end() const { return nodes_.back(); }

    /// Index of the node within `tol` of t, if any.
    std::optional<int> node_index(double t, double tol = 1e-12) const;

private:
    std::vector<double> nodes_;
    std::vector<double> widths_;
    double k_max_ = 0.0;
};

using ScalarTimeFunction = std::function<double(double)>;

/// A physical quadrature point on a time interval.
struct TimeSample {
    double time;
    double weight;
};

/// Applies `rule` on [a, b]; the interval is first cut at every breakpoint
/// strictly inside it, so integrands with kinks there keep full accuracy.
std::vector<TimeSample> interval_samples(double a, double b, const QuadratureRule& rule,
                                         const std::vector<double>& breakpoints = {});

/// Approximates int_a^b f(s) phi(s) ds.
double temporal_moment(const ScalarTimeFunction& f, double a, double b,
                       const ScalarTimeFunction& phi, const QuadratureRule& rule);

/// Truncated Legendre series on [a, b]: sum_j coeffs[j] * P_j(2 (s-a)/(b-a) - 1).
struct LegendreSeries {
    double a = 0.0;
    double b = 1.0;
    std::vector<double> coeffs;

    double operator()(double s) const;
};

/// L2(a, b) projection of f onto polynomials of degree <= q.
LegendreSeries project_Pq(const ScalarTimeFunction& f, double a, double b, int q,
                          const QuadratureRule& rule);

}  // namespace stpg
