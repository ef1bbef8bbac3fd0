#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration with an absolute
// tolerance and a cap on the number of subdivisions. The panel with the
// largest error estimate is bisected until the summed estimate meets the
// tolerance. Nodes and weights come from Boost.Math.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "maxstable/error.hpp"
#include "maxstable/parallel.hpp"

namespace maxstable {

struct QuadratureResult
{
    double value = 0.0;
    double error = 0.0;
    std::size_t subdivisions = 0;
};

struct QuadratureOptions
{
    double tolerance = 1e-10;
    std::size_t max_subdivisions = 2000;
};

namespace detail {

struct Panel
{
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_panel(F& f, double a, double b)
{
    using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
    using Gauss = boost::math::quadrature::gauss<double, 7>;
    const auto& x = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    // abscissa()[0] is the centre; even indices are shared with the Gauss rule.
    const double fc = f(mid);
    double kronrod = fc * wk[0];
    double gauss = fc * wg[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double fp = f(mid + half * x[i]);
        const double fm = f(mid - half * x[i]);
        kronrod += (fp + fm) * wk[i];
        if (i % 2 == 0) {
            gauss += (fp + fm) * wg[i / 2];
        }
    }
    kronrod *= half;
    gauss *= half;
    const double err = std::max(std::abs(kronrod - gauss), 4.0 * std::numeric_limits<double>::epsilon() * std::abs(kronrod));
    return {a, b, kronrod, err};
}

}  // namespace detail

/// Integral of f over [a, b] to absolute tolerance. Throws ConvergenceError
/// when the subdivision budget runs out first.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opts = {})
{
    if (a == b) {
        return {};
    }
    if (a > b) {
        auto r = integrate(f, b, a, opts);
        r.value = -r.value;
        return r;
    }
    std::priority_queue<detail::Panel> panels;
    panels.push(detail::gauss_kronrod_panel(f, a, b));
    double total_error = panels.top().error;
    std::size_t splits = 0;
    while (total_error > opts.tolerance) {
        if (splits >= opts.max_subdivisions) {
            throw ConvergenceError("quadrature did not converge", total_error);
        }
        const detail::Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            // interval exhausted at machine precision; accept what we have
            panels.push(worst);
            break;
        }
        const auto left = detail::gauss_kronrod_panel(f, worst.a, mid);
        const auto right = detail::gauss_kronrod_panel(f, mid, worst.b);
        panels.push(left);
        panels.push(right);
        ++splits;
        total_error += left.error + right.error - worst.error;
    }
    std::vector<double> values;
    std::vector<double> errors;
    values.reserve(panels.size());
    while (!panels.empty()) {
        values.push_back(panels.top().value);
        errors.push_back(panels.top().error);
        panels.pop();
    }
    std::sort(values.begin(), values.end());
    return {compensated_sum(values), compensated_sum(errors), splits};
}

/// Sum over k of weight_k * integral of g over [lo_k, hi_k].
///
/// The breakpoints of all intervals are merged, g is integrated once per
/// elementary segment and the per-interval integrals are read off cumulative
/// sums. The tolerance is shared evenly across the segments.
template <class G>
QuadratureResult weighted_interval_integral(std::span<const double> lo, std::span<const double> hi, std::span<const double> weights,
                                            G&& g, const QuadratureOptions& opts = {})
{
    std::vector<double> cuts;
    cuts.reserve(2 * lo.size());
    for (std::size_t k = 0; k < lo.size(); ++k) {
        if (lo[k] < hi[k] && weights[k] != 0.0) {
            cuts.push_back(lo[k]);
            cuts.push_back(hi[k]);
        }
    }
    if (cuts.empty()) {
        return {};
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    QuadratureOptions seg_opts = opts;
    seg_opts.tolerance = opts.tolerance / static_cast<double>(std::max<std::size_t>(1, cuts.size() - 1));
    std::vector<double> cumulative(cuts.size(), 0.0);
    double error = 0.0;
    std::size_t subdivisions = 0;
    double running = 0.0;
    double carry = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const auto seg = integrate(g, cuts[i - 1], cuts[i], seg_opts);
        const double y = seg.value - carry;
        const double t = running + y;
        carry = (t - running) - y;
        running = t;
        cumulative[i] = running;
        error += seg.error;
        subdivisions += seg.subdivisions;
    }
    auto position = [&](double v) { return static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin()); };
    std::vector<double> terms;
    terms.reserve(lo.size());
    for (std::size_t k = 0; k < lo.size(); ++k) {
        if (lo[k] < hi[k] && weights[k] != 0.0) {
            terms.push_back(weights[k] * (cumulative[position(hi[k])] - cumulative[position(lo[k])]));
        }
    }
    return {compensated_sum(terms), error, subdivisions};
}

}  // namespace maxstable
