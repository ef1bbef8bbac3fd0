#pragma once

// Distributional calculus of an SMSP eta with generator Z:
//
//   conditional df   P(eta <= f | eta_{t0} = x)
//                      = exp(-(x + ||f + x 1_{t0}||_D)) E(1{sup |f| Z <= |x| Z_{t0}} Z_{t0})
//   increments       P(eta_s - eta_t <= x)
//                      = int exp(-||(x + y, y)||_D) E(1{y Z_t <= (x + y) Z_s} Z_t) dy  (+ 1 - e^{-x}, x >= 0)
//   zeta df          F_{t0}(x) = E(1{Z'_{t0} <= x Z_{t0}} Z_{t0})
//   derivative df    H(x) = int_{-inf}^0 e^y F_{t0}(-x / y) dy
//
// Expectations over Z use expectation_rule: exact atoms for enumerable
// generators, a midpoint phase rule for RandomCosine, shared Monte Carlo
// draws otherwise. Integrals over y < 0 are truncated at y_min = log(tol),
// where the factor e^y bounds the neglected mass by tol.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "maxstable/dnorm.hpp"
#include "maxstable/error.hpp"
#include "maxstable/function_space.hpp"
#include "maxstable/generators.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/quadrature.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

inline constexpr std::size_t default_rule_nodes = 4096;

struct QuadratureSpec
{
    double tolerance = 1e-8;
    double y_min = 0.0;  ///< 0 selects log(tolerance)
    std::size_t max_subdivisions = 2000;

    void validate() const
    {
        detail::require(tolerance > 0.0 && tolerance < 1.0, "quadrature tolerance must lie in (0, 1)");
        detail::require(y_min <= 0.0, "y_min must be negative");
        detail::require(y_min == 0.0 || std::exp(y_min) <= tolerance, "y_min leaves tail mass above the tolerance");
    }
    double lower() const { return y_min < 0.0 ? y_min : std::log(tolerance); }
    QuadratureOptions options() const { return {tolerance, max_subdivisions}; }
};

struct DerivativeLaw
{
    std::vector<double> xs;
    std::vector<double> h;     ///< df of the distributional derivative
    std::vector<double> zeta;  ///< F_{t0}
    double mean = 0.0;         ///< mean of F_{t0}
};

struct DerivativeMeans
{
    double zeta_mean = 0.0;         ///< mean of F_{t0}
    double z_prime_mean = 0.0;      ///< E(Z'_{t0})
    double h_mean = 0.0;            ///< mean of H
    double z_prime_std_error = 0.0;  ///< nonzero only for Monte Carlo rules
    double quadrature_error = 0.0;
};

namespace detail {

inline double clamp_probability(double p, double tol)
{
    if (p < 0.0 && p > -tol) return 0.0;
    if (p > 1.0 && p < 1.0 + tol) return 1.0;
    return p;
}

inline void require_derivative(const GeneratorRealizer& r)
{
    require(r.has_derivative(), "generator not distributionally differentiable in catalog");
}

/// Mass and first moment are unaffected by the truncation.
inline double truncation_tolerance(const QuadratureSpec& q) { return std::exp(q.lower()); }

}  // namespace detail

/// P(eta <= f | eta_{t0} = x) for f(t0) = 0 and x < 0. The indicator uses the weak inequality.
inline double conditional_fdf(const GeneratorSpec& spec, const EFunction& f, std::size_t t0, double x,
                              std::size_t nodes = default_rule_nodes, const StreamKey& key = {0, "conditional"})
{
    detail::require(t0 < f.size(), "invalid t0 index");
    detail::require(f[t0] == 0.0, "f(t0) must be 0");
    detail::require(x < 0.0, "x must be negative");
    const GeneratorRealizer r(spec, f.grid());
    const auto rule = expectation_rule(r, nodes, key);
    const double norm = dnorm_rule(rule, f.with_override(t0, x));
    std::vector<double> terms;
    terms.reserve(rule.size());
    const auto fv = f.values();
    for (const auto& wp : rule) {
        const auto z = wp.path.values();
        if (detail::sup_product(fv, z) <= -x * z[t0]) {
            terms.push_back(wp.weight * z[t0]);
        }
    }
    const double p = std::exp(-(x + norm)) * compensated_sum(terms);
    return detail::clamp_probability(p, 1e-12);
}

/// P(eta_s - eta_t <= x).
///
/// On the integration range y <= min(0, -x) both coordinates are nonpositive, so
/// per atom max(|x + y| z_s, |y| z_t) and the indicator switch at the single point
/// y = x z_s / (z_t - z_s). Between sorted switch points the integrand is
/// exp(-(A + B y)) E and each piece is integrated adaptively.
inline double increment_df(const GeneratorSpec& spec, const GridPtr& grid, std::size_t s, std::size_t t, double x,
                           const QuadratureSpec& quad = {}, std::size_t nodes = default_rule_nodes,
                           const StreamKey& key = {0, "increment"})
{
    quad.validate();
    detail::require(s < grid->size() && t < grid->size(), "invalid grid index");
    detail::require(s != t, "increment needs s != t");
    detail::require(std::isfinite(x), "x must be finite");
    const GeneratorRealizer r(spec, grid);
    const auto rule = expectation_rule(r, nodes, key);

    struct Atom
    {
        double w, zs, zt;
    };
    std::vector<Atom> atoms;
    atoms.reserve(rule.size());
    for (const auto& wp : rule) {
        atoms.push_back({wp.weight, wp.path[s], wp.path[t]});
    }

    const double closed = x > 0.0 ? -std::expm1(-x) : 0.0;
    const double hi = std::min(0.0, -x);
    const double lo = quad.lower();
    if (hi <= lo) {
        return closed;
    }

    std::vector<double> cuts{lo, hi};
    for (const auto& a : atoms) {
        const double d = a.zt - a.zs;
        if (d != 0.0) {
            const double y = x * a.zs / d;
            if (y > lo && y < hi) {
                cuts.push_back(y);
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    QuadratureOptions opts = quad.options();
    opts.tolerance = quad.tolerance / static_cast<double>(cuts.size());
    std::vector<double> pieces;
    pieces.reserve(cuts.size());
    std::vector<double> a_terms(atoms.size()), b_terms(atoms.size()), e_terms;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const double ym = 0.5 * (cuts[i - 1] + cuts[i]);
        e_terms.clear();
        for (std::size_t k = 0; k < atoms.size(); ++k) {
            const auto& a = atoms[k];
            if (ym * a.zt <= (x + ym) * a.zs) {
                // |y| z_t dominates
                a_terms[k] = 0.0;
                b_terms[k] = -a.w * a.zt;
                e_terms.push_back(a.w * a.zt);
            } else {
                a_terms[k] = -a.w * x * a.zs;
                b_terms[k] = -a.w * a.zs;
            }
        }
        const double e = compensated_sum(e_terms);
        if (e == 0.0) {
            continue;
        }
        const double A = compensated_sum(a_terms);
        const double B = compensated_sum(b_terms);
        pieces.push_back(integrate([&](double y) { return std::exp(-(A + B * y)) * e; }, cuts[i - 1], cuts[i], opts).value);
    }
    return detail::clamp_probability(closed + compensated_sum(pieces), quad.tolerance + detail::truncation_tolerance(quad));
}

/// F_{t0}(x) = E(1{Z'_{t0} <= x Z_{t0}} Z_{t0}).
///
/// RandomCosine: with phi = 2 pi t0 + Theta the event is the arc
/// x + a R cos(phi - psi) >= 0, R = hypot(x, 2 pi), psi = atan2(2 pi, x), and
/// (1 + a cos phi) / (2 pi) is integrated over it adaptively.
inline double zeta_df(const GeneratorSpec& spec, const GridPtr& grid, std::size_t t0, double x, const QuadratureOptions& opts = {})
{
    detail::require(t0 < grid->size(), "invalid t0 index");
    const GeneratorRealizer r(spec, grid);
    detail::require_derivative(r);
    if (std::isinf(x)) {
        return x > 0.0 ? 1.0 : 0.0;
    }
    if (const auto* rc = std::get_if<gen::RandomCosine>(&spec)) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        const double a = rc->amplitude;
        const double ratio = -x / (a * std::hypot(x, two_pi));
        if (ratio <= -1.0) return 1.0;
        if (ratio >= 1.0) return 0.0;
        const double psi = std::atan2(two_pi, x);
        const double alpha = std::acos(ratio);
        const auto q = integrate([a](double phi) { return (1.0 + a * std::cos(phi)) / two_pi; }, psi - alpha, psi + alpha, opts);
        return detail::clamp_probability(q.value, opts.tolerance);
    }
    // Constant: Z = 1, Z' = 0
    return x >= 0.0 ? 1.0 : 0.0;
}

/// H(x) = int_{-inf}^0 e^y F_{t0}(-x / y) dy, truncated at y_min.
inline double derivative_df(const GeneratorSpec& spec, const GridPtr& grid, std::size_t t0, double x, const QuadratureSpec& quad = {})
{
    quad.validate();
    detail::require(t0 < grid->size(), "invalid t0 index");
    detail::require(!std::isnan(x), "x must not be NaN");
    const GeneratorRealizer r(spec, grid);
    detail::require_derivative(r);
    if (std::isinf(x)) {
        return x > 0.0 ? 1.0 : 0.0;
    }
    QuadratureOptions inner = quad.options();
    inner.tolerance = 0.1 * quad.tolerance;
    auto integrand = [&](double y) { return std::exp(y) * zeta_df(spec, grid, t0, -x / y, inner); };
    const auto q = integrate(integrand, quad.lower(), 0.0, quad.options());
    return detail::clamp_probability(q.value, quad.tolerance + detail::truncation_tolerance(quad));
}

namespace detail {

/// int_0^inf (1 - G(x)) dx - int_{-inf}^0 G(x) dx via x = u / (1 - u). Tail
/// masses below `floor` (the accuracy of G itself) count as zero.
template <class Df>
QuadratureResult df_mean(Df&& df, const QuadratureOptions& opts, double floor)
{
    auto upper = [&](double u) {
        const double v = 1.0 - u;
        if (v <= 0.0) return 0.0;
        const double tail = 1.0 - df(u / v);
        return tail <= floor ? 0.0 : tail / (v * v);
    };
    auto lower = [&](double u) {
        const double v = 1.0 - u;
        if (v <= 0.0) return 0.0;
        const double tail = df(-u / v);
        return tail <= floor ? 0.0 : tail / (v * v);
    };
    const auto a = integrate(upper, 0.0, 1.0, opts);
    const auto b = integrate(lower, 0.0, 1.0, opts);
    return {a.value - b.value, a.error + b.error, a.subdivisions + b.subdivisions};
}

}  // namespace detail

/// (mean of F_{t0}, E(Z'_{t0}), mean of H). The means of F_{t0} and H integrate
/// the df tails to quad.tolerance; the dfs themselves are evaluated 100 times tighter.
inline DerivativeMeans derivative_mean(const GeneratorSpec& spec, const GridPtr& grid, std::size_t t0,
                                       std::size_t nodes = default_rule_nodes, const StreamKey& key = {0, "derivative-mean"},
                                       const QuadratureSpec& quad = {1e-6})
{
    quad.validate();
    detail::require(t0 < grid->size(), "invalid t0 index");
    const GeneratorRealizer r(spec, grid);
    detail::require_derivative(r);
    DerivativeMeans out;

    const auto rule = expectation_rule(r, nodes, key);
    std::vector<double> zp;
    zp.reserve(rule.size());
    for (const auto& wp : rule) {
        zp.push_back((*wp.path.derivative())[t0]);
    }
    const auto summary = summarize(zp);
    out.z_prime_mean = summary.mean;
    out.z_prime_std_error = r.enumerable() || std::holds_alternative<gen::RandomCosine>(spec) ? 0.0 : summary.std_error;

    const QuadratureOptions opts = quad.options();
    QuadratureOptions inner = opts;
    inner.tolerance = 0.01 * opts.tolerance;
    QuadratureSpec hq = quad;
    hq.tolerance = 0.01 * quad.tolerance;
    hq.y_min = 0.0;
    const double floor = 10.0 * (hq.tolerance + detail::truncation_tolerance(hq));
    const auto fz = detail::df_mean([&](double x) { return zeta_df(spec, grid, t0, x, inner); }, opts, floor);
    const auto fh = detail::df_mean([&](double x) { return derivative_df(spec, grid, t0, x, hq); }, opts, floor);
    out.zeta_mean = fz.value;
    out.h_mean = fh.value;
    out.quadrature_error = std::max(fz.error, fh.error);
    return out;
}

/// H and F_{t0} on an evaluation grid of x values.
inline DerivativeLaw derivative_law(const GeneratorSpec& spec, const GridPtr& grid, std::size_t t0, std::span<const double> xs,
                                    const QuadratureSpec& quad = {})
{
    DerivativeLaw law;
    law.xs.assign(xs.begin(), xs.end());
    law.h = parallel_map(xs.size(), [&](std::size_t i) { return derivative_df(spec, grid, t0, xs[i], quad); });
    law.zeta = parallel_map(xs.size(), [&](std::size_t i) { return zeta_df(spec, grid, t0, xs[i], quad.options()); });
    law.mean = detail::df_mean([&](double x) { return zeta_df(spec, grid, t0, x, quad.options()); }, quad.options(),
                               10.0 * quad.tolerance)
                   .value;
    return law;
}

}  // namespace maxstable
