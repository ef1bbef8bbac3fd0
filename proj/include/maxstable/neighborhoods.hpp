#pragma once

// Spectral delta-neighborhoods of an SGPP built from a finite spectral
// generator Z (K equally likely atoms z_k) and the perturbed radial df
// F_S(s) = s + kappa s^{1 + delta}. For f on the unit sphere and c < 0,
//
//   H_f(c) = P(Y <= c |f|) = 1 - (1/K) sum_k F_S(|c| M_k),  M_k = sup_t |f| z_k,
//
// so the rate of P(Y <= f/n)^n -> exp(-||f||_D) and the von Mises remainder
// are available in closed form.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include "maxstable/error.hpp"
#include "maxstable/function_space.hpp"
#include "maxstable/generators.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/quadrature.hpp"
#include "maxstable/sampler.hpp"

namespace maxstable {

struct RateFitReport
{
    std::vector<double> ns;
    std::vector<double> sup_diffs;
    double delta_hat = 0.0;
    double fit_r2 = 0.0;
    std::size_t family_size = 0;
};

namespace detail {

/// Atom sups M_k of f together with ||f||_D and the generator bound m.
struct SpectralProfile
{
    std::vector<double> sups;
    double norm = 0.0;
    double bound = 0.0;
};

inline SpectralProfile spectral_profile(const GeneratorSpec& spec, const EFunction& f)
{
    require(std::holds_alternative<gen::Constant>(spec) || std::holds_alternative<gen::FiniteSpectral>(spec),
            "spectral df needs a Constant or FiniteSpectral generator");
    const GeneratorRealizer r(spec, f.grid());
    SpectralProfile p;
    p.bound = *r.bound();
    for (const auto& z : r.atoms()) {
        double s = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            s = std::max(s, std::abs(f[i]) * z[i]);
        }
        p.sups.push_back(s);
    }
    p.norm = compensated_sum(p.sups) / static_cast<double>(p.sups.size());
    return p;
}

inline void require_unit_sphere(const EFunction& f)
{
    require(std::abs(f.sup_norm() - 1.0) <= 1e-12, "f must have unit sup-norm");
}

inline void require_radial_range(const PerturbedRadialSpec& radial, double magnitude, double bound)
{
    require(magnitude * bound <= radial.s_max * (1.0 + 1e-12), "|c| exceeds the radial validity range");
}

/// 1 - H_f(c) = (1/K) sum_k F_S(|c| M_k).
inline double spectral_tail(const SpectralProfile& p, const PerturbedRadialSpec& radial, double magnitude)
{
    std::vector<double> terms;
    terms.reserve(p.sups.size());
    for (double m : p.sups) {
        terms.push_back(radial.cdf(magnitude * m));
    }
    return compensated_sum(terms) / static_cast<double>(terms.size());
}

}  // namespace detail

/// H_f(c) for f on the unit sphere and c < 0 with |c| m <= s_max.
inline double spectral_df(const GeneratorSpec& spec, const PerturbedRadialSpec& radial, const EFunction& f, double c)
{
    radial.validate();
    detail::require(c < 0.0, "c must be negative");
    detail::require_unit_sphere(f);
    const auto p = detail::spectral_profile(spec, f);
    detail::require_radial_range(radial, -c, p.bound);
    return 1.0 - detail::spectral_tail(p, radial, -c);
}

/// 20 geometric magnitudes in [0.05, 4].
inline std::vector<double> default_ladder(std::size_t points = 20, double lo = 0.05, double hi = 4.0)
{
    detail::require(points >= 2 && lo > 0.0 && hi > lo, "invalid magnitude ladder");
    std::vector<double> out(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        out[i] = lo * std::exp(step * static_cast<double>(i));
    }
    out.back() = hi;
    return out;
}

/// Test family on the unit sphere of E^-: constants, ramps, a two-point fidis and bumps.
inline std::vector<EFunction> default_test_family(const GridPtr& grid = Grid::uniform())
{
    auto bump = [](double centre, double half_width) {
        return [=](double t) { return -std::max(0.0, 1.0 - std::abs(t - centre) / half_width); };
    };
    std::vector<EFunction> out;
    out.push_back(EFunction::constant(grid, -1.0));
    out.push_back(EFunction::constant(grid, -0.5).with_override(grid->require_index(0.5), -1.0));
    out.push_back(EFunction::from_fn(grid, [](double t) { return -t; }));
    out.push_back(EFunction::from_fn(grid, [](double t) { return -(1.0 - t); }));
    out.push_back(EFunction::from_fn(grid, [](double t) { return -(0.5 + 0.5 * t); }));
    out.push_back(EFunction::embed_fidis(grid, {{0.25, -1.0}, {0.75, -0.5}}));
    out.push_back(EFunction::from_fn(grid, bump(0.5, 0.25)));
    out.push_back(EFunction::from_fn(grid, bump(0.25, 0.1)));
    return out;
}

/// max over family and ladder of |H_f(-c/n)^n - exp(-c ||f||_D)|, f rescaled to unit sup-norm.
inline double sup_diff(const GeneratorSpec& spec, const PerturbedRadialSpec& radial, std::span<const EFunction> family, double n,
                       std::span<const double> ladder)
{
    radial.validate();
    detail::require(!family.empty(), "test family must be nonempty");
    detail::require(!ladder.empty(), "magnitude ladder must be nonempty");
    detail::require(n >= 1.0, "n must be at least 1");
    const double top = *std::max_element(ladder.begin(), ladder.end());
    const auto worst = parallel_map(family.size(), [&](std::size_t i) {
        const auto& f0 = family[i];
        detail::require(!f0.is_zero(), "family members must be nonzero");
        const EFunction f = f0.scaled(1.0 / f0.sup_norm());
        const auto p = detail::spectral_profile(spec, f);
        detail::require(top * p.bound <= n * radial.s_max * (1.0 + 1e-12), "radial range exceeded at smallest n");
        double w = 0.0;
        for (double c : ladder) {
            detail::require(c > 0.0, "ladder magnitudes must be positive");
            const double tail = detail::spectral_tail(p, radial, c / n);
            const double lhs = tail >= 1.0 ? 0.0 : std::exp(n * std::log1p(-tail));
            w = std::max(w, std::abs(lhs - std::exp(-c * p.norm)));
        }
        return w;
    });
    return *std::max_element(worst.begin(), worst.end());
}

inline double sup_diff(const GeneratorSpec& spec, const PerturbedRadialSpec& radial, std::span<const EFunction> family, double n)
{
    return sup_diff(spec, radial, family, n, default_ladder());
}

/// Least-squares slope of log sup_diff on log n, negated, with r^2.
inline RateFitReport fit_delta(std::span<const double> ns, std::span<const double> sup_diffs, std::size_t family_size = 0)
{
    detail::require(ns.size() == sup_diffs.size(), "curve lengths must agree");
    detail::require(ns.size() >= 4, "rate fit needs at least 4 points");
    const std::size_t k = ns.size();
    std::vector<double> x(k), y(k);
    for (std::size_t i = 0; i < k; ++i) {
        detail::require(ns[i] > 0.0, "sample sizes must be positive");
        detail::require(sup_diffs[i] > 0.0, "sup_diff must be positive for a log-log fit (exact coincidence)");
        x[i] = std::log(ns[i]);
        y[i] = std::log(sup_diffs[i]);
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(k);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    detail::require(sxx > 0.0, "rate fit needs distinct sample sizes");
    const double slope = sxy / sxx;
    double sse = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double e = y[i] - (my + slope * (x[i] - mx));
        sse += e * e;
    }
    RateFitReport out;
    out.ns.assign(ns.begin(), ns.end());
    out.sup_diffs.assign(sup_diffs.begin(), sup_diffs.end());
    out.delta_hat = -slope;
    out.fit_r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    out.family_size = family_size;
    return out;
}

/// n = 2^lo, ..., 2^hi.
inline std::vector<double> doubling_ns(int lo = 4, int hi = 14)
{
    std::vector<double> out;
    for (int e = lo; e <= hi; ++e) {
        out.push_back(std::ldexp(1.0, e));
    }
    return out;
}

/// sup_diff curve over ns and its fit.
inline RateFitReport rate_curve(const GeneratorSpec& spec, const PerturbedRadialSpec& radial, std::span<const EFunction> family,
                                std::span<const double> ns, std::span<const double> ladder)
{
    std::vector<double> diffs;
    diffs.reserve(ns.size());
    for (double n : ns) {
        diffs.push_back(sup_diff(spec, radial, family, n, ladder));
    }
    return fit_delta(ns, diffs, family.size());
}

namespace detail {

inline double remainder_at(const SpectralProfile& p, const PerturbedRadialSpec& radial, double magnitude)
{
    std::vector<double> powers;
    powers.reserve(p.sups.size());
    for (double m : p.sups) {
        powers.push_back(std::pow(m, 1.0 + radial.delta));
    }
    const double e = compensated_sum(powers) / static_cast<double>(powers.size());
    const double k = radial.kappa * std::pow(magnitude, radial.delta) * e;
    return radial.delta * k / (p.norm + k);
}

}  // namespace detail

/// r_f(c) = kappa delta |c|^delta E_f / (||f||_D + kappa |c|^delta E_f),  E_f = (1/K) sum_k M_k^{1 + delta}.
inline double von_mises_remainder(const GeneratorSpec& spec, const PerturbedRadialSpec& radial, const EFunction& f, double c)
{
    radial.validate();
    detail::require(c < 0.0, "c must be negative");
    detail::require_unit_sphere(f);
    const auto p = detail::spectral_profile(spec, f);
    detail::require_radial_range(radial, -c, p.bound);
    return detail::remainder_at(p, radial, -c);
}

/// Integral of r_f(t) / t over [c, 0), by quadrature after t = c w^{1/delta}.
inline QuadratureResult von_mises_integral(const GeneratorSpec& spec, const PerturbedRadialSpec& radial, const EFunction& f, double c,
                                           const QuadratureOptions& opts = {})
{
    von_mises_remainder(spec, radial, f, c);
    const auto p = detail::spectral_profile(spec, f);
    const double d = radial.delta;
    auto g = [&](double w) { return w <= 0.0 ? 0.0 : detail::remainder_at(p, radial, -c * std::pow(w, 1.0 / d)) / (d * w); };
    auto r = integrate(g, 0.0, 1.0, opts);
    r.value = -r.value;
    return r;
}

/// max over family of |integral of r_f(t) / t over [c, 0)|.
inline double von_mises_family_max(const GeneratorSpec& spec, const PerturbedRadialSpec& radial, std::span<const EFunction> family,
                                   double c, const QuadratureOptions& opts = {})
{
    double worst = 0.0;
    for (const auto& f0 : family) {
        const EFunction f = f0.scaled(1.0 / f0.sup_norm());
        worst = std::max(worst, std::abs(von_mises_integral(spec, radial, f, c, opts).value));
    }
    return worst;
}

}  // namespace maxstable
