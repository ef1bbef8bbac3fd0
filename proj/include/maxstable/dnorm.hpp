#pragma once

// D-norms ||f||_D = E(sup_t |f(t)| Z_t) and their first variations in the
// direction of a point indicator 1_{t0}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "maxstable/error.hpp"
#include "maxstable/function_space.hpp"
#include "maxstable/generators.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

enum class Method { exact, monte_carlo };

inline const char* to_string(Method m) { return m == Method::exact ? "exact" : "monte_carlo"; }

struct DnormEstimate
{
    double value = 0.0;
    Method method = Method::exact;
    double std_error = 0.0;
    std::size_t replicates = 0;
};

inline constexpr std::size_t default_replicates = 100000;

namespace detail {

inline double sup_product(std::span<const double> f, std::span<const double> z)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        s = std::max(s, std::abs(f[i]) * z[i]);
    }
    return s;
}

inline double sup_product_excluding(std::span<const double> f, std::span<const double> z, std::size_t skip)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i != skip) {
            s = std::max(s, std::abs(f[i]) * z[i]);
        }
    }
    return s;
}

/// Monte Carlo mean of functional(z) over `replicates` generator draws, one stream per replicate.
template <class Functional>
DnormEstimate monte_carlo(const GeneratorRealizer& r, std::size_t replicates, const StreamKey& key, Functional&& functional)
{
    require(replicates >= 2, "Monte Carlo needs at least 2 replicates");
    require_sampleable(r);
    const auto values = parallel_map(replicates, [&](std::size_t i) {
        auto stream = key.stream(i);
        std::vector<double> z(r.size());
        r.draw(stream, z);
        return functional(std::span<const double>(z));
    });
    const auto s = summarize(values);
    return {s.mean, Method::monte_carlo, s.std_error, replicates};
}

/// Exact weighted sum of functional(atom) over the enumerable atoms.
template <class Functional>
DnormEstimate enumerate(const GeneratorRealizer& r, Functional&& functional)
{
    std::vector<double> terms;
    const double w = 1.0 / static_cast<double>(r.atoms().size());
    for (const auto& a : r.atoms()) {
        terms.push_back(w * functional(std::span<const double>(a)));
    }
    return {compensated_sum(terms), Method::exact, 0.0, 0};
}

}  // namespace detail

/// Closed form or exact enumeration. Throws for RandomCosine and for LogisticFidis
/// with f not supported on the generator's locations.
inline DnormEstimate dnorm_exact(const GeneratorSpec& spec, const EFunction& f)
{
    GeneratorRealizer r(spec, f.grid());
    if (r.enumerable()) {
        return detail::enumerate(r, [&](std::span<const double> z) { return detail::sup_product(f.values(), z); });
    }
    if (const auto* lf = std::get_if<gen::LogisticFidis>(&spec)) {
        const auto& support = r.support();
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (f[i] != 0.0 && std::find(support.begin(), support.end(), i) == support.end()) {
                throw ValidationError("no closed form; use dnorm_mc");
            }
        }
        double sum = 0.0;
        for (std::size_t idx : support) {
            sum += std::pow(std::abs(f[idx]), lf->lambda);
        }
        return {std::pow(sum, 1.0 / lf->lambda), Method::exact, 0.0, 0};
    }
    throw ValidationError("no closed form; use dnorm_mc");
}

/// Sample mean of sup_t |f(t)| Z_t over independent generator draws.
inline DnormEstimate dnorm_mc(const GeneratorSpec& spec, const EFunction& f, std::size_t replicates, const StreamKey& key)
{
    GeneratorRealizer r(spec, f.grid());
    return detail::monte_carlo(r, replicates, key, [&](std::span<const double> z) { return detail::sup_product(f.values(), z); });
}

/// Exact when a closed form exists, Monte Carlo otherwise.
inline DnormEstimate dnorm(const GeneratorSpec& spec, const EFunction& f, std::size_t replicates, const StreamKey& key)
{
    try {
        return dnorm_exact(spec, f);
    } catch (const ValidationError&) {
        return dnorm_mc(spec, f, replicates, key);
    }
}

enum class Side { plus, minus };

/// One-sided first variation of ||.||_D at f in the direction 1_{t0}.
///
/// With a = |f(t0)| Z_{t0} and b = sup_{t != t0} |f(t)| Z_t the result is
/// sgn(f(t0)) E(Z_{t0} 1_A). For f(t0) > 0 the right variation uses A = {b <= a}
/// and the left one A = {b < a}; for f(t0) < 0 the two events swap.
inline DnormEstimate variation(const GeneratorSpec& spec, const EFunction& f, std::size_t t0, Side side,
                               std::size_t replicates, const StreamKey& key)
{
    detail::require(t0 < f.size(), "invalid t0 index");
    const double ft0 = f[t0];
    detail::require(ft0 != 0.0, "variation undefined at zero");
    const bool strict = ft0 > 0.0 ? side == Side::minus : side == Side::plus;
    const double sign = ft0 > 0.0 ? 1.0 : -1.0;
    const auto fv = f.values();

    auto functional = [&](std::span<const double> z) {
        const double a = std::abs(ft0) * z[t0];
        const double b = detail::sup_product_excluding(fv, z, t0);
        const bool hit = strict ? (b < a) : (b <= a);
        return hit ? z[t0] : 0.0;
    };

    GeneratorRealizer r(spec, f.grid());
    DnormEstimate e = r.enumerable() ? detail::enumerate(r, functional) : detail::monte_carlo(r, replicates, key, functional);
    e.value *= sign;
    return e;
}

/// ||f||_D under a weighted-atom rule (see expectation_rule).
inline double dnorm_rule(std::span<const WeightedPath> rule, const EFunction& f)
{
    std::vector<double> terms;
    terms.reserve(rule.size());
    for (const auto& wp : rule) {
        terms.push_back(wp.weight * detail::sup_product(f.values(), wp.path.values()));
    }
    return compensated_sum(terms);
}

}  // namespace maxstable
