#pragma once

// Functional domain of attraction: margins, copula processes and the
// two-sided convergence experiment
//
//   P(max_i (X^(i) - b_n) / a_n <= f)   and   P(n max_i (U^(i) - 1) <= g),
//
// both compared with exp(-||g||_D), g = log G(f).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "maxstable/dnorm.hpp"
#include "maxstable/error.hpp"
#include "maxstable/function_space.hpp"
#include "maxstable/generators.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/sampler.hpp"

namespace maxstable {

namespace margins {

/// F(x) = x on [0, 1]; G(x) = exp(x), x <= 0; a_n = 1/n, b_n = 1.
struct UniformNegExp
{
    static constexpr const char* name = "uniform-negexp";

    double cdf(double x) const { return std::clamp(x, 0.0, 1.0); }
    bool in_quantile_domain(double u) const { return u >= 0.0 && u <= 1.0; }
    double quantile(double u) const { return u; }
    double evd_cdf(double x) const { return std::exp(std::min(x, 0.0)); }
    double evd_log_cdf(double x) const { return std::min(x, 0.0); }
    double evd_quantile(double p) const { return std::log(p); }
    double scale(double n) const { return 1.0 / n; }
    double shift(double) const { return 1.0; }

    /// n (F(x/n + 1) - 1) in closed form.
    double scaled_deficit(double x, double n) const
    {
        if (x >= 0.0) return 0.0;
        if (x <= -n) return -n;
        return x;
    }
};

/// F(x) = 1 - exp(-x), x >= 0; G(x) = exp(-exp(-x)); a_n = 1, b_n = log n.
struct ExpGumbel
{
    static constexpr const char* name = "exp-gumbel";

    double cdf(double x) const { return x <= 0.0 ? 0.0 : -std::expm1(-x); }
    bool in_quantile_domain(double u) const { return u >= 0.0 && u < 1.0; }
    double quantile(double u) const { return -std::log1p(-u); }
    double evd_cdf(double x) const { return std::exp(-std::exp(-x)); }
    double evd_log_cdf(double x) const { return -std::exp(-x); }
    double evd_quantile(double p) const { return -std::log(-std::log(p)); }
    double scale(double) const { return 1.0; }
    double shift(double n) const { return std::log(n); }

    /// n (F(x + log n) - 1) in closed form: -exp(-x) once x + log n >= 0, else -n.
    double scaled_deficit(double x, double n) const
    {
        if (x + std::log(n) < 0.0) return -n;
        return -std::exp(-x);
    }
};

}  // namespace margins

using MarginFamily = std::variant<margins::UniformNegExp, margins::ExpGumbel>;

inline std::string describe(const MarginFamily& fam)
{
    return std::visit([](const auto& m) { return std::string(m.name); }, fam);
}

/// U = 1 + V for an SGPP path drawn with floor M = -1.
inline ProcessPath copula_from_sgpp(const ProcessPath& v)
{
    detail::require(v.kind() == PathKind::sgpp, "copula construction needs an SGPP path");
    detail::require(v.floor() == -1.0, "copula construction needs SGPP floor M = -1");
    std::vector<double> u(v.values().begin(), v.values().end());
    for (double& x : u) {
        x += 1.0;
    }
    return {v.grid(), std::move(u), PathKind::copula};
}

/// X_t = F^{-1}(U_t).
inline ProcessPath apply_margins(const ProcessPath& u, const MarginFamily& fam)
{
    detail::require(u.kind() == PathKind::copula, "margins apply to copula paths");
    std::vector<double> x(u.values().begin(), u.values().end());
    std::visit(
        [&](const auto& m) {
            for (double& v : x) {
                detail::require(m.in_quantile_domain(v), "copula value outside the quantile domain");
                v = m.quantile(v);
            }
        },
        fam);
    return {u.grid(), std::move(x), PathKind::margins};
}

/// sup_t | n (F(a_n f(t) + b_n) - 1) - log G(f(t)) |.
inline double condition3_discrepancy(const MarginFamily& fam, const EFunction& f, double n)
{
    detail::require(n >= 1.0, "n must be at least 1");
    return std::visit(
        [&](const auto& m) {
            double worst = 0.0;
            for (double x : f.values()) {
                detail::require(m.evd_cdf(x) > 0.0, "outside condition (3) domain");
                worst = std::max(worst, std::abs(m.scaled_deficit(x, n) - m.evd_log_cdf(x)));
            }
            return worst;
        },
        fam);
}

/// g = log G(f), pointwise.
inline EFunction log_evd_transform(const MarginFamily& fam, const EFunction& f)
{
    std::vector<double> g(f.values().begin(), f.values().end());
    std::visit(
        [&](const auto& m) {
            for (double& x : g) {
                detail::require(m.evd_cdf(x) > 0.0, "outside condition (3) domain");
                x = m.evd_log_cdf(x);
            }
        },
        fam);
    return EFunction(f.grid(), std::move(g), {}, SignClass::nonpositive);
}

struct DoaReport
{
    std::size_t n = 0;
    std::size_t replicates = 0;
    double target = 0.0;          ///< exp(-||g||_D)
    double target_std_error = 0.0;  ///< nonzero when ||g||_D is itself a Monte Carlo estimate
    Proportion copula_side;       ///< P(n max_i (U^(i) - 1) <= g)
    Proportion margins_side;      ///< P(max_i (X^(i) - b_n) / a_n <= f)
    double condition3 = 0.0;
};

/// Simulates `replicates` blocks of n copula paths; block r uses key.stream(r).
inline DoaReport doa_experiment(const GeneratorSpec& spec, const MarginFamily& fam, const EFunction& f, std::size_t n,
                                std::size_t replicates, const StreamKey& key)
{
    detail::require(n >= 1, "n must be at least 1");
    detail::require(replicates >= 1, "need at least one replicate");
    const EFunction g = log_evd_transform(fam, f);
    const GeneratorRealizer r(spec, f.grid());
    detail::bound_or_throw(r);

    DoaReport report;
    report.n = n;
    report.replicates = replicates;
    report.condition3 = condition3_discrepancy(fam, f, static_cast<double>(n));
    const auto norm = dnorm(spec, g, default_replicates, key.child(0x6e6f726d));
    report.target = std::exp(-norm.value);
    report.target_std_error = report.target * norm.std_error;

    const double nd = static_cast<double>(n);
    const auto fv = f.values();
    const auto gv = g.values();
    const std::size_t size = f.size();
    const auto outcomes = parallel_map(replicates, [&](std::size_t rep) {
        auto stream = key.stream(rep);
        std::vector<double> max_u(size, -std::numeric_limits<double>::infinity());
        std::vector<double> max_x(size, -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < n; ++i) {
            const auto u = copula_from_sgpp(sample_sgpp(r, -1.0, stream));
            const auto x = apply_margins(u, fam);
            for (std::size_t t = 0; t < size; ++t) {
                max_u[t] = std::max(max_u[t], u[t]);
                max_x[t] = std::max(max_x[t], x[t]);
            }
        }
        bool copula_ok = true;
        bool margins_ok = true;
        std::visit(
            [&](const auto& m) {
                const double a = m.scale(nd);
                const double b = m.shift(nd);
                for (std::size_t t = 0; t < size; ++t) {
                    copula_ok = copula_ok && nd * (max_u[t] - 1.0) <= gv[t];
                    margins_ok = margins_ok && (max_x[t] - b) / a <= fv[t];
                }
            },
            fam);
        return static_cast<int>(copula_ok) | (static_cast<int>(margins_ok) << 1);
    });
    std::size_t copula_hits = 0;
    std::size_t margins_hits = 0;
    for (int o : outcomes) {
        copula_hits += (o & 1) ? 1 : 0;
        margins_hits += (o & 2) ? 1 : 0;
    }
    report.copula_side = binomial(copula_hits, replicates);
    report.margins_side = binomial(margins_hits, replicates);
    return report;
}

}  // namespace maxstable
