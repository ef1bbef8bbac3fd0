#pragma once

// Exact path samplers on a grid.
//
// SMSP: eta_t = max_i (-P_i / Z^{(i)}_t) over a unit-rate Poisson process
// P_1 < P_2 < ... on (0, inf) with iid generator draws Z^{(i)}. Once
// P_j >= m |min_t eta_t| no later point can raise any grid value, so the
// superposition stops there and the path is exact in distribution.
//
// SGPP: V = max(-U / Z, M); GPP: Y = Z / U; perturbed SGPP: V = max(-S / Z, M)
// with S drawn from the radial df F_S(s) = s + kappa s^{1 + delta}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "maxstable/error.hpp"
#include "maxstable/function_space.hpp"
#include "maxstable/generators.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

enum class PathKind { smsp, sgpp, gpp, copula, margins };

inline const char* to_string(PathKind k)
{
    switch (k) {
        case PathKind::smsp: return "smsp";
        case PathKind::sgpp: return "sgpp";
        case PathKind::gpp: return "gpp";
        case PathKind::copula: return "copula";
        case PathKind::margins: return "margins";
    }
    return "?";
}

class ProcessPath
{
  public:
    ProcessPath() = default;
    ProcessPath(GridPtr grid, std::vector<double> values, PathKind kind, double floor = std::numeric_limits<double>::quiet_NaN())
        : grid_(std::move(grid)), values_(std::move(values)), kind_(kind), floor_(floor)
    {
        detail::require(grid_ && values_.size() == grid_->size(), "path length must match the grid");
    }

    const GridPtr& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    PathKind kind() const noexcept { return kind_; }
    /// Lower clamp M of an SGPP path (NaN for other kinds).
    double floor() const noexcept { return floor_; }
    double operator[](std::size_t i) const { return values_[i]; }

  private:
    GridPtr grid_;
    std::vector<double> values_;
    PathKind kind_ = PathKind::smsp;
    double floor_ = std::numeric_limits<double>::quiet_NaN();
};

struct SeedProvenance
{
    std::uint64_t seed = 0;
    std::uint64_t experiment = 0;
    std::size_t first_replicate = 0;
};

struct PathEnsemble
{
    std::vector<ProcessPath> paths;
    SeedProvenance provenance;

    GridPtr grid() const { return paths.empty() ? nullptr : paths.front().grid(); }
    std::size_t size() const { return paths.size(); }
};

/// Radial df F_S(s) = s + kappa s^{1 + delta} on [0, s_max], continued with slope 1 above s_max.
struct PerturbedRadialSpec
{
    double delta = 0.5;
    double kappa = 0.5;
    double s_max = 0.5;

    void validate() const
    {
        detail::require(delta > 0.0 && delta <= 1.0, "radial delta must lie in (0, 1]");
        detail::require(kappa >= 0.0, "radial kappa must be nonnegative");
        detail::require(s_max > 0.0 && s_max <= 1.0, "radial s_max must lie in (0, 1]");
        detail::require(cdf(s_max) <= 1.0, "radial df exceeds 1 at s_max");
    }

    /// F_S on its validity range [0, s_max].
    double cdf(double s) const { return s + kappa * std::pow(s, 1.0 + delta); }

    /// F_S'(s).
    double density(double s) const { return 1.0 + kappa * (1.0 + delta) * std::pow(s, delta); }

    double quantile(double u) const
    {
        const double top = cdf(s_max);
        if (u >= top) {
            return s_max + (u - top);
        }
        if (kappa == 0.0) {
            return u;
        }
        auto f = [&](double s) { return cdf(s) - u; };
        auto tol = [](double a, double b) { return b - a <= 1e-12; };
        std::uintmax_t iters = 200;
        const auto [lo, hi] = boost::math::tools::toms748_solve(f, 0.0, s_max, -u, top - u, tol, iters);
        return 0.5 * (lo + hi);
    }
};

namespace detail {

inline double bound_or_throw(const GeneratorRealizer& r)
{
    const auto m = r.bound();
    require(m.has_value(), "exact sampler requires bounded generator");
    return *m;
}

}  // namespace detail

/// One SMSP path. threshold_factor >= 1 scales the stopping rule; any factor >= 1
/// yields the same path for the same stream.
template <class Source>
ProcessPath sample_smsp(const GeneratorRealizer& r, Source& rng, double threshold_factor = 1.0)
{
    const double m = detail::bound_or_throw(r);
    const std::size_t n = r.size();
    const auto& support = r.support();
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> eta(n, neg_inf);
    std::vector<double> z(n);
    double arrival = 0.0;
    double floor = neg_inf;
    while (true) {
        arrival += rng.exponential();
        if (floor > neg_inf && arrival >= threshold_factor * m * -floor) {
            break;
        }
        r.draw(rng, z);
        for (std::size_t i : support) {
            if (z[i] > 0.0) {
                eta[i] = std::max(eta[i], -arrival / z[i]);
            }
        }
        floor = 0.0;
        for (std::size_t i : support) {
            floor = std::min(floor, eta[i]);
        }
    }
    return {r.grid(), std::move(eta), PathKind::smsp};
}

template <class Source>
ProcessPath sample_smsp(const GeneratorSpec& spec, const GridPtr& grid, Source& rng)
{
    return sample_smsp(GeneratorRealizer(spec, grid), rng);
}

template <class Source>
ProcessPath sample_sgpp(const GeneratorRealizer& r, double floor, Source& rng)
{
    detail::require(floor < 0.0, "SGPP floor M must be negative");
    detail::bound_or_throw(r);
    std::vector<double> v(r.size());
    const double u = rng.uniform();
    r.draw(rng, v);
    for (double& x : v) {
        x = x > 0.0 ? std::max(-u / x, floor) : floor;
    }
    return {r.grid(), std::move(v), PathKind::sgpp, floor};
}

template <class Source>
ProcessPath sample_sgpp(const GeneratorSpec& spec, const GridPtr& grid, double floor, Source& rng)
{
    return sample_sgpp(GeneratorRealizer(spec, grid), floor, rng);
}

template <class Source>
ProcessPath sample_gpp(const GeneratorRealizer& r, Source& rng)
{
    require_sampleable(r);
    std::vector<double> y(r.size());
    const double u = rng.uniform();
    r.draw(rng, y);
    for (double& x : y) {
        x /= u;
    }
    return {r.grid(), std::move(y), PathKind::gpp};
}

template <class Source>
ProcessPath sample_gpp(const GeneratorSpec& spec, const GridPtr& grid, Source& rng)
{
    return sample_gpp(GeneratorRealizer(spec, grid), rng);
}

template <class Source>
ProcessPath sample_perturbed_sgpp(const GeneratorRealizer& r, const PerturbedRadialSpec& radial, double floor, Source& rng)
{
    radial.validate();
    detail::require(floor < 0.0, "SGPP floor M must be negative");
    detail::bound_or_throw(r);
    std::vector<double> v(r.size());
    const double s = radial.quantile(rng.uniform());
    r.draw(rng, v);
    for (double& x : v) {
        x = x > 0.0 ? std::max(-s / x, floor) : floor;
    }
    return {r.grid(), std::move(v), PathKind::sgpp, floor};
}

template <class Source>
ProcessPath sample_perturbed_sgpp(const GeneratorSpec& spec, const GridPtr& grid, const PerturbedRadialSpec& radial, Source& rng,
                                  double floor = -1.0)
{
    return sample_perturbed_sgpp(GeneratorRealizer(spec, grid), radial, floor, rng);
}

enum class SimulationKind { smsp, sgpp, gpp, perturbed_sgpp };

struct SimulationOptions
{
    SimulationKind kind = SimulationKind::smsp;
    double floor = -1.0;
    PerturbedRadialSpec radial{};
};

/// Replicate r of the ensemble is drawn from key.stream(first + r).
inline PathEnsemble simulate(const GeneratorSpec& spec, const GridPtr& grid, std::size_t count, const StreamKey& key,
                             const SimulationOptions& opts = {}, std::size_t first = 0)
{
    const GeneratorRealizer r(spec, grid);
    if (opts.kind != SimulationKind::gpp) {
        detail::bound_or_throw(r);
    }
    PathEnsemble out;
    out.provenance = {key.seed, key.experiment, first};
    out.paths = parallel_map(count, [&](std::size_t i) {
        auto stream = key.stream(first + i);
        switch (opts.kind) {
            case SimulationKind::smsp: return sample_smsp(r, stream);
            case SimulationKind::sgpp: return sample_sgpp(r, opts.floor, stream);
            case SimulationKind::gpp: return sample_gpp(r, stream);
            case SimulationKind::perturbed_sgpp: return sample_perturbed_sgpp(r, opts.radial, opts.floor, stream);
        }
        return ProcessPath{};
    });
    return out;
}

struct Proportion
{
    double value = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

inline Proportion binomial(std::size_t hits, std::size_t total)
{
    detail::require(total > 0, "empty sample");
    const double p = static_cast<double>(hits) / static_cast<double>(total);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(total)), total};
}

/// path <= f at every grid point (overrides included).
template <GridPath P>
bool below(const P& path, const EFunction& f)
{
    require_same_grid(path.grid(), f.grid());
    const auto pv = path.values();
    const auto fv = f.values();
    for (std::size_t i = 0; i < fv.size(); ++i) {
        if (!(pv[i] <= fv[i])) {
            return false;
        }
    }
    return true;
}

/// Fraction of paths lying below f, with binomial standard error.
inline Proportion fdf_empirical(const PathEnsemble& ensemble, const EFunction& f)
{
    detail::require(!ensemble.paths.empty(), "empty ensemble");
    for (double v : f.values()) {
        detail::require(std::isfinite(v), "constraint must be finite");
    }
    std::size_t hits = 0;
    for (const auto& p : ensemble.paths) {
        hits += below(p, f) ? 1 : 0;
    }
    return binomial(hits, ensemble.paths.size());
}

/// sup over {t : f(t) != 0} of path(t) / |f(t)|.
template <GridPath P>
double eta_functional(const P& path, const EFunction& f)
{
    detail::require(!f.is_zero(), "eta functional needs f not identically zero");
    if constexpr (requires { path.kind(); }) {
        detail::require(path.kind() == PathKind::smsp || path.kind() == PathKind::sgpp, "eta functional needs an smsp or sgpp path");
    }
    require_same_grid(path.grid(), f.grid());
    const auto pv = path.values();
    const auto fv = f.values();
    double s = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fv.size(); ++i) {
        if (fv[i] != 0.0) {
            s = std::max(s, pv[i] / std::abs(fv[i]));
        }
    }
    return s;
}

}  // namespace maxstable
