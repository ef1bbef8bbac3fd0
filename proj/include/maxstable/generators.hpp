#pragma once

// Generator processes Z with 0 <= Z_t <= m and E(Z_t) = 1.
//
//   Constant         Z = 1 (complete dependence)
//   FiniteSpectral   Z = z_J, J uniform on {1..K}
//   RandomCosine     Z_t = 1 + a cos(2 pi t + Theta), Theta uniform on [0, 2 pi)
//   DiscreteSimplex  Z = d e_J at d grid locations (independence)
//   LogisticFidis    Z_i = X_i / Gamma(1 - 1/lambda), X_i iid Frechet(lambda) (unbounded)

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "maxstable/error.hpp"
#include "maxstable/function_space.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

namespace gen {

struct Constant
{
};

/// One spectral atom: either a closed-form name ("linear-up" = 2t,
/// "linear-down" = 2 - 2t, "one" = 1) or explicit values on the grid.
struct SpectralAtom
{
    std::string name;
    std::vector<double> values;
};

struct FiniteSpectral
{
    std::vector<SpectralAtom> atoms;

    /// {2t, 2 - 2t}
    static FiniteSpectral linear() { return {{{"linear-up", {}}, {"linear-down", {}}}}; }
};

struct RandomCosine
{
    double amplitude = 0.5;
};

struct DiscreteSimplex
{
    std::vector<double> locations;

    /// d equally spaced locations i / (d - 1) (d = 1 puts the single location at 0).
    static DiscreteSimplex evenly(std::size_t d)
    {
        DiscreteSimplex s;
        for (std::size_t i = 0; i < d; ++i) {
            s.locations.push_back(d == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d - 1));
        }
        return s;
    }
};

struct LogisticFidis
{
    double lambda = 2.0;
    std::vector<double> locations;
};

}  // namespace gen

using GeneratorSpec = std::variant<gen::Constant, gen::FiniteSpectral, gen::RandomCosine, gen::DiscreteSimplex, gen::LogisticFidis>;

/// A realized generator path, optionally with its pathwise derivative.
class GeneratorSample
{
  public:
    GeneratorSample() = default;
    GeneratorSample(GridPtr grid, std::vector<double> values, std::optional<std::vector<double>> derivative = std::nullopt)
        : grid_(std::move(grid)), values_(std::move(values)), derivative_(std::move(derivative))
    {
    }

    const GridPtr& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    const std::optional<std::vector<double>>& derivative() const noexcept { return derivative_; }
    double operator[](std::size_t i) const { return values_[i]; }

  private:
    GridPtr grid_;
    std::vector<double> values_;
    std::optional<std::vector<double>> derivative_;
};

struct WeightedPath
{
    double weight = 0.0;
    GeneratorSample path;
};

namespace detail {

inline std::vector<double> atom_values(const gen::SpectralAtom& atom, const Grid& grid)
{
    std::vector<double> v(grid.size());
    if (atom.name.empty()) {
        require(atom.values.size() == grid.size(), "explicit atom length must match the grid");
        v = atom.values;
    } else if (atom.name == "linear-up") {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = 2.0 * grid[i];
    } else if (atom.name == "linear-down") {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = 2.0 - 2.0 * grid[i];
    } else if (atom.name == "one") {
        std::fill(v.begin(), v.end(), 1.0);
    } else {
        throw ValidationError("unknown spectral atom '" + atom.name + "'");
    }
    for (double x : v) {
        require(std::isfinite(x) && x >= 0.0, "spectral atoms must be nonnegative");
    }
    return v;
}

inline std::vector<std::size_t> location_indices(std::span<const double> locations, const Grid& grid)
{
    std::vector<std::size_t> idx;
    for (double t : locations) {
        idx.push_back(grid.require_index(t, "off-grid generator location"));
    }
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            require(idx[i] != idx[j], "generator locations must be distinct");
        }
    }
    return idx;
}

}  // namespace detail

/// A spec bound to a grid: validated once, atoms precomputed, ready to draw
/// many paths without re-validation.
class GeneratorRealizer
{
  public:
    GeneratorRealizer(GeneratorSpec spec, GridPtr grid) : spec_(std::move(spec)), grid_(std::move(grid))
    {
        detail::require(grid_ != nullptr, "generator needs a grid");
        std::visit([this](const auto& s) { prepare(s); }, spec_);
    }

    const GeneratorSpec& spec() const noexcept { return spec_; }
    const GridPtr& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return grid_->size(); }

    /// Tight pointwise bound on the grid; nullopt when unbounded.
    std::optional<double> bound() const { return bound_; }

    bool has_derivative() const
    {
        return std::holds_alternative<gen::Constant>(spec_) || std::holds_alternative<gen::RandomCosine>(spec_);
    }

    /// Exact atom decomposition for Constant, FiniteSpectral and DiscreteSimplex.
    bool enumerable() const { return !atoms_.empty(); }
    const std::vector<std::vector<double>>& atoms() const noexcept { return atoms_; }

    /// Grid indices where the generator can be positive (fidis locations, or all).
    const std::vector<std::size_t>& support() const noexcept { return support_; }

    /// Writes one draw into out (and the pathwise derivative into deriv if requested and available).
    template <class Source>
    void draw(Source& rng, std::span<double> out, std::span<double> deriv = {}) const
    {
        if (const auto* rc = std::get_if<gen::RandomCosine>(&spec_)) {
            const double theta = 2.0 * std::numbers::pi * rng.uniform();
            cosine_at(*rc, theta, out, deriv);
            return;
        }
        if (const auto* lf = std::get_if<gen::LogisticFidis>(&spec_)) {
            std::fill(out.begin(), out.end(), 0.0);
            for (std::size_t idx : support_) {
                const double u = rng.uniform();
                out[idx] = std::pow(-std::log(u), -1.0 / lf->lambda) / logistic_scale_;
            }
            return;
        }
        // enumerable: pick an atom uniformly
        std::size_t k = 0;
        if (atoms_.size() > 1) {
            k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(atoms_.size()));
            k = std::min(k, atoms_.size() - 1);
        }
        std::copy(atoms_[k].begin(), atoms_[k].end(), out.begin());
        if (!deriv.empty()) {
            std::fill(deriv.begin(), deriv.end(), 0.0);
        }
    }

    template <class Source>
    GeneratorSample sample(Source& rng) const
    {
        std::vector<double> values(size());
        if (has_derivative()) {
            std::vector<double> deriv(size());
            draw(rng, values, deriv);
            return {grid_, std::move(values), std::move(deriv)};
        }
        draw(rng, values);
        return {grid_, std::move(values)};
    }

    /// RandomCosine realization at a fixed phase.
    GeneratorSample at_phase(double theta) const
    {
        const auto* rc = std::get_if<gen::RandomCosine>(&spec_);
        detail::require(rc != nullptr, "phase evaluation needs a RandomCosine generator");
        std::vector<double> values(size()), deriv(size());
        cosine_at(*rc, theta, values, deriv);
        return {grid_, std::move(values), std::move(deriv)};
    }

  private:
    void prepare(const gen::Constant&)
    {
        atoms_.assign(1, std::vector<double>(size(), 1.0));
        bound_ = 1.0;
        all_support();
    }

    void prepare(const gen::FiniteSpectral& s)
    {
        detail::require(!s.atoms.empty(), "finite spectral generator needs at least one atom");
        for (const auto& atom : s.atoms) {
            atoms_.push_back(detail::atom_values(atom, *grid_));
        }
        const double k = static_cast<double>(atoms_.size());
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            double mean = 0.0;
            for (const auto& a : atoms_) {
                mean += a[i];
                m = std::max(m, a[i]);
            }
            mean /= k;
            detail::require(std::abs(mean - 1.0) <= 1e-12, "finite spectral atoms must average to 1 at every grid point");
        }
        bound_ = m;
        all_support();
    }

    void prepare(const gen::RandomCosine& s)
    {
        detail::require(s.amplitude > 0.0 && s.amplitude <= 1.0, "random cosine amplitude must lie in (0, 1]");
        bound_ = 1.0 + s.amplitude;
        all_support();
    }

    void prepare(const gen::DiscreteSimplex& s)
    {
        detail::require(!s.locations.empty(), "discrete simplex needs at least one location");
        support_ = detail::location_indices(s.locations, *grid_);
        const double d = static_cast<double>(support_.size());
        for (std::size_t idx : support_) {
            std::vector<double> a(size(), 0.0);
            a[idx] = d;
            atoms_.push_back(std::move(a));
        }
        bound_ = d;
    }

    void prepare(const gen::LogisticFidis& s)
    {
        detail::require(s.lambda >= 1.0, "logistic generator needs lambda >= 1");
        detail::require(!s.locations.empty(), "logistic generator needs at least one location");
        support_ = detail::location_indices(s.locations, *grid_);
        bound_ = std::nullopt;
        if (s.lambda > 1.0) {
            logistic_scale_ = std::tgamma(1.0 - 1.0 / s.lambda);
        }
    }

    void all_support()
    {
        support_.resize(size());
        for (std::size_t i = 0; i < size(); ++i) support_[i] = i;
    }

    void cosine_at(const gen::RandomCosine& rc, double theta, std::span<double> out, std::span<double> deriv) const
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t i = 0; i < size(); ++i) {
            const double arg = two_pi * (*grid_)[i] + theta;
            out[i] = 1.0 + rc.amplitude * std::cos(arg);
            if (!deriv.empty()) {
                deriv[i] = -two_pi * rc.amplitude * std::sin(arg);
            }
        }
    }

    GeneratorSpec spec_;
    GridPtr grid_;
    std::optional<double> bound_;
    std::vector<std::vector<double>> atoms_;
    std::vector<std::size_t> support_;
    double logistic_scale_ = 0.0;
};

inline void require_sampleable(const GeneratorRealizer& r)
{
    if (const auto* lf = std::get_if<gen::LogisticFidis>(&r.spec())) {
        detail::require(lf->lambda > 1.0, "logistic generator with lambda = 1 has no integrable Frechet representation");
    }
}

/// One realized path; the derivative is filled for Constant (zero) and RandomCosine.
template <class Source>
GeneratorSample sample_generator(const GeneratorSpec& spec, const GridPtr& grid, Source& rng)
{
    GeneratorRealizer r(spec, grid);
    require_sampleable(r);
    return r.sample(rng);
}

/// Constant 1, FiniteSpectral max_k max_t z_k, RandomCosine 1 + a, DiscreteSimplex d, LogisticFidis unbounded.
inline std::optional<double> generator_bound(const GeneratorSpec& spec, const GridPtr& grid = Grid::uniform())
{
    return GeneratorRealizer(spec, grid).bound();
}

/// The K atoms of a FiniteSpectral generator with weights 1/K.
inline std::vector<WeightedPath> finite_spectral_atoms(const GeneratorSpec& spec, const GridPtr& grid)
{
    detail::require(std::holds_alternative<gen::FiniteSpectral>(spec), "finite_spectral_atoms needs a FiniteSpectral generator");
    GeneratorRealizer r(spec, grid);
    std::vector<WeightedPath> out;
    const double w = 1.0 / static_cast<double>(r.atoms().size());
    for (const auto& a : r.atoms()) {
        out.push_back({w, GeneratorSample(grid, a)});
    }
    return out;
}

/// Weighted atoms approximating (or equal to) the law of Z.
///   enumerable specs: the exact atoms;
///   RandomCosine: midpoint rule over Theta with `count` nodes;
///   LogisticFidis: `count` Monte Carlo draws with weights 1/count.
inline std::vector<WeightedPath> expectation_rule(const GeneratorRealizer& r, std::size_t count, const StreamKey& key)
{
    std::vector<WeightedPath> out;
    if (r.enumerable()) {
        const double w = 1.0 / static_cast<double>(r.atoms().size());
        const bool with_derivative = r.has_derivative();
        for (const auto& a : r.atoms()) {
            if (with_derivative) {
                out.push_back({w, GeneratorSample(r.grid(), a, std::vector<double>(a.size(), 0.0))});
            } else {
                out.push_back({w, GeneratorSample(r.grid(), a)});
            }
        }
        return out;
    }
    detail::require(count >= 1, "expectation rule needs at least one node");
    const double w = 1.0 / static_cast<double>(count);
    if (std::holds_alternative<gen::RandomCosine>(r.spec())) {
        for (std::size_t k = 0; k < count; ++k) {
            const double theta = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
            out.push_back({w, r.at_phase(theta)});
        }
        return out;
    }
    require_sampleable(r);
    for (std::size_t k = 0; k < count; ++k) {
        auto s = key.stream(k);
        out.push_back({w, r.sample(s)});
    }
    return out;
}

/// Short label used in CSV keys and reports.
inline std::string describe(const GeneratorSpec& spec)
{
    struct Visitor
    {
        std::string operator()(const gen::Constant&) const { return "constant"; }
        std::string operator()(const gen::FiniteSpectral& s) const
        {
            std::string out = "finite-spectral:";
            for (std::size_t i = 0; i < s.atoms.size(); ++i) {
                out += (i ? "+" : "") + (s.atoms[i].name.empty() ? std::string("explicit") : s.atoms[i].name);
            }
            return out;
        }
        std::string operator()(const gen::RandomCosine& s) const { return "random-cosine:" + std::to_string(s.amplitude); }
        std::string operator()(const gen::DiscreteSimplex& s) const { return "discrete-simplex:" + std::to_string(s.locations.size()); }
        std::string operator()(const gen::LogisticFidis& s) const
        {
            return "logistic:" + std::to_string(s.lambda) + ":" + std::to_string(s.locations.size());
        }
    };
    return std::visit(Visitor{}, spec);
}

}  // namespace maxstable
