#pragma once

// Functions on [0,1] with finitely many discontinuities, discretized on a grid.
//
// An EFunction carries a continuous "base" part sampled at the grid points and
// a finite set of point overrides that redefine the value at isolated grid
// points. The overrides model jump points, point indicators 1_{t0} and the
// embedding of finite-dimensional margins (f = x_i at t_i, 0 elsewhere).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maxstable/error.hpp"

namespace maxstable {

class Grid
{
  public:
    static constexpr std::size_t default_size = 101;

    explicit Grid(std::vector<double> points) : points_(std::move(points))
    {
        detail::require(points_.size() >= 2, "grid needs at least two points");
        detail::require(points_.front() == 0.0 && points_.back() == 1.0, "grid must start at 0 and end at 1");
        for (std::size_t i = 1; i < points_.size(); ++i) {
            detail::require(points_[i - 1] < points_[i], "grid points must be strictly increasing");
        }
    }

    /// t_i = i / (n - 1). Decimal locations such as 0.25 or 0.3 are hit exactly when n - 1 = 100.
    static std::shared_ptr<const Grid> uniform(std::size_t n = default_size)
    {
        detail::require(n >= 2, "grid needs at least two points");
        std::vector<double> pts(n);
        for (std::size_t i = 0; i < n; ++i) {
            pts[i] = static_cast<double>(i) / static_cast<double>(n - 1);
        }
        pts.back() = 1.0;
        return std::make_shared<const Grid>(std::move(pts));
    }

    std::size_t size() const noexcept { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    std::span<const double> points() const noexcept { return points_; }

    /// Exact membership; no snapping to nearby points.
    std::optional<std::size_t> index_of(double t) const
    {
        const auto it = std::lower_bound(points_.begin(), points_.end(), t);
        if (it == points_.end() || *it != t) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - points_.begin());
    }

    std::size_t require_index(double t, const std::string& what = "off-grid point") const
    {
        auto idx = index_of(t);
        detail::require(idx.has_value(), what);
        return *idx;
    }

    bool operator==(const Grid& other) const { return points_ == other.points_; }

  private:
    std::vector<double> points_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline bool same_grid(const GridPtr& a, const GridPtr& b)
{
    return a == b || (a && b && *a == *b);
}

inline void require_same_grid(const GridPtr& a, const GridPtr& b)
{
    detail::require(same_grid(a, b), "grid mismatch");
}

enum class SignClass { unrestricted, nonpositive };

class EFunction
{
  public:
    EFunction(GridPtr grid, std::vector<double> base, std::map<std::size_t, double> overrides = {},
              SignClass sign = SignClass::unrestricted)
        : grid_(std::move(grid)), base_(std::move(base)), overrides_(std::move(overrides)), sign_(sign)
    {
        detail::require(grid_ != nullptr, "function needs a grid");
        detail::require(base_.size() == grid_->size(), "base length must match the grid");
        for (double v : base_) {
            detail::require(std::isfinite(v), "function values must be finite");
        }
        for (const auto& [i, v] : overrides_) {
            detail::require(i < grid_->size(), "override index outside the grid");
            detail::require(std::isfinite(v), "function values must be finite");
        }
        effective_ = base_;
        for (const auto& [i, v] : overrides_) {
            effective_[i] = v;
        }
        if (sign_ == SignClass::nonpositive) {
            for (double v : effective_) {
                detail::require(v <= 0.0, "nonpositive function has a positive value");
            }
        }
    }

    static EFunction constant(GridPtr grid, double value)
    {
        const std::size_t n = grid->size();
        return EFunction(std::move(grid), std::vector<double>(n, value), {}, value <= 0.0 ? SignClass::nonpositive : SignClass::unrestricted);
    }

    static EFunction from_fn(GridPtr grid, const std::function<double(double)>& fn)
    {
        std::vector<double> base(grid->size());
        bool nonpositive = true;
        for (std::size_t i = 0; i < base.size(); ++i) {
            base[i] = fn((*grid)[i]);
            nonpositive = nonpositive && base[i] <= 0.0;
        }
        return EFunction(std::move(grid), std::move(base), {}, nonpositive ? SignClass::nonpositive : SignClass::unrestricted);
    }

    /// f(t_i) = x_i < 0 at the given locations, f = 0 elsewhere.
    static EFunction embed_fidis(GridPtr grid, std::span<const std::pair<double, double>> points)
    {
        std::map<std::size_t, double> overrides;
        for (const auto& [t, x] : points) {
            const auto idx = grid->index_of(t);
            detail::require(idx.has_value(), "off-grid fidis point");
            detail::require(x < 0.0, "fidis values must be negative");
            detail::require(overrides.emplace(*idx, x).second, "fidis locations must be distinct");
        }
        const std::size_t n = grid->size();
        return EFunction(std::move(grid), std::vector<double>(n, 0.0), std::move(overrides), SignClass::nonpositive);
    }

    static EFunction embed_fidis(GridPtr grid, std::initializer_list<std::pair<double, double>> points)
    {
        std::vector<std::pair<double, double>> v(points);
        return embed_fidis(std::move(grid), std::span<const std::pair<double, double>>(v));
    }

    const GridPtr& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return effective_.size(); }
    std::span<const double> values() const noexcept { return effective_; }
    std::span<const double> base() const noexcept { return base_; }
    const std::map<std::size_t, double>& overrides() const noexcept { return overrides_; }
    SignClass sign_class() const noexcept { return sign_; }

    double operator[](std::size_t i) const { return effective_[i]; }

    double sup_norm() const
    {
        double s = 0.0;
        for (double v : effective_) {
            s = std::max(s, std::abs(v));
        }
        return s;
    }

    bool is_zero() const
    {
        return std::all_of(effective_.begin(), effective_.end(), [](double v) { return v == 0.0; });
    }

    EFunction scaled(double c) const
    {
        std::vector<double> base(base_);
        for (double& v : base) {
            v *= c;
        }
        std::map<std::size_t, double> ov;
        for (const auto& [i, v] : overrides_) {
            ov.emplace(i, v * c);
        }
        const SignClass sign = (sign_ == SignClass::nonpositive && c >= 0.0) ? SignClass::nonpositive : SignClass::unrestricted;
        return EFunction(grid_, std::move(base), std::move(ov), sign);
    }

    /// Same function with the value at index i redefined (f + e*1_{t_i} style edits).
    EFunction with_override(std::size_t i, double value) const
    {
        detail::require(i < size(), "override index outside the grid");
        auto ov = overrides_;
        ov[i] = value;
        SignClass sign = sign_;
        if (sign == SignClass::nonpositive && value > 0.0) {
            sign = SignClass::unrestricted;
        }
        return EFunction(grid_, base_, std::move(ov), sign);
    }

  private:
    GridPtr grid_;
    std::vector<double> base_;
    std::map<std::size_t, double> overrides_;
    SignClass sign_;
    std::vector<double> effective_;
};

/// Anything carrying a grid and values on it (generator samples, process paths).
template <class P>
concept GridPath = requires(const P& p) {
    { p.grid() } -> std::convertible_to<const GridPtr&>;
    { p.values() } -> std::convertible_to<std::span<const double>>;
};

/// max_i |f(t_i)| z(t_i): the grid version of sup_t |f(t)| Z_t.
template <GridPath P>
double sup_weighted(const EFunction& f, const P& z)
{
    require_same_grid(f.grid(), z.grid());
    const auto fv = f.values();
    const std::span<const double> zv = z.values();
    double s = 0.0;
    for (std::size_t i = 0; i < fv.size(); ++i) {
        s = std::max(s, std::abs(fv[i]) * zv[i]);
    }
    return s;
}

/// As sup_weighted, skipping index t0.
template <GridPath P>
double sup_weighted_excluding(const EFunction& f, const P& z, std::size_t t0)
{
    require_same_grid(f.grid(), z.grid());
    detail::require(t0 < f.size(), "invalid t0 index");
    const auto fv = f.values();
    const std::span<const double> zv = z.values();
    double s = 0.0;
    for (std::size_t i = 0; i < fv.size(); ++i) {
        if (i != t0) {
            s = std::max(s, std::abs(fv[i]) * zv[i]);
        }
    }
    return s;
}

}  // namespace maxstable
