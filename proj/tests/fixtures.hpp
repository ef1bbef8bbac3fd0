#pragma once

// Shared test inputs. The dyadic setup keeps every grid point, atom value and
// function value a short binary fraction, so sums, maxima and products in the
// enumerable D-norm are exact and identities can be compared with ==.

#include <cstdint>
#include <vector>

#include "maxstable/function_space.hpp"
#include "maxstable/generators.hpp"
#include "maxstable/rng.hpp"

namespace fixture {

using namespace maxstable;

/// t_i = i / 128.
inline GridPtr dyadic_grid() { return Grid::uniform(129); }

/// Enumerable generators whose atoms are dyadic on dyadic_grid().
inline std::vector<GeneratorSpec> dyadic_enumerable()
{
    return {gen::Constant{}, gen::FiniteSpectral::linear(), gen::DiscreteSimplex{{0.0, 0.25, 0.5, 0.75}},
            gen::DiscreteSimplex{{0.5, 1.0}}};
}

/// Random function with values k / 64, |k| <= 256, some of them zero.
inline EFunction dyadic_function(const GridPtr& grid, Stream& s)
{
    std::vector<double> v(grid->size());
    const bool sparse = s.uniform() < 0.3;
    for (double& x : v) {
        const auto k = static_cast<int>(s.bits() % 513) - 256;
        x = (sparse && s.uniform() < 0.8) ? 0.0 : static_cast<double>(k) / 64.0;
    }
    return EFunction(grid, std::move(v));
}

/// Random nonzero scalar k / 16, |k| <= 64.
inline double dyadic_scalar(Stream& s)
{
    const auto k = static_cast<int>(s.bits() % 128) - 64;
    return static_cast<double>(k >= 0 ? k + 1 : k) / 16.0;
}

}  // namespace fixture
