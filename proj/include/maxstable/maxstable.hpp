#pragma once

#include "maxstable/error.hpp"
#include "maxstable/rng.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/function_space.hpp"
#include "maxstable/generators.hpp"
#include "maxstable/dnorm.hpp"
#include "maxstable/quadrature.hpp"
#include "maxstable/sampler.hpp"
#include "maxstable/doa.hpp"
#include "maxstable/neighborhoods.hpp"
#include "maxstable/calculus.hpp"
