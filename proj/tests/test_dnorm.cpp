#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "maxstable/dnorm.hpp"
#include "maxstable/error.hpp"
#include "oracles.hpp"

using namespace maxstable;

namespace {

const GridPtr grid = Grid::uniform();
const auto f_one = EFunction::constant(grid, -1.0);
const auto fidis_pair = EFunction::embed_fidis(grid, {{0.0, -1.0}, {1.0, -1.0}});

std::vector<std::vector<double>> atoms_of(const GeneratorSpec& spec, const GridPtr& g)
{
    return GeneratorRealizer(spec, g).atoms();
}

}  // namespace

TEST(DnormExact, WorkedValues)
{
    EXPECT_EQ(dnorm_exact(gen::Constant{}, EFunction::constant(grid, -0.7)).value, 0.7);
    EXPECT_EQ(dnorm_exact(gen::FiniteSpectral::linear(), f_one).value, 2.0);
    EXPECT_EQ(dnorm_exact(gen::DiscreteSimplex::evenly(2), fidis_pair).value, 2.0);
    EXPECT_DOUBLE_EQ(dnorm_exact(gen::LogisticFidis{2.0, {0.0, 1.0}}, fidis_pair).value, std::sqrt(2.0));
    EXPECT_EQ(dnorm_exact(gen::Constant{}, f_one).method, Method::exact);
}

TEST(DnormExact, LogisticLambdaOneIsL1AndLargeLambdaApproachesSup)
{
    const auto f = EFunction::embed_fidis(grid, {{0.0, -1.0}, {1.0, -3.0}});
    EXPECT_DOUBLE_EQ(dnorm_exact(gen::LogisticFidis{1.0, {0.0, 1.0}}, f).value, 4.0);
    EXPECT_NEAR(dnorm_exact(gen::LogisticFidis{200.0, {0.0, 1.0}}, f).value, 3.0, 1e-2);
}

TEST(DnormExact, MatchesAtomOracleOnRandomFunctions)
{
    auto s = StreamKey(1, "oracle").stream(0);
    for (const auto& spec : {GeneratorSpec(gen::FiniteSpectral::linear()), GeneratorSpec(gen::DiscreteSimplex::evenly(5))}) {
        const auto atoms = atoms_of(spec, grid);
        for (int i = 0; i < 50; ++i) {
            const auto f = EFunction::from_fn(grid, [&](double) { return 4.0 * s.uniform() - 2.0; });
            EXPECT_NEAR(dnorm_exact(spec, f).value, oracle::atom_norm(atoms, f.values()), 1e-13);
        }
    }
}

TEST(DnormExact, ErrorPaths)
{
    EXPECT_THROW(dnorm_exact(gen::RandomCosine{0.5}, f_one), ValidationError);
    EXPECT_THROW(dnorm_exact(gen::LogisticFidis{2.0, {0.0, 1.0}}, f_one), ValidationError);
    EXPECT_THROW(dnorm_mc(gen::Constant{}, f_one, 1, StreamKey(0, "x")), ValidationError);
    EXPECT_THROW(dnorm_mc(gen::LogisticFidis{1.0, {0.0}}, fidis_pair, 100, StreamKey(0, "x")), ValidationError);
}

TEST(DnormExact, ZeroFunctionHasZeroNorm)
{
    EXPECT_EQ(dnorm_exact(gen::FiniteSpectral::linear(), EFunction::constant(grid, 0.0)).value, 0.0);
}

TEST(Dnorm, FallsBackToMonteCarlo)
{
    const auto e = dnorm(gen::RandomCosine{0.5}, f_one, 20000, StreamKey(2, "fallback"));
    EXPECT_EQ(e.method, Method::monte_carlo);
    EXPECT_EQ(e.replicates, 20000u);
    const double exact = oracle::cosine_norm(0.5, grid->points(), f_one.values(), 4096);
    EXPECT_NEAR(e.value, exact, 4.0 * e.std_error);
    EXPECT_EQ(dnorm(gen::Constant{}, f_one, 20000, StreamKey(2, "fallback")).method, Method::exact);
}

TEST(DnormMc, ReproducibleAcrossThreadCounts)
{
    double first = 0.0;
    for (unsigned threads : {1u, 3u}) {
        ThreadScope scope(threads);
        const double v = dnorm_mc(gen::RandomCosine{0.9}, f_one, 5000, StreamKey(9, "t")).value;
        if (threads == 1) first = v;
        EXPECT_EQ(v, first);
    }
}

// Norm axioms on dyadic inputs, where the arithmetic is exact.
TEST(DnormProperties, TriangleHomogeneityAndBoundsExact)
{
    const auto g = fixture::dyadic_grid();
    auto s = StreamKey(3, "axioms").stream(0);
    for (const auto& spec : fixture::dyadic_enumerable()) {
        const double m = *generator_bound(spec, g);
        for (int i = 0; i < 100; ++i) {
            const auto f = fixture::dyadic_function(g, s);
            const auto h = fixture::dyadic_function(g, s);
            std::vector<double> sum(g->size());
            for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = f[k] + h[k];
            const double nf = dnorm_exact(spec, f).value;
            const double nh = dnorm_exact(spec, h).value;
            EXPECT_LE(dnorm_exact(spec, EFunction(g, sum)).value, nf + nh);
            const double c = fixture::dyadic_scalar(s);
            EXPECT_EQ(dnorm_exact(spec, f.scaled(c)).value, std::abs(c) * nf);
            if (std::holds_alternative<gen::Constant>(spec) || std::holds_alternative<gen::FiniteSpectral>(spec)) {
                EXPECT_LE(f.sup_norm(), nf);
            }
            EXPECT_LE(nf, m * f.sup_norm());
        }
    }
}

TEST(DnormProperties, SupBoundOnSupportForSimplex)
{
    // Off the simplex locations Z vanishes, so the lower bound holds for the sup over the support.
    const auto g = fixture::dyadic_grid();
    auto s = StreamKey(4, "simplex").stream(0);
    const gen::DiscreteSimplex spec{{0.0, 0.25, 0.5, 0.75}};
    const auto support = GeneratorRealizer(spec, g).support();
    for (int i = 0; i < 100; ++i) {
        const auto f = fixture::dyadic_function(g, s);
        double sup = 0.0;
        for (auto k : support) sup = std::max(sup, std::abs(f[k]));
        EXPECT_LE(sup, dnorm_exact(spec, f).value);
    }
}

TEST(Variation, WorkedExamples)
{
    const StreamKey key(0, "v");
    EXPECT_EQ(variation(gen::Constant{}, f_one, 50, Side::plus, 2, key).value, 0.0);
    EXPECT_EQ(variation(gen::DiscreteSimplex::evenly(2), fidis_pair, 0, Side::plus, 2, key).value, -1.0);
    EXPECT_EQ(variation(gen::FiniteSpectral::linear(), f_one, 100, Side::plus, 2, key).value, -1.0);
}

TEST(Variation, MinusSideAtTieForConstant)
{
    const StreamKey key(0, "v");
    EXPECT_EQ(variation(gen::Constant{}, f_one, 50, Side::minus, 2, key).value, -1.0);
    EXPECT_EQ(variation(gen::Constant{}, f_one.with_override(50, -2.0), 50, Side::plus, 2, key).value, -1.0);
    EXPECT_EQ(variation(gen::Constant{}, f_one.with_override(50, 2.0), 50, Side::plus, 2, key).value, 1.0);
    EXPECT_EQ(variation(gen::Constant{}, f_one.with_override(50, 1.0), 50, Side::plus, 2, key).value, 1.0);
    EXPECT_EQ(variation(gen::Constant{}, f_one.with_override(50, 1.0), 50, Side::minus, 2, key).value, 0.0);
}

TEST(Variation, RejectsZeroAndBadIndex)
{
    const StreamKey key(0, "v");
    EXPECT_THROW(variation(gen::Constant{}, f_one.with_override(3, 0.0), 3, Side::plus, 2, key), ValidationError);
    EXPECT_THROW(variation(gen::Constant{}, f_one, 101, Side::plus, 2, key), ValidationError);
}

// One-sided difference quotients of the exact norm; dyadic inputs and a dyadic step keep them exact.
TEST(Variation, FiniteDifferenceOracleExactForEnumerable)
{
    const auto g = fixture::dyadic_grid();
    const double eps = std::ldexp(1.0, -20);
    auto s = StreamKey(5, "fd").stream(0);
    const StreamKey key(0, "v");
    for (const auto& spec : fixture::dyadic_enumerable()) {
        for (int i = 0; i < 100; ++i) {
            const auto f = fixture::dyadic_function(g, s);
            const auto t0 = static_cast<std::size_t>(s.bits() % g->size());
            if (f[t0] == 0.0) continue;
            const double n0 = dnorm_exact(spec, f).value;
            const double up = (dnorm_exact(spec, f.with_override(t0, f[t0] + eps)).value - n0) / eps;
            const double down = (n0 - dnorm_exact(spec, f.with_override(t0, f[t0] - eps)).value) / eps;
            EXPECT_EQ(variation(spec, f, t0, Side::plus, 2, key).value, up);
            EXPECT_EQ(variation(spec, f, t0, Side::minus, 2, key).value, down);
        }
    }
}

TEST(Variation, MonteCarloAgreesWithLogisticGradient)
{
    for (double lambda : {1.5, 2.0, 4.0}) {
        const auto f = EFunction::embed_fidis(grid, {{0.0, -1.0}, {1.0, -2.0}});
        const double norm = oracle::logistic_norm(std::vector<double>{-1.0, -2.0}, lambda);
        const double grad = -std::pow(1.0, lambda - 1.0) * std::pow(norm, 1.0 - lambda);
        const auto v = variation(gen::LogisticFidis{lambda, {0.0, 1.0}}, f, 0, Side::plus, 100000, StreamKey(6, "lg"));
        EXPECT_EQ(v.method, Method::monte_carlo);
        EXPECT_NEAR(v.value, grad, 3.0 * v.std_error) << lambda;
    }
}

TEST(Variation, MonteCarloAgreesWithCosineDifferenceQuotient)
{
    const auto f = EFunction::from_fn(grid, [](double t) { return -(0.6 + 0.4 * t); });
    const double a = 0.5;
    const std::size_t t0 = 70;
    const double h = 1e-4;
    auto norm = [&](const EFunction& u) { return oracle::cosine_norm(a, grid->points(), u.values(), 1 << 15); };
    const double fd = (norm(f.with_override(t0, f[t0] + h)) - norm(f.with_override(t0, f[t0] - h))) / (2.0 * h);
    const auto v = variation(gen::RandomCosine{a}, f, t0, Side::plus, 100000, StreamKey(7, "cos"));
    EXPECT_NEAR(v.value, fd, 3.0 * v.std_error);
}

TEST(DnormRule, EqualsExactOnEnumerableAtoms)
{
    const auto rule = expectation_rule(GeneratorRealizer(gen::FiniteSpectral::linear(), grid), 1, StreamKey());
    EXPECT_EQ(dnorm_rule(rule, f_one), 2.0);
}
