#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "maxstable/dnorm.hpp"
#include "maxstable/error.hpp"
#include "maxstable/neighborhoods.hpp"
#include "oracles.hpp"

using namespace maxstable;

namespace {

const GridPtr grid = Grid::uniform();
const auto f_one = EFunction::constant(grid, -1.0);
const GeneratorSpec linear = gen::FiniteSpectral::linear();

double direct_df(const GeneratorSpec& spec, const PerturbedRadialSpec& r, const EFunction& f, double c)
{
    const auto atoms = GeneratorRealizer(spec, grid).atoms();
    double tail = 0.0;
    for (const auto& z : atoms) {
        double m = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) m = std::max(m, std::abs(f[i]) * z[i]);
        const double s = std::abs(c) * m;
        tail += s + r.kappa * std::pow(s, 1.0 + r.delta);
    }
    return 1.0 - tail / static_cast<double>(atoms.size());
}

}  // namespace

TEST(SpectralDf, WorkedValues)
{
    EXPECT_NEAR(spectral_df(gen::Constant{}, {0.5, 0.5, 0.5}, f_one, -0.01), 0.9895, 1e-12);
    EXPECT_NEAR(spectral_df(linear, {0.5, 0.0, 0.5}, f_one, -0.1), 0.8, 1e-12);
}

TEST(SpectralDf, MatchesDirectSum)
{
    const PerturbedRadialSpec r{0.3, 0.7, 0.5};
    for (const auto& f : default_test_family(grid)) {
        const auto u = f.scaled(1.0 / f.sup_norm());
        for (double c : {-0.01, -0.1, -0.25}) {
            EXPECT_NEAR(spectral_df(linear, r, u, c), direct_df(linear, r, u, c), 1e-14);
        }
    }
}

TEST(SpectralDf, MatchesPerturbedSgppSimulation)
{
    const PerturbedRadialSpec r{0.5, 0.5, 0.5};
    SimulationOptions o;
    o.kind = SimulationKind::perturbed_sgpp;
    o.radial = r;
    const auto e = simulate(linear, grid, 100000, StreamKey(1, "pert"), o);
    const auto f = EFunction::from_fn(grid, [](double t) { return -(0.5 + 0.5 * t); });
    const double c = -0.2;
    const auto p = fdf_empirical(e, f.scaled(-c));
    EXPECT_NEAR(p.value, spectral_df(linear, r, f, c), 3.0 * p.std_error);
}

TEST(SpectralDf, Validation)
{
    const PerturbedRadialSpec r{0.5, 0.5, 0.5};
    EXPECT_THROW(spectral_df(linear, r, f_one, 0.0), ValidationError);
    EXPECT_THROW(spectral_df(linear, r, f_one, 0.1), ValidationError);
    EXPECT_THROW(spectral_df(linear, r, EFunction::constant(grid, -0.5), -0.1), ValidationError);
    EXPECT_THROW(spectral_df(linear, r, f_one, -0.3), ValidationError);
    EXPECT_THROW(spectral_df(gen::RandomCosine{0.5}, r, f_one, -0.1), ValidationError);
    EXPECT_THROW(spectral_df(linear, {0.0, 0.5, 0.5}, f_one, -0.1), ValidationError);
}

TEST(Ladder, Geometric)
{
    const auto l = default_ladder();
    ASSERT_EQ(l.size(), 20u);
    EXPECT_DOUBLE_EQ(l.front(), 0.05);
    EXPECT_EQ(l.back(), 4.0);
    for (std::size_t i = 2; i < l.size(); ++i) {
        EXPECT_NEAR(l[i] / l[i - 1], l[1] / l[0], 1e-12);
    }
    EXPECT_THROW(default_ladder(1), ValidationError);
    EXPECT_THROW(default_ladder(5, 2.0, 1.0), ValidationError);
    EXPECT_EQ(doubling_ns().size(), 11u);
    EXPECT_EQ(doubling_ns().front(), 16.0);
    EXPECT_EQ(doubling_ns().back(), 16384.0);
}

TEST(TestFamily, UnitSphereAfterScaling)
{
    const auto fam = default_test_family(grid);
    EXPECT_EQ(fam.size(), 8u);
    for (const auto& f : fam) {
        EXPECT_EQ(f.sup_norm(), 1.0);
        for (double v : f.values()) EXPECT_LE(v, 0.0);
    }
}

TEST(SupDiff, UnperturbedMatchesScalarOracle)
{
    const auto fam = default_test_family(grid);
    const auto ladder = default_ladder();
    std::vector<double> norms;
    for (const auto& f : fam) norms.push_back(dnorm_exact(linear, f).value);
    for (double n : {16.0, 64.0, 1024.0}) {
        EXPECT_NEAR(sup_diff(linear, {0.5, 0.0, 0.5}, fam, n, ladder), oracle::scalar_rate(norms, ladder, n), 1e-12);
    }
}

TEST(SupDiff, DecreasesInN)
{
    const auto fam = default_test_family(grid);
    double prev = 1.0;
    for (double n : doubling_ns()) {
        const double d = sup_diff(linear, {0.5, 0.5, 0.5}, fam, n);
        EXPECT_LT(d, prev);
        prev = d;
    }
}

TEST(SupDiff, Validation)
{
    const auto fam = default_test_family(grid);
    const std::vector<EFunction> none;
    const std::vector<double> empty;
    EXPECT_THROW(sup_diff(linear, {0.5, 0.5, 0.5}, none, 16), ValidationError);
    EXPECT_THROW(sup_diff(linear, {0.5, 0.5, 0.5}, fam, 16, empty), ValidationError);
    EXPECT_THROW(sup_diff(linear, {0.5, 0.5, 0.5}, fam, 0.5), ValidationError);
    EXPECT_THROW(sup_diff(linear, {0.5, 0.5, 0.5}, fam, 2), ValidationError);
    const std::vector<EFunction> zero{EFunction::constant(grid, 0.0)};
    EXPECT_THROW(sup_diff(linear, {0.5, 0.5, 0.5}, zero, 16), ValidationError);
}

TEST(FitDelta, ExactPowerLaw)
{
    const auto ns = doubling_ns();
    std::vector<double> y;
    for (double n : ns) y.push_back(3.0 * std::pow(n, -0.7));
    const auto r = fit_delta(ns, y, 8);
    EXPECT_NEAR(r.delta_hat, 0.7, 1e-12);
    EXPECT_NEAR(r.fit_r2, 1.0, 1e-12);
    EXPECT_EQ(r.family_size, 8u);
}

TEST(FitDelta, Validation)
{
    const std::vector<double> ns{16, 32, 64, 128};
    EXPECT_THROW(fit_delta(ns, std::vector<double>{1, 2, 3}), ValidationError);
    EXPECT_THROW(fit_delta(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), ValidationError);
    EXPECT_THROW(fit_delta(ns, std::vector<double>{1, 0, 1, 1}), ValidationError);
    EXPECT_THROW(fit_delta(std::vector<double>{4, 4, 4, 4}, std::vector<double>{1, 2, 3, 4}), ValidationError);
}

TEST(RateCurve, RecoversDelta)
{
    const auto fam = default_test_family(grid);
    const auto ns = doubling_ns();
    const auto ladder = default_ladder();
    for (double d : {0.25, 0.5, 1.0}) {
        const auto r = rate_curve(linear, {d, 0.5, 0.5}, fam, ns, ladder);
        EXPECT_NEAR(r.delta_hat, d, 0.05);
        EXPECT_GE(r.fit_r2, 0.99);
        EXPECT_EQ(r.sup_diffs.size(), ns.size());
    }
    EXPECT_NEAR(rate_curve(linear, {0.5, 0.0, 0.5}, fam, ns, ladder).delta_hat, 1.0, 0.05);
}

TEST(RateCurve, ConsecutiveRatiosApproachPowerOfTwo)
{
    const auto fam = default_test_family(grid);
    const auto r = rate_curve(linear, {0.5, 0.25, 0.5}, fam, doubling_ns(), default_ladder());
    for (std::size_t i = 2; i < r.ns.size(); ++i) {
        EXPECT_NEAR(r.sup_diffs[i] / r.sup_diffs[i - 1], std::pow(2.0, -0.5), 0.1 * std::pow(2.0, -0.5)) << r.ns[i];
    }
}

TEST(VonMises, RemainderClosedForm)
{
    EXPECT_NEAR(von_mises_remainder(gen::Constant{}, {0.5, 0.5, 0.5}, f_one, -0.04), 0.05 / 1.1, 1e-12);
    EXPECT_THROW(von_mises_remainder(gen::Constant{}, {0.5, 0.5, 0.5}, f_one, 0.0), ValidationError);
}

TEST(VonMises, IntegralMatchesLogarithm)
{
    const PerturbedRadialSpec r{0.5, 0.5, 0.5};
    for (const auto& f : default_test_family(grid)) {
        const auto atoms = GeneratorRealizer(linear, grid).atoms();
        double norm = 0.0, moment = 0.0;
        for (const auto& z : atoms) {
            double m = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) m = std::max(m, std::abs(f[i]) * z[i]);
            norm += m / atoms.size();
            moment += std::pow(m, 1.0 + r.delta) / atoms.size();
        }
        for (double c : {-0.25, -0.01, -1e-4}) {
            EXPECT_NEAR(von_mises_integral(linear, r, f, c).value, oracle::von_mises_integral(r.kappa, r.delta, c, moment, norm), 1e-9);
        }
    }
}

TEST(VonMises, FamilyMaxShrinksTowardZero)
{
    const auto fam = default_test_family(grid);
    double prev = 1.0;
    for (double c = -0.25; c < -1e-7; c /= 4.0) {
        const double v = von_mises_family_max(linear, {0.5, 0.5, 0.5}, fam, c);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_LT(prev, 1e-3);
}
