#pragma once

// Built-in example suite behind `maxstable selftest`. Every check compares an
// observed value with a known one; Monte Carlo checks use streams derived from
// the given seed, so the report is byte-identical for any thread count.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "maxstable/calculus.hpp"
#include "maxstable/dnorm.hpp"
#include "maxstable/doa.hpp"
#include "maxstable/function_space.hpp"
#include "maxstable/generators.hpp"
#include "maxstable/io.hpp"
#include "maxstable/neighborhoods.hpp"
#include "maxstable/sampler.hpp"

namespace maxstable {

struct SelftestResult
{
    CsvTable table{{"check", "expected", "observed", "tolerance", "status"}};
    std::size_t passed = 0;
    std::size_t failed = 0;
};

inline SelftestResult run_selftest(std::uint64_t seed)
{
    SelftestResult out;
    auto check = [&](const std::string& name, double expected, double observed, double tolerance) {
        const bool ok = std::abs(observed - expected) <= tolerance;
        out.table.row(name, expected, observed, tolerance, ok ? "pass" : "FAIL");
        (ok ? out.passed : out.failed) += 1;
    };
    auto guarded = [&](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            out.table.row(name, std::string("-"), std::string(e.what()), std::string("-"), "FAIL");
            out.failed += 1;
        }
    };

    const auto grid = Grid::uniform();
    const GeneratorSpec constant = gen::Constant{};
    const GeneratorSpec linear = gen::FiniteSpectral::linear();
    const GeneratorSpec simplex = gen::DiscreteSimplex::evenly(2);
    const GeneratorSpec logistic = gen::LogisticFidis{2.0, {0.0, 1.0}};
    const GeneratorSpec cosine_half = gen::RandomCosine{0.5};
    const GeneratorSpec cosine_one = gen::RandomCosine{1.0};
    const auto f_one = EFunction::constant(grid, -1.0);
    const auto fidis_pair = EFunction::embed_fidis(grid, {{0.0, -1.0}, {1.0, -1.0}});
    const StreamKey root(seed, "selftest");

    guarded("function_space", [&] {
        const auto f = EFunction::embed_fidis(grid, {{0.25, -1.0}, {0.75, -2.0}});
        check("sup_weighted fidis against 2t", 3.0, sup_weighted(f, GeneratorSample(grid, GeneratorRealizer(linear, grid).atoms()[0])), 1e-15);
        check("sup_weighted_excluding at t=1", 1.98,
              sup_weighted_excluding(f_one, GeneratorSample(grid, GeneratorRealizer(linear, grid).atoms()[0]), grid->size() - 1), 1e-12);
    });

    guarded("generators", [&] {
        check("bound finite-spectral linear", 2.0, *generator_bound(linear, grid), 0.0);
        check("bound random-cosine 0.5", 1.5, *generator_bound(cosine_half, grid), 0.0);
        const auto z = GeneratorRealizer(cosine_half, grid).at_phase(0.0);
        check("random-cosine Z_0.5 at zero phase", 0.5, z[50], 1e-12);
        std::vector<double> values(30000);
        const GeneratorRealizer r(cosine_half, grid);
        const auto draws = parallel_map(values.size(), [&](std::size_t i) {
            auto s = root.child(1).stream(i);
            return r.sample(s)[30];
        });
        const auto m = summarize(draws);
        check("mean of Z_0.3 (3 se)", 1.0, m.mean, 3.0 * m.std_error);
    });

    guarded("dnorm", [&] {
        check("exact constant", 0.7, dnorm_exact(constant, EFunction::constant(grid, -0.7)).value, 1e-15);
        check("exact finite-spectral", 2.0, dnorm_exact(linear, f_one).value, 1e-15);
        check("exact discrete-simplex", 2.0, dnorm_exact(simplex, fidis_pair).value, 1e-15);
        check("exact logistic", std::sqrt(2.0), dnorm_exact(logistic, fidis_pair).value, 1e-15);
        const auto mc_fs = dnorm_mc(linear, f_one, 100000, root.child(2));
        check("mc finite-spectral (3 se)", 2.0, mc_fs.value, 3.0 * mc_fs.std_error);
        const auto mc_lg = dnorm_mc(logistic, fidis_pair, 100000, root.child(3));
        check("mc logistic (3 se)", std::sqrt(2.0), mc_lg.value, 3.0 * mc_lg.std_error);
        const StreamKey unused(seed, "variation");
        check("variation constant plus", 0.0, variation(constant, f_one, 50, Side::plus, 2, unused).value, 0.0);
        check("variation simplex plus", -1.0, variation(simplex, fidis_pair, 0, Side::plus, 2, unused).value, 0.0);
        check("variation finite-spectral plus at t=1", -1.0, variation(linear, f_one, 100, Side::plus, 2, unused).value, 0.0);
    });

    guarded("sampler", [&] {
        const auto smsp = simulate(constant, grid, 100000, root.child(4));
        const auto p = fdf_empirical(smsp, f_one);
        check("smsp constant P(eta <= -1) (3 se)", std::exp(-1.0), p.value, 3.0 * p.std_error);
        const auto cos_paths = simulate(cosine_half, grid, 20000, root.child(5));
        const auto pc = fdf_empirical(cos_paths, EFunction::constant(grid, 0.0).with_override(50, -1.0));
        check("smsp random-cosine margin at 0.5 (3 se)", std::exp(-1.0), pc.value, 3.0 * pc.std_error);
        SimulationOptions sg;
        sg.kind = SimulationKind::sgpp;
        const auto v = simulate(linear, grid, 100000, root.child(6), sg);
        const auto pv = fdf_empirical(v, EFunction::constant(grid, -0.2));
        check("sgpp P(V <= -0.2) = 1 - 0.4 (3 se)", 0.6, pv.value, 3.0 * pv.std_error);
    });

    guarded("doa", [&] {
        const auto u = ProcessPath(grid, std::vector<double>(grid->size(), -0.3), PathKind::sgpp, -1.0);
        check("copula from V = -0.3", 0.7, copula_from_sgpp(u)[0], 1e-15);
        const ProcessPath half(grid, std::vector<double>(grid->size(), 0.5), PathKind::copula);
        check("exp-gumbel margin at 0.5", std::log(2.0), apply_margins(half, margins::ExpGumbel{})[0], 1e-15);
        check("condition3 exp-gumbel f=0.5 n=100", 0.0, condition3_discrepancy(margins::ExpGumbel{}, EFunction::constant(grid, 0.5), 100), 0.0);
        check("condition3 uniform f=-0.5 n=10", 0.0, condition3_discrepancy(margins::UniformNegExp{}, EFunction::constant(grid, -0.5), 10), 0.0);
        check("condition3 exp-gumbel f=-5 n=2", std::exp(5.0) - 2.0,
              condition3_discrepancy(margins::ExpGumbel{}, EFunction::constant(grid, -5.0), 2), 1e-12);
        const auto rep = doa_experiment(constant, margins::ExpGumbel{}, EFunction::constant(grid, 1.0), 100, 2000, root.child(7));
        check("doa copula side (3 se)", std::exp(-std::exp(-1.0)), rep.copula_side.value, 3.0 * rep.copula_side.std_error);
        check("doa margins side (3 se)", std::exp(-std::exp(-1.0)), rep.margins_side.value, 3.0 * rep.margins_side.std_error);
    });

    guarded("neighborhoods", [&] {
        check("spectral_df constant", 0.9895, spectral_df(constant, {0.5, 0.5, 0.5}, f_one, -0.01), 1e-12);
        check("spectral_df finite-spectral kappa 0", 0.8, spectral_df(linear, {0.5, 0.0, 0.5}, f_one, -0.1), 1e-12);
        check("von mises remainder", 0.05 / 1.1, von_mises_remainder(constant, {0.5, 0.5, 0.5}, f_one, -0.04), 1e-12);
        const std::vector<double> ns = doubling_ns();
        std::vector<double> power;
        for (double n : ns) power.push_back(std::pow(n, -0.5));
        check("fit_delta on exact power law", 0.5, fit_delta(ns, power).delta_hat, 1e-12);
        const auto family = default_test_family(grid);
        const auto ladder = default_ladder();
        for (double d : {0.25, 0.5, 1.0}) {
            const auto rep = rate_curve(linear, {d, 0.5, 0.5}, family, ns, ladder);
            check("rate delta " + format_double(d), d, rep.delta_hat, 0.05);
        }
        check("rate kappa 0", 1.0, rate_curve(linear, {0.5, 0.0, 0.5}, family, ns, ladder).delta_hat, 0.05);
    });

    guarded("calculus", [&] {
        const auto off = [&](double v) { return EFunction::constant(grid, v).with_override(0, 0.0); };
        check("conditional constant inside", 1.0, conditional_fdf(constant, off(-0.5), 0, -1.0), 1e-12);
        check("conditional constant outside", 0.0, conditional_fdf(constant, off(-2.0), 0, -1.0), 1e-12);
        check("conditional simplex independence", std::exp(-0.7),
              conditional_fdf(simplex, EFunction::embed_fidis(grid, {{1.0, -0.7}}), 0, -0.4), 1e-12);
        check("increment constant x=-0.3", 0.0, increment_df(constant, grid, 0, 50, -0.3), 1e-8);
        check("increment constant x=0.3", 1.0, increment_df(constant, grid, 0, 50, 0.3), 2e-8);
        check("derivative constant x=-0.1", 0.0, derivative_df(constant, grid, 25, -0.1), 1e-8);
        check("derivative constant x=0.1", 1.0, derivative_df(constant, grid, 25, 0.1), 2e-8);
        check("zeta random-cosine a=1 x=0", 0.5, zeta_df(cosine_one, grid, 0, 0.0), 1e-10);
        check("zeta random-cosine large x", 1.0, zeta_df(cosine_half, grid, 0, 1e6), 1e-10);
        const auto means = derivative_mean(cosine_half, grid, 25);
        check("mean of Z'", 0.0, means.z_prime_mean, 1e-12);
        check("mean of zeta df", 0.0, means.zeta_mean, 1e-5);
        check("mean of H", 0.0, means.h_mean, 1e-5);
    });

    out.table.comment("passed", std::to_string(out.passed));
    out.table.comment("failed", std::to_string(out.failed));
    return out;
}

}  // namespace maxstable
