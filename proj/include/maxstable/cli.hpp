#pragma once

// `maxstable` command-line driver.
//
//   maxstable <command> [--spec file.json] [flags]
//
// Flags override spec-file fields of the same name (dashes become
// underscores). Exit codes: 0 success, 1 selftest failures, 2 invalid input,
// 3 unwritable output, 4 numerical non-convergence.

#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxstable/calculus.hpp"
#include "maxstable/dnorm.hpp"
#include "maxstable/doa.hpp"
#include "maxstable/error.hpp"
#include "maxstable/io.hpp"
#include "maxstable/neighborhoods.hpp"
#include "maxstable/parallel.hpp"
#include "maxstable/sampler.hpp"
#include "maxstable/selftest.hpp"

namespace maxstable::cli {

enum ExitCode : int { ok = 0, selftest_failed = 1, invalid = 2, unwritable = 3, not_converged = 4 };

namespace detail {

struct Outcome
{
    explicit Outcome(CsvTable t) : table(std::move(t)) {}

    CsvTable table;
    std::vector<std::pair<std::string, std::string>> summary;
    nlohmann::json results = nlohmann::json::object();
    int code = ok;
};

inline void note(Outcome& o, const std::string& key, const std::string& value)
{
    o.summary.emplace_back(key, value);
    o.results[key] = value;
}

inline void note(Outcome& o, const std::string& key, double value)
{
    o.summary.emplace_back(key, format_double(value));
    o.results[key] = value;
}

inline std::vector<double> ladder_from(const ExperimentSpec& s)
{
    if (!s.has("ladder")) return default_ladder();
    const auto& v = s.params.at("ladder");
    if (v.is_array()) return v.get<std::vector<double>>();
    const std::string text = v.get<std::string>();
    const auto dots = text.find("..");
    const auto slash = text.find('/');
    if (dots == std::string::npos || slash == std::string::npos) return parse_number_list(text);
    return default_ladder(parse_count(text.substr(slash + 1)), parse_double(text.substr(0, dots)),
                          parse_double(text.substr(dots + 2, slash - dots - 2)));
}

inline PerturbedRadialSpec radial_from(const ExperimentSpec& s)
{
    PerturbedRadialSpec r;
    r.delta = s.number("delta", r.delta);
    r.kappa = s.number("kappa", r.kappa);
    r.s_max = s.number("s_max", r.s_max);
    r.validate();
    return r;
}

inline std::string function_label(const ExperimentSpec& s, const std::string& key, const std::string& fallback)
{
    return s.text(key, fallback);
}

inline Outcome cmd_simulate(const ExperimentSpec& s)
{
    const auto grid = s.grid();
    const auto spec = s.generator_spec();
    SimulationOptions opts;
    const std::string kind = s.text("kind", "smsp");
    if (kind == "smsp") opts.kind = SimulationKind::smsp;
    else if (kind == "sgpp") opts.kind = SimulationKind::sgpp;
    else if (kind == "gpp") opts.kind = SimulationKind::gpp;
    else if (kind == "perturbed-sgpp") opts.kind = SimulationKind::perturbed_sgpp;
    else throw ValidationError("unknown path kind '" + kind + "' (smsp, sgpp, gpp, perturbed-sgpp)");
    opts.floor = s.number("floor", -1.0);
    if (opts.kind == SimulationKind::perturbed_sgpp) opts.radial = radial_from(s);
    const std::size_t count = s.count("paths", 10);
    const std::size_t first = s.count("first", 0);
    const auto ens = simulate(spec, grid, count, s.key(), opts, first);

    Outcome o{CsvTable({"path", "t", "value"})};
    for (std::size_t p = 0; p < ens.size(); ++p) {
        const auto v = ens.paths[p].values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            o.table.row(first + p, (*grid)[i], v[i]);
        }
    }
    note(o, "kind", kind);
    note(o, "paths", static_cast<double>(count));
    note(o, "first_replicate", static_cast<double>(first));
    return o;
}

inline Outcome cmd_dnorm(const ExperimentSpec& s)
{
    const auto grid = s.grid();
    const auto spec = s.generator_spec();
    const auto f = s.function("f", "const:-1", grid);
    const std::string method = s.text("method", "auto");
    const std::size_t reps = s.count("replicates", default_replicates);
    DnormEstimate e;
    if (method == "auto") e = dnorm(spec, f, reps, s.key());
    else if (method == "exact") e = dnorm_exact(spec, f);
    else if (method == "mc") e = dnorm_mc(spec, f, reps, s.key());
    else throw ValidationError("unknown method '" + method + "' (auto, exact, mc)");

    Outcome o{CsvTable({"generator", "f", "value", "method", "std_error", "replicates"})};
    o.table.row(describe(spec), function_label(s, "f", "const:-1"), e.value, to_string(e.method), e.std_error, e.replicates);
    note(o, "value", e.value);
    note(o, "method", to_string(e.method));
    note(o, "std_error", e.std_error);
    return o;
}

inline Outcome cmd_variation(const ExperimentSpec& s)
{
    const auto grid = s.grid();
    const auto spec = s.generator_spec();
    const auto f = s.function("f", "const:-1", grid);
    const std::size_t t0 = s.location("t0", 0.5, grid);
    const std::string side = s.text("side", "both");
    maxstable::detail::require(side == "plus" || side == "minus" || side == "both", "side must be plus, minus or both");
    const std::size_t reps = s.count("replicates", default_replicates);

    Outcome o{CsvTable({"side", "t0", "value", "std_error", "method"})};
    for (const auto& [name, sd] : {std::pair{"plus", Side::plus}, std::pair{"minus", Side::minus}}) {
        if (side != "both" && side != name) continue;
        const auto e = variation(spec, f, t0, sd, reps, s.key());
        o.table.row(std::string(name), (*grid)[t0], e.value, e.std_error, to_string(e.method));
        note(o, std::string(name), e.value);
    }
    return o;
}

inline Outcome cmd_doa(const ExperimentSpec& s)
{
    const auto grid = s.grid();
    const auto spec = s.generator_spec();
    const auto fam = parse_margin(s.margin.value_or("exp-gumbel"));
    const auto f = s.function("f", "const:1", grid);
    const auto ns = s.sample_sizes("n", {100});
    const std::size_t reps = s.count("replicates", 5000);

    Outcome o{CsvTable({"n", "target", "copula", "copula_se", "margins", "margins_se", "condition3"})};
    for (std::size_t i = 0; i < ns.size(); ++i) {
        maxstable::detail::require(ns[i] >= 1.0 && ns[i] == std::floor(ns[i]), "n must be a positive integer");
        const auto r = doa_experiment(spec, fam, f, static_cast<std::size_t>(ns[i]), reps, s.key().child(i));
        o.table.row(r.n, r.target, r.copula_side.value, r.copula_side.std_error, r.margins_side.value, r.margins_side.std_error,
                    r.condition3);
        if (i + 1 == ns.size()) {
            note(o, "target", r.target);
            note(o, "copula", r.copula_side.value);
            note(o, "margins", r.margins_side.value);
        }
    }
    return o;
}

inline Outcome cmd_rate(const ExperimentSpec& s)
{
    const auto grid = s.grid();
    const auto spec = s.generator_spec();
    const auto radial = radial_from(s);
    const auto ns = s.sample_sizes("n", doubling_ns());
    const auto ladder = ladder_from(s);
    std::vector<EFunction> family;
    if (s.has("family")) {
        for (const auto& def : maxstable::detail::split(s.text("family", ""), ';')) {
            family.push_back(s.functions.count(def) ? parse_function(s.functions.at(def), grid) : parse_function(def, grid));
        }
    } else {
        family = default_test_family(grid);
    }
    const auto rep = rate_curve(spec, radial, family, ns, ladder);

    Outcome o{CsvTable({"n", "sup_diff"})};
    for (std::size_t i = 0; i < rep.ns.size(); ++i) {
        o.table.row(rep.ns[i], rep.sup_diffs[i]);
    }
    o.table.comment("delta_hat", format_double(rep.delta_hat));
    o.table.comment("fit_r2", format_double(rep.fit_r2));
    o.table.comment("family_size", std::to_string(rep.family_size));
    note(o, "delta_hat", rep.delta_hat);
    note(o, "fit_r2", rep.fit_r2);
    note(o, "family_size", static_cast<double>(rep.family_size));
    return o;
}

inline QuadratureSpec quad_from(const ExperimentSpec& s)
{
    QuadratureSpec q;
    q.tolerance = s.number("tolerance", q.tolerance);
    q.y_min = s.number("y_min", q.y_min);
    q.max_subdivisions = s.count("max_subdivisions", q.max_subdivisions);
    q.validate();
    return q;
}

inline Outcome cmd_conditional(const ExperimentSpec& s)
{
    const auto grid = s.grid();
    const auto spec = s.generator_spec();
    const auto f = s.function("f", "const:-0.5|0.5=0", grid);
    const std::size_t t0 = s.location("t0", 0.5, grid);
    const auto xs = s.numbers("x", parse_grid_values("-2..-0.1/20"));
    const std::size_t nodes = s.count("nodes", default_rule_nodes);
    const auto values = parallel_map(xs.size(), [&](std::size_t i) { return conditional_fdf(spec, f, t0, xs[i], nodes, s.key()); });

    Outcome o{CsvTable({"x", "value"})};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        o.table.row(xs[i], values[i]);
    }
    note(o, "points", static_cast<double>(xs.size()));
    return o;
}

inline Outcome cmd_increment(const ExperimentSpec& s)
{
    const auto grid = s.grid();
    const auto spec = s.generator_spec();
    const std::size_t si = s.location("s", 0.0, grid);
    const std::size_t ti = s.location("t", 0.5, grid);
    const auto xs = s.numbers("x", parse_grid_values("-1..1/21"));
    const auto quad = quad_from(s);
    const std::size_t nodes = s.count("nodes", default_rule_nodes);
    const auto values = parallel_map(xs.size(), [&](std::size_t i) { return increment_df(spec, grid, si, ti, xs[i], quad, nodes, s.key()); });

    Outcome o{CsvTable({"x", "value"})};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        o.table.row(xs[i], values[i]);
    }
    note(o, "points", static_cast<double>(xs.size()));
    return o;
}

inline Outcome cmd_derivative(const ExperimentSpec& s)
{
    const auto grid = s.grid();
    const auto spec = s.generator_spec();
    const std::size_t t0 = s.location("t0", 0.25, grid);
    const auto xs = s.numbers("x", parse_grid_values("-3..3/25"));
    const auto quad = quad_from(s);
    const auto law = derivative_law(spec, grid, t0, xs, quad);

    Outcome o{CsvTable({"x", "H", "F"})};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        o.table.row(law.xs[i], law.h[i], law.zeta[i]);
    }
    o.table.comment("zeta_mean", format_double(law.mean));
    note(o, "zeta_mean", law.mean);
    return o;
}

inline Outcome cmd_selftest(const ExperimentSpec& s)
{
    auto r = run_selftest(s.seed);
    Outcome o{std::move(r.table)};
    note(o, "passed", static_cast<double>(r.passed));
    note(o, "failed", static_cast<double>(r.failed));
    o.code = r.failed == 0 ? ok : selftest_failed;
    return o;
}

struct Command
{
    const char* name;
    const char* help;
    std::vector<std::pair<const char*, const char*>> options;  // flag, help
    std::function<Outcome(const ExperimentSpec&)> handler;
};

inline const std::vector<Command>& commands()
{
    static const std::vector<Command> table{
        {"simulate", "sample SMSP/SGPP/GPP paths",
         {{"--generator", "generator"}, {"--kind", "smsp|sgpp|gpp|perturbed-sgpp"}, {"--paths", "number of paths"},
          {"--first", "first replicate index"}, {"--floor", "SGPP floor M < 0"}, {"--delta", "radial delta"}, {"--kappa", "radial kappa"},
          {"--s-max", "radial validity range"}},
         cmd_simulate},
        {"dnorm", "D-norm of a function",
         {{"--generator", "generator"}, {"--f", "function"}, {"--method", "auto|exact|mc"}, {"--replicates", "Monte Carlo replicates"}},
         cmd_dnorm},
        {"variation", "one-sided first variations",
         {{"--generator", "generator"}, {"--f", "function"}, {"--t0", "direction point"}, {"--side", "plus|minus|both"},
          {"--replicates", "Monte Carlo replicates"}},
         cmd_variation},
        {"doa", "domain-of-attraction experiment",
         {{"--generator", "generator"}, {"--margin", "exp-gumbel|uniform-negexp"}, {"--f", "function"}, {"--n", "block size(s)"},
          {"--replicates", "replicates"}},
         cmd_doa},
        {"rate", "rate of convergence in a spectral delta-neighborhood",
         {{"--generator", "generator"}, {"--delta", "delta"}, {"--kappa", "kappa"}, {"--s-max", "radial validity range"},
          {"--n", "sample sizes, e.g. 16..16384"}, {"--ladder", "magnitudes lo..hi/count (geometric)"}, {"--family", "functions separated by ;"}},
         cmd_rate},
        {"conditional", "conditional df given eta_t0 = x",
         {{"--generator", "generator"}, {"--f", "function with f(t0) = 0"}, {"--t0", "conditioning point"}, {"--x", "x values"},
          {"--nodes", "expectation rule size"}},
         cmd_conditional},
        {"increment", "df of eta_s - eta_t",
         {{"--generator", "generator"}, {"--s", "point s"}, {"--t", "point t"}, {"--x", "x values"}, {"--tolerance", "quadrature tolerance"},
          {"--y-min", "lower cut of the y integral"}, {"--max-subdivisions", "quadrature panel budget"}, {"--nodes", "expectation rule size"}},
         cmd_increment},
        {"derivative", "df of the distributional derivative and of zeta",
         {{"--generator", "generator"}, {"--t0", "point"}, {"--x", "x values"}, {"--tolerance", "quadrature tolerance"},
          {"--y-min", "lower cut of the y integral"}, {"--max-subdivisions", "quadrature panel budget"}},
         cmd_derivative},
        {"selftest", "run the built-in example suite", {}, cmd_selftest},
    };
    return table;
}

inline std::string key_of(std::string flag)
{
    flag.erase(0, flag.find_first_not_of('-'));
    for (char& c : flag) {
        if (c == '-') c = '_';
    }
    return flag;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"maxstable: max-stable processes, D-norms and their distributional calculus"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "help for all commands");

    struct Bound
    {
        CLI::App* sub;
        const detail::Command* command;
        std::map<std::string, std::string> values;
        std::map<std::string, CLI::Option*> options;
    };
    std::vector<Bound> bound;
    bound.reserve(detail::commands().size());
    std::string spec_path;
    unsigned threads = 0;
    for (const auto& c : detail::commands()) {
        bound.push_back({app.add_subcommand(c.name, c.help), &c, {}, {}});
        auto& b = bound.back();
        b.sub->add_option("--spec", spec_path, "JSON experiment spec; flags override its fields");
        b.sub->add_option("--threads", threads, "worker threads (results do not depend on it)");
        std::vector<std::pair<const char*, const char*>> opts = c.options;
        opts.emplace_back("--seed", "64-bit seed");
        opts.emplace_back("--out", "CSV output path (a .manifest.json is written next to it)");
        opts.emplace_back("--grid-size", "number of grid points");
        for (const auto& [flag, help] : opts) {
            const std::string key = detail::key_of(flag);
            b.options[key] = b.sub->add_option(flag, b.values[key], help)->allow_extra_args(false);
        }
    }

    if (args.size() > 1 && !args[1].empty() && args[1][0] != '-') {
        bool known = false;
        for (const auto& c : detail::commands()) known = known || args[1] == c.name;
        if (!known) {
            err << "error: unknown command '" << args[1] << "'\n";
            return invalid;
        }
    }

    try {
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return invalid;
    }

    const Bound* chosen = nullptr;
    for (const auto& b : bound) {
        if (b.sub->parsed()) chosen = &b;
    }
    if (chosen == nullptr) {
        err << "error: a command is required\n";
        return invalid;
    }

    try {
        nlohmann::json merged = nlohmann::json::object();
        if (!spec_path.empty()) {
            const auto file = ExperimentSpec::load(spec_path);
            maxstable::detail::require(file.command.empty() || file.command == chosen->command->name,
                                       "spec file is for command '" + file.command + "'");
            merged = file.to_json();
            if (!file.out.empty()) merged["out"] = file.out;
        }
        for (const auto& [key, opt] : chosen->options) {
            if (opt->count() > 0) merged[key] = chosen->values.at(key);
        }
        merged["command"] = chosen->command->name;
        const auto spec = ExperimentSpec::from_json(merged);

        std::optional<ThreadScope> scope;
        if (threads > 0) scope.emplace(threads);

        auto outcome = chosen->command->handler(spec);
        stamp(outcome.table, spec);
        for (const auto& [k, v] : outcome.summary) {
            out << k << ": " << v << '\n';
        }
        if (!spec.out.empty()) {
            outcome.table.save(spec.out);
            CsvTable::write_text_file(spec.out + ".manifest.json", manifest(spec, outcome.results).dump(2) + "\n");
            out << "wrote: " << spec.out << '\n';
        }
        return outcome.code;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return invalid;
    } catch (const nlohmann::json::exception& e) {
        err << "error: invalid spec field: " << e.what() << '\n';
        return invalid;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return unwritable;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return not_converged;
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace maxstable::cli
