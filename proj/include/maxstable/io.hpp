#pragma once

// Experiment specs, text parsers for generators/functions/ranges, and CSV
// output with provenance headers. Numbers are formatted with std::to_chars
// (shortest round-trip, '.' decimal, no locale).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "maxstable/doa.hpp"
#include "maxstable/error.hpp"
#include "maxstable/function_space.hpp"
#include "maxstable/generators.hpp"
#include "maxstable/rng.hpp"

namespace maxstable {

inline constexpr const char* library_version = "1.0.0";

inline const std::vector<std::pair<std::string, std::string>>& module_versions()
{
    static const std::vector<std::pair<std::string, std::string>> v{
        {"function_space", "1.0"}, {"generators", "1.0"}, {"dnorm", "1.0"},        {"sampler", "1.0"},
        {"doa", "1.0"},            {"neighborhoods", "1.0"}, {"calculus", "1.0"}, {"cli", "1.0"},
    };
    return v;
}

inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    const auto r = std::to_chars(buf, buf + 16, v, 16);
    std::string s(buf, r.ptr);
    return std::string(16 - s.size(), '0') + s;
}

// ---------------------------------------------------------------- parsing

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

inline double parse_double(std::string_view text)
{
    text = detail::trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    detail::require(r.ec == std::errc{} && r.ptr == text.data() + text.size() && !text.empty(),
                    "not a number: '" + std::string(text) + "'");
    return v;
}

inline std::size_t parse_count(std::string_view text)
{
    text = detail::trim(text);
    std::size_t v = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    detail::require(r.ec == std::errc{} && r.ptr == text.data() + text.size() && !text.empty(),
                    "not a nonnegative integer: '" + std::string(text) + "'");
    return v;
}

inline std::vector<double> parse_number_list(std::string_view text)
{
    std::vector<double> out;
    for (const auto& part : detail::split(text, ',')) {
        out.push_back(parse_double(part));
    }
    return out;
}

/// "a..b" doubling from a up to b, or a comma list, or a single value.
inline std::vector<double> parse_n_values(std::string_view text)
{
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        return parse_number_list(text);
    }
    const double lo = parse_double(text.substr(0, dots));
    const double hi = parse_double(text.substr(dots + 2));
    detail::require(lo >= 1.0 && hi >= lo, "n range must satisfy 1 <= lo <= hi");
    std::vector<double> out;
    for (double n = lo; n <= hi; n *= 2.0) {
        out.push_back(n);
    }
    return out;
}

/// "lo..hi/count" evenly spaced, or a comma list.
inline std::vector<double> parse_grid_values(std::string_view text)
{
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        return parse_number_list(text);
    }
    const auto slash = text.find('/', dots);
    detail::require(slash != std::string_view::npos, "range needs a point count: lo..hi/count");
    const double lo = parse_double(text.substr(0, dots));
    const double hi = parse_double(text.substr(dots + 2, slash - dots - 2));
    const std::size_t count = parse_count(text.substr(slash + 1));
    detail::require(count >= 2 && hi > lo, "range needs lo < hi and at least 2 points");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    out.back() = hi;
    return out;
}

namespace detail {

inline std::vector<double> parse_locations(std::string_view text)
{
    auto v = parse_number_list(text);
    require(!v.empty(), "location list must be nonempty");
    return v;
}

inline std::vector<double> evenly(std::size_t d) { return gen::DiscreteSimplex::evenly(d).locations; }

}  // namespace detail

/// constant | finite-spectral:NAME[+NAME...] | random-cosine:A | discrete-simplex:D | discrete-simplex@T,...
/// | logistic:LAMBDA:D | logistic:LAMBDA@T,...
inline GeneratorSpec parse_generator(std::string_view text)
{
    text = detail::trim(text);
    std::string_view head = text;
    std::string_view tail;
    const auto cut = text.find_first_of(":@");
    if (cut != std::string_view::npos) {
        head = text.substr(0, cut);
        tail = text.substr(cut);
    }
    if (head == "constant") {
        detail::require(tail.empty(), "constant generator takes no parameters");
        return gen::Constant{};
    }
    if (head == "finite-spectral") {
        detail::require(tail.size() > 1 && tail[0] == ':', "finite-spectral needs atom names, e.g. finite-spectral:linear");
        const auto names = detail::split(tail.substr(1), '+');
        if (names.size() == 1 && names[0] == "linear") {
            return gen::FiniteSpectral::linear();
        }
        gen::FiniteSpectral fs;
        for (const auto& n : names) {
            fs.atoms.push_back({n, {}});
        }
        return fs;
    }
    if (head == "random-cosine") {
        detail::require(tail.size() > 1 && tail[0] == ':', "random-cosine needs an amplitude, e.g. random-cosine:0.5");
        return gen::RandomCosine{parse_double(tail.substr(1))};
    }
    if (head == "discrete-simplex") {
        detail::require(tail.size() > 1, "discrete-simplex needs a dimension or locations");
        if (tail[0] == '@') {
            return gen::DiscreteSimplex{detail::parse_locations(tail.substr(1))};
        }
        return gen::DiscreteSimplex::evenly(parse_count(tail.substr(1)));
    }
    if (head == "logistic") {
        detail::require(tail.size() > 1 && tail[0] == ':', "logistic needs lambda, e.g. logistic:2:2");
        const auto rest = tail.substr(1);
        const auto sep = rest.find_first_of(":@");
        detail::require(sep != std::string_view::npos, "logistic needs locations: logistic:LAMBDA:D or logistic:LAMBDA@T,...");
        const double lambda = parse_double(rest.substr(0, sep));
        if (rest[sep] == '@') {
            return gen::LogisticFidis{lambda, detail::parse_locations(rest.substr(sep + 1))};
        }
        return gen::LogisticFidis{lambda, detail::evenly(parse_count(rest.substr(sep + 1)))};
    }
    throw ValidationError("unknown generator '" + std::string(text) + "'");
}

inline GeneratorSpec generator_from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        return parse_generator(j.get<std::string>());
    }
    detail::require(j.is_object() && j.contains("type"), "generator must be a string or an object with a type");
    const auto type = j.at("type").get<std::string>();
    if (type == "constant") return gen::Constant{};
    if (type == "finite-spectral") {
        gen::FiniteSpectral fs;
        for (const auto& a : j.at("atoms")) {
            if (a.is_string()) {
                fs.atoms.push_back({a.get<std::string>(), {}});
            } else {
                fs.atoms.push_back({"", a.get<std::vector<double>>()});
            }
        }
        return fs;
    }
    if (type == "random-cosine") return gen::RandomCosine{j.at("amplitude").get<double>()};
    if (type == "discrete-simplex") return gen::DiscreteSimplex{j.at("locations").get<std::vector<double>>()};
    if (type == "logistic") return gen::LogisticFidis{j.at("lambda").get<double>(), j.at("locations").get<std::vector<double>>()};
    throw ValidationError("unknown generator type '" + type + "'");
}

inline nlohmann::json to_json(const GeneratorSpec& spec)
{
    struct Visitor
    {
        nlohmann::json operator()(const gen::Constant&) const { return {{"type", "constant"}}; }
        nlohmann::json operator()(const gen::FiniteSpectral& s) const
        {
            nlohmann::json atoms = nlohmann::json::array();
            for (const auto& a : s.atoms) {
                if (a.name.empty()) {
                    atoms.push_back(a.values);
                } else {
                    atoms.push_back(a.name);
                }
            }
            return {{"type", "finite-spectral"}, {"atoms", atoms}};
        }
        nlohmann::json operator()(const gen::RandomCosine& s) const { return {{"type", "random-cosine"}, {"amplitude", s.amplitude}}; }
        nlohmann::json operator()(const gen::DiscreteSimplex& s) const { return {{"type", "discrete-simplex"}, {"locations", s.locations}}; }
        nlohmann::json operator()(const gen::LogisticFidis& s) const
        {
            return {{"type", "logistic"}, {"lambda", s.lambda}, {"locations", s.locations}};
        }
    };
    return std::visit(Visitor{}, spec);
}

inline MarginFamily parse_margin(std::string_view text)
{
    text = detail::trim(text);
    if (text == margins::ExpGumbel::name) return margins::ExpGumbel{};
    if (text == margins::UniformNegExp::name) return margins::UniformNegExp{};
    throw ValidationError("unknown margin family '" + std::string(text) + "' (expected exp-gumbel or uniform-negexp)");
}

/// const:V | linear:A,B (A + B t) | fidis:T=V,... | bump:C,W (-max(0, 1 - |t - C| / W)) | values:V0,...
/// optionally followed by |T=V,... point overrides.
inline EFunction parse_function(std::string_view text, const GridPtr& grid)
{
    text = detail::trim(text);
    std::string_view body = text;
    std::string_view extra;
    if (const auto bar = text.find('|'); bar != std::string_view::npos) {
        body = text.substr(0, bar);
        extra = text.substr(bar + 1);
    }
    const auto colon = body.find(':');
    detail::require(colon != std::string_view::npos, "function must look like kind:args, got '" + std::string(text) + "'");
    const auto kind = detail::trim(body.substr(0, colon));
    const auto args = body.substr(colon + 1);

    auto pairs = [&](std::string_view s) {
        std::vector<std::pair<double, double>> out;
        if (detail::trim(s).empty()) return out;
        for (const auto& item : detail::split(s, ',')) {
            const auto eq = item.find('=');
            detail::require(eq != std::string::npos, "expected T=V, got '" + item + "'");
            out.emplace_back(parse_double(std::string_view(item).substr(0, eq)), parse_double(std::string_view(item).substr(eq + 1)));
        }
        return out;
    };

    std::optional<EFunction> f;
    if (kind == "const") {
        f = EFunction::constant(grid, parse_double(args));
    } else if (kind == "linear") {
        const auto ab = parse_number_list(args);
        detail::require(ab.size() == 2, "linear needs A,B");
        f = EFunction::from_fn(grid, [a = ab[0], b = ab[1]](double t) { return a + b * t; });
    } else if (kind == "fidis") {
        const auto pts = pairs(args);
        f = EFunction::embed_fidis(grid, std::span<const std::pair<double, double>>(pts));
    } else if (kind == "bump") {
        const auto cw = parse_number_list(args);
        detail::require(cw.size() == 2 && cw[1] > 0.0, "bump needs C,W with W > 0");
        f = EFunction::from_fn(grid, [c = cw[0], w = cw[1]](double t) { return -std::max(0.0, 1.0 - std::abs(t - c) / w); });
    } else if (kind == "values") {
        auto v = parse_number_list(args);
        detail::require(v.size() == grid->size(), "values list must match the grid size");
        f = EFunction(grid, std::move(v));
    } else {
        throw ValidationError("unknown function kind '" + std::string(kind) + "'");
    }
    for (const auto& [t, v] : pairs(extra)) {
        f = f->with_override(grid->require_index(t, "off-grid override point"), v);
    }
    return *f;
}

// ---------------------------------------------------------------- experiment spec

/// One experiment: a command plus its parameters. Flags and spec-file keys
/// share names (dashes become underscores); a "params" object in the file is
/// flattened into the top level, where top-level keys win.
struct ExperimentSpec
{
    std::string command;
    nlohmann::json generator = "constant";
    std::size_t grid_size = Grid::default_size;
    std::optional<std::string> margin;
    std::map<std::string, std::string> functions;
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::string out;

    static ExperimentSpec from_json(const nlohmann::json& j)
    {
        detail::require(j.is_object(), "experiment spec must be a JSON object");
        ExperimentSpec s;
        if (j.contains("params")) {
            detail::require(j.at("params").is_object(), "params must be an object");
            for (const auto& [k, v] : j.at("params").items()) {
                s.params[k] = v;
            }
        }
        for (const auto& [key, value] : j.items()) {
            if (key == "params") {
                continue;
            }
            if (key == "command") {
                s.command = value.get<std::string>();
            } else if (key == "generator") {
                s.generator = value;
            } else if (key == "grid_size") {
                s.grid_size = value.is_string() ? parse_count(value.get<std::string>()) : value.get<std::size_t>();
            } else if (key == "margin") {
                s.margin = value.get<std::string>();
            } else if (key == "functions") {
                s.functions = value.get<std::map<std::string, std::string>>();
            } else if (key == "seed") {
                s.seed = value.is_string() ? static_cast<std::uint64_t>(parse_count(value.get<std::string>())) : value.get<std::uint64_t>();
            } else if (key == "out") {
                s.out = value.get<std::string>();
            } else {
                s.params[key] = value;
            }
        }
        return s;
    }

    static ExperimentSpec load(const std::string& path)
    {
        std::ifstream in(path);
        detail::require(in.good(), "cannot read spec file '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("spec file '" + path + "' is not valid JSON: " + e.what());
        }
        return from_json(j);
    }

    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["command"] = command;
        j["generator"] = generator;
        j["grid_size"] = grid_size;
        if (margin) j["margin"] = *margin;
        if (!functions.empty()) j["functions"] = functions;
        j["params"] = params;
        j["seed"] = seed;
        return j;
    }

    /// Hash of the canonical JSON (output path excluded).
    std::uint64_t hash() const { return fnv1a(to_json().dump()); }

    GridPtr grid() const { return Grid::uniform(grid_size); }
    GeneratorSpec generator_spec() const { return generator_from_json(generator); }
    StreamKey key() const { return {seed, std::string_view(command)}; }

    bool has(const std::string& key) const { return params.contains(key) && !params.at(key).is_null(); }

    std::string text(const std::string& key, const std::string& fallback) const
    {
        if (!has(key)) return fallback;
        const auto& v = params.at(key);
        return v.is_string() ? v.get<std::string>() : v.dump();
    }

    double number(const std::string& key, double fallback) const
    {
        if (!has(key)) return fallback;
        const auto& v = params.at(key);
        return v.is_string() ? parse_double(v.get<std::string>()) : v.get<double>();
    }

    std::size_t count(const std::string& key, std::size_t fallback) const
    {
        if (!has(key)) return fallback;
        const auto& v = params.at(key);
        if (v.is_string()) return parse_count(v.get<std::string>());
        detail::require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), key + " must be a nonnegative integer");
        return v.get<std::size_t>();
    }

    /// A list from a JSON array, a number, or a string in lo..hi/count or comma form.
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const
    {
        if (!has(key)) return fallback;
        const auto& v = params.at(key);
        if (v.is_array()) return v.get<std::vector<double>>();
        if (v.is_number()) return {v.get<double>()};
        return parse_grid_values(v.get<std::string>());
    }

    std::vector<double> sample_sizes(const std::string& key, const std::vector<double>& fallback) const
    {
        if (!has(key)) return fallback;
        const auto& v = params.at(key);
        if (v.is_array()) return v.get<std::vector<double>>();
        if (v.is_number()) return {v.get<double>()};
        return parse_n_values(v.get<std::string>());
    }

    /// A named function from `functions`, or an inline definition.
    EFunction function(const std::string& key, const std::string& fallback, const GridPtr& g) const
    {
        const std::string def = text(key, fallback);
        if (const auto it = functions.find(def); it != functions.end()) {
            return parse_function(it->second, g);
        }
        return parse_function(def, g);
    }

    /// Grid index of a location parameter given as t in [0, 1].
    std::size_t location(const std::string& key, double fallback, const GridPtr& g) const
    {
        return g->require_index(number(key, fallback), key + " is not a grid point");
    }
};

// ---------------------------------------------------------------- CSV

class CsvTable
{
  public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void comment(const std::string& key, const std::string& value) { comments_.emplace_back(key, value); }

    /// Inserts comments ahead of the existing ones.
    void prepend_comments(const std::vector<std::pair<std::string, std::string>>& lines)
    {
        comments_.insert(comments_.begin(), lines.begin(), lines.end());
    }

    template <class... Cells>
    void row(const Cells&... cells)
    {
        std::vector<std::string> r{cell(cells)...};
        detail::require(r.size() == columns_.size(), "CSV row width mismatch");
        rows_.push_back(std::move(r));
    }

    std::size_t size() const { return rows_.size(); }

    void write(std::ostream& os) const
    {
        for (const auto& [k, v] : comments_) {
            os << "# " << k << ": " << v << '\n';
        }
        write_line(os, columns_);
        for (const auto& r : rows_) {
            write_line(os, r);
        }
    }

    std::string str() const
    {
        std::ostringstream os;
        write(os);
        return os.str();
    }

    void save(const std::string& path) const { write_text_file(path, str()); }

    static void write_text_file(const std::string& path, const std::string& content)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write output '" + path + "'");
        }
        out << content;
        out.flush();
        if (!out) {
            throw IoError("failed writing output '" + path + "'");
        }
    }

  private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(float v) { return format_double(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    static std::string cell(bool v) { return v ? "true" : "false"; }
    template <class I>
        requires std::is_integral_v<I>
    static std::string cell(I v)
    {
        return std::to_string(v);
    }

    static void write_line(std::ostream& os, const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            const auto& c = cells[i];
            if (c.find_first_of(",\"\n") != std::string::npos) {
                os << '"';
                for (char ch : c) {
                    if (ch == '"') os << '"';
                    os << ch;
                }
                os << '"';
            } else {
                os << c;
            }
        }
        os << '\n';
    }

    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> comments_;
    std::vector<std::vector<std::string>> rows_;
};

/// Provenance comments: library and module versions, spec hash, seed, command.
inline void stamp(CsvTable& table, const ExperimentSpec& spec)
{
    std::string modules;
    for (const auto& [name, version] : module_versions()) {
        modules += (modules.empty() ? "" : ";") + name + "=" + version;
    }
    table.prepend_comments({{"maxstable", library_version},
                            {"modules", modules},
                            {"command", spec.command},
                            {"spec_hash", hex64(spec.hash())},
                            {"seed", std::to_string(spec.seed)}});
}

/// Run manifest next to a CSV output: <out>.manifest.json.
inline nlohmann::json manifest(const ExperimentSpec& spec, const nlohmann::json& results)
{
    nlohmann::json modules = nlohmann::json::object();
    for (const auto& [name, version] : module_versions()) {
        modules[name] = version;
    }
    return {{"library", library_version}, {"modules", modules},           {"spec", spec.to_json()},
            {"spec_hash", hex64(spec.hash())}, {"seed", spec.seed},       {"output", spec.out},
            {"results", results},              {"rng", "xoshiro256** seeded by splitmix64(seed, experiment, replicate)"}};
}

}  // namespace maxstable
