#pragma once

/**
 * @file scenario.hpp
 * @brief Scenario files: a line-oriented key-value text format plus a JSON
 * equivalent with the same keys.
 *
 * Text grammar (one binding per line):
 *
 *   # comment to end of line
 *   key = value            # scalars: numbers or bare words
 *   key = v1, v2, v3       # lists: comma separated
 *
 * Keys are case-sensitive. Exactly one of the dimensionless parameter block
 * {s_in, r, d} and the physical block {Q, V, V1, S_in, d_phys} may be
 * present; physical scenarios are passed through nondimensionalize. A file
 * whose first non-space character is '{' is parsed as JSON with the same
 * keys (lists become arrays).
 *
 * Recognized keys:
 *   growth (linear|monod), m, mu_max, K
 *   config (single|serial|parallel), alpha
 *   s_in, r, d                          -- dimensionless block
 *   Q, V, V1, S_in, d_phys              -- physical block
 *   sweep (r|d), sweep_scale (linear|log), sweep_min, sweep_max, sweep_count
 *   s_in_list
 *   t_end, rel_tol, abs_tol, initial, trials, seed
 *   format (csv|json), out
 */

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemnet/growth.hpp"
#include "chemnet/model.hpp"

namespace chemnet {

/// Parse/validation failure with the offending key and line attached.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& message, std::string key = {}, int line = 0)
        : std::runtime_error(format(message, key, line)), key_(std::move(key)), line_(line) {}

    const std::string& key() const { return key_; }
    int line() const { return line_; }

private:
    static std::string format(const std::string& message, const std::string& key, int line) {
        std::ostringstream os;
        os << "scenario: " << message;
        if (!key.empty()) os << " (key '" << key << "'";
        if (line > 0) os << (key.empty() ? " (" : ", ") << "line " << line;
        if (!key.empty() || line > 0) os << ")";
        return os.str();
    }

    std::string key_;
    int line_;
};

struct SweepSpec {
    bool present = false;
    std::string parameter;   ///< "r" or "d"
    std::string scale = "linear";
    double min = 0.0;
    double max = 0.0;
    int count = 0;
};

struct SimulateSpec {
    double t_end = 100.0;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    std::vector<double> initial;  ///< empty, or 2/4 components
    int trials = 0;
    std::uint64_t seed = 12345;
};

struct OutputSpec {
    std::string format;  ///< "csv" or "json" (empty: command default)
    std::string path;
};

struct Scenario {
    GrowthLaw law = GrowthLaw::linear(1.0);
    ConfigKind kind = ConfigKind::SingleTank;
    bool physical = false;
    PhysicalScenario phys;
    double r = 0.0;
    double alpha = 0.0;
    double d = 0.0;
    double s_in = 0.0;
    std::vector<double> s_in_list;
    SweepSpec sweep;
    SimulateSpec sim;
    OutputSpec output;

    /// Dimensionless problem, applying the scaling when the block is physical.
    DimensionlessScenario resolve() const {
        if (physical) {
            return nondimensionalize(phys, law);
        }
        Configuration config = Configuration::single_tank();
        if (kind == ConfigKind::Serial) {
            config = Configuration::serial(r);
        } else if (kind == ConfigKind::ParallelDiffusion) {
            config = Configuration::parallel(r, alpha, d);
        }
        return DimensionlessScenario{config, s_in, law};
    }

    /// Input concentrations for multi-series sweeps (falls back to s_in).
    std::vector<double> series_inputs() const {
        if (!s_in_list.empty()) return s_in_list;
        return {resolve().s_in};
    }
};

namespace scenario_detail {

struct RawValue {
    std::string text;
    int line = 0;
};

inline double parse_double(const std::string& text, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ScenarioError("expected a number, got '" + text + "'", key, line);
    }
}

inline std::vector<double> parse_list(const std::string& text, const std::string& key, int line) {
    std::vector<double> values;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        values.push_back(parse_double(item, key, line));
    }
    if (values.empty()) throw ScenarioError("expected a list of numbers", key, line);
    return values;
}

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "growth", "m",  "mu_max", "K",  "config",      "alpha",     "s_in",
        "r",      "d",  "Q",      "V",  "V1",          "S_in",      "d_phys",
        "sweep",  "sweep_scale", "sweep_min", "sweep_max", "sweep_count", "s_in_list",
        "t_end",  "rel_tol", "abs_tol", "initial", "trials", "seed", "format", "out"};
    return keys;
}

inline Scenario build(const std::map<std::string, RawValue>& kv) {
    auto has = [&kv](const std::string& key) { return kv.count(key) != 0; };
    auto text = [&kv](const std::string& key) { return kv.at(key).text; };
    auto line = [&kv](const std::string& key) { return kv.at(key).line; };
    auto number = [&](const std::string& key) { return parse_double(text(key), key, line(key)); };

    for (const auto& [key, value] : kv) {
        if (!known_keys().count(key)) {
            throw ScenarioError("unknown key", key, value.line);
        }
    }

    Scenario scenario;

    // Growth law.
    const std::string growth = has("growth") ? text("growth") : "linear";
    if (growth == "linear") {
        scenario.law = GrowthLaw::linear(has("m") ? number("m") : 1.0);
        for (const char* key : {"mu_max", "K"}) {
            if (has(key)) throw ScenarioError("only valid with growth = monod", key, line(key));
        }
    } else if (growth == "monod") {
        if (!has("mu_max") || !has("K")) {
            throw ScenarioError("growth = monod requires mu_max and K", "growth",
                                has("growth") ? line("growth") : 0);
        }
        scenario.law = GrowthLaw::monod(number("mu_max"), number("K"));
        if (has("m")) throw ScenarioError("only valid with growth = linear", "m", line("m"));
    } else {
        throw ScenarioError("growth must be 'linear' or 'monod'", "growth", line("growth"));
    }

    // Configuration variant.
    if (!has("config")) throw ScenarioError("missing required key 'config'");
    const std::string config = text("config");
    if (config == "single") {
        scenario.kind = ConfigKind::SingleTank;
    } else if (config == "serial") {
        scenario.kind = ConfigKind::Serial;
    } else if (config == "parallel") {
        scenario.kind = ConfigKind::ParallelDiffusion;
    } else {
        throw ScenarioError("config must be single, serial or parallel", "config", line("config"));
    }
    const bool two_compartments = scenario.kind != ConfigKind::SingleTank;
    const bool is_parallel = scenario.kind == ConfigKind::ParallelDiffusion;

    // Exactly one parameter block.
    const char* physical_keys[] = {"Q", "V", "V1", "S_in", "d_phys"};
    const char* dimensionless_keys[] = {"s_in", "r", "d"};
    bool any_physical = false;
    for (const char* key : physical_keys) any_physical = any_physical || has(key);
    bool any_dimensionless = false;
    for (const char* key : dimensionless_keys) any_dimensionless = any_dimensionless || has(key);
    if (any_physical && any_dimensionless) {
        throw ScenarioError(
            "physical (Q, V, V1, S_in, d_phys) and dimensionless (s_in, r, d) parameters "
            "cannot be mixed");
    }

    if (any_physical) {
        scenario.physical = true;
        scenario.phys.kind = scenario.kind;
        for (const char* key : {"Q", "V", "S_in"}) {
            if (!has(key)) throw ScenarioError("physical block requires Q, V and S_in", key);
        }
        scenario.phys.flow = number("Q");
        scenario.phys.volume = number("V");
        scenario.phys.s_in = number("S_in");
        if (two_compartments) {
            if (!has("V1")) throw ScenarioError("two-compartment physical block requires V1", "V1");
            scenario.phys.volume1 = number("V1");
        } else if (has("V1")) {
            throw ScenarioError("V1 is only valid for two-compartment configurations", "V1",
                                line("V1"));
        }
        if (is_parallel) {
            scenario.phys.alpha = has("alpha") ? number("alpha") : 0.0;
            scenario.phys.d = has("d_phys") ? number("d_phys") : 0.0;
        } else if (has("d_phys")) {
            throw ScenarioError("d_phys is only valid for parallel configurations", "d_phys",
                                line("d_phys"));
        }
    } else {
        const bool needs_s_in = !has("s_in_list");
        if (!has("s_in") && needs_s_in) {
            throw ScenarioError("missing input concentration: set s_in (or s_in_list for sweeps)");
        }
        if (has("s_in")) scenario.s_in = number("s_in");
        if (two_compartments) {
            const bool r_swept = has("sweep") && text("sweep") == "r";
            if (!has("r") && !r_swept) {
                throw ScenarioError("two-compartment configurations require r", "r");
            }
            if (has("r")) scenario.r = number("r");
        } else if (has("r")) {
            throw ScenarioError("r is only valid for two-compartment configurations", "r",
                                line("r"));
        }
        if (is_parallel) {
            if (!has("alpha")) throw ScenarioError("parallel configurations require alpha", "alpha");
            scenario.alpha = number("alpha");
            const bool d_swept = has("sweep") && text("sweep") == "d";
            if (has("d")) {
                scenario.d = number("d");
            } else if (!d_swept) {
                throw ScenarioError("parallel configurations require d", "d");
            }
        } else {
            for (const char* key : {"alpha", "d"}) {
                if (has(key)) {
                    throw ScenarioError("only valid for parallel configurations", key, line(key));
                }
            }
        }
    }

    if (has("s_in_list")) {
        scenario.s_in_list = parse_list(text("s_in_list"), "s_in_list", line("s_in_list"));
    }

    // Sweep block.
    if (has("sweep")) {
        scenario.sweep.present = true;
        scenario.sweep.parameter = text("sweep");
        if (scenario.sweep.parameter == "r") {
            if (scenario.kind != ConfigKind::Serial) {
                throw ScenarioError("sweep = r requires config = serial", "sweep", line("sweep"));
            }
        } else if (scenario.sweep.parameter == "d") {
            if (!is_parallel) {
                throw ScenarioError("sweep = d requires config = parallel", "sweep", line("sweep"));
            }
        } else {
            throw ScenarioError("sweep must be 'r' or 'd'", "sweep", line("sweep"));
        }
        if (has("sweep_scale")) {
            scenario.sweep.scale = text("sweep_scale");
            if (scenario.sweep.scale != "linear" && scenario.sweep.scale != "log") {
                throw ScenarioError("sweep_scale must be 'linear' or 'log'", "sweep_scale",
                                    line("sweep_scale"));
            }
        }
        for (const char* key : {"sweep_min", "sweep_max", "sweep_count"}) {
            if (!has(key)) throw ScenarioError("sweep requires sweep_min, sweep_max, sweep_count", key);
        }
        scenario.sweep.min = number("sweep_min");
        scenario.sweep.max = number("sweep_max");
        scenario.sweep.count = static_cast<int>(number("sweep_count"));
        if (!(scenario.sweep.max > scenario.sweep.min) || scenario.sweep.count < 2) {
            throw ScenarioError("sweep bounds need max > min and count >= 2", "sweep_min",
                                line("sweep_min"));
        }
        if (scenario.sweep.parameter == "r" &&
            !(scenario.sweep.min > 0.0 && scenario.sweep.max < 1.0)) {
            throw ScenarioError("r sweep bounds must lie strictly in (0, 1)", "sweep_min",
                                line("sweep_min"));
        }
        if (scenario.sweep.parameter == "d" && scenario.sweep.min < 0.0) {
            throw ScenarioError("d sweep bounds must be non-negative", "sweep_min",
                                line("sweep_min"));
        }
        if (scenario.sweep.scale == "log" && !(scenario.sweep.min > 0.0)) {
            throw ScenarioError("log-scale sweeps need sweep_min > 0", "sweep_min",
                                line("sweep_min"));
        }
    } else {
        for (const char* key : {"sweep_scale", "sweep_min", "sweep_max", "sweep_count"}) {
            if (has(key)) throw ScenarioError("only valid together with 'sweep'", key, line(key));
        }
    }

    // Simulation block.
    if (has("t_end")) scenario.sim.t_end = number("t_end");
    if (has("rel_tol")) scenario.sim.rel_tol = number("rel_tol");
    if (has("abs_tol")) scenario.sim.abs_tol = number("abs_tol");
    if (has("trials")) scenario.sim.trials = static_cast<int>(number("trials"));
    if (has("seed")) scenario.sim.seed = static_cast<std::uint64_t>(number("seed"));
    if (has("initial")) {
        scenario.sim.initial = parse_list(text("initial"), "initial", line("initial"));
        const std::size_t expect = two_compartments ? 4 : 2;
        if (scenario.sim.initial.size() != expect) {
            std::ostringstream os;
            os << "initial state needs " << expect << " components for this configuration";
            throw ScenarioError(os.str(), "initial", line("initial"));
        }
    }

    // Output block.
    if (has("format")) {
        scenario.output.format = text("format");
        if (scenario.output.format != "csv" && scenario.output.format != "json") {
            throw ScenarioError("format must be 'csv' or 'json'", "format", line("format"));
        }
    }
    if (has("out")) scenario.output.path = text("out");

    return scenario;
}

inline std::string trim(const std::string& s) {
    std::size_t lo = 0, hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

/// Round-trip exact rendering for JSON-to-text conversion.
inline std::string exact_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace scenario_detail

/// Parses the key-value text form.
inline Scenario parse_scenario_text(const std::string& content) {
    std::map<std::string, scenario_detail::RawValue> kv;
    std::istringstream is(content);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string stripped = scenario_detail::trim(raw);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ScenarioError("expected 'key = value'", stripped, line_no);
        }
        const std::string key = scenario_detail::trim(stripped.substr(0, eq));
        const std::string value = scenario_detail::trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ScenarioError("expected 'key = value'", key, line_no);
        }
        if (kv.count(key)) {
            throw ScenarioError("duplicate key", key, line_no);
        }
        kv[key] = {value, line_no};
    }
    return scenario_detail::build(kv);
}

/// Parses the JSON form (same keys; lists as arrays).
inline Scenario parse_scenario_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ScenarioError("JSON scenario must be an object");
    std::map<std::string, scenario_detail::RawValue> kv;
    for (const auto& [key, value] : j.items()) {
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_number()) {
            text = scenario_detail::exact_number(value.get<double>());
        } else if (value.is_array()) {
            std::ostringstream os;
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (i) os << ',';
                if (!value[i].is_number()) throw ScenarioError("list entries must be numbers", key);
                os << scenario_detail::exact_number(value[i].get<double>());
            }
            text = os.str();
        } else {
            throw ScenarioError("values must be numbers, strings or arrays", key);
        }
        kv[key] = {text, 0};
    }
    return scenario_detail::build(kv);
}

/// Loads a scenario file, dispatching on the leading character ('{' = JSON).
inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();
    const std::string stripped = scenario_detail::trim(content);
    if (!stripped.empty() && stripped.front() == '{') {
        return parse_scenario_json(nlohmann::json::parse(content));
    }
    return parse_scenario_text(content);
}

}  // namespace chemnet
