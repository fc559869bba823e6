#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ymh/diagnostics.hpp"
#include "ymh/fields.hpp"
#include "ymh/flow.hpp"
#include "ymh/presets.hpp"
#include "ymh/snapshot.hpp"

namespace ymh {

/// Everything a run needs, parsed from a flat key = value file.
struct RunConfig {
    GridSpec grid;
    FiberModel fiber;
    IntegratorConfig integrator;
    MonitorConfig monitors;

    std::string preset;            ///< empty when starting from a snapshot
    std::filesystem::path snapshot_path;
    double lambda = 0;             ///< bubble scale
    double amplitude = 0.05;       ///< random-smooth amplitude
    int cutoff = 4;                ///< random-smooth highest mode
    int winding = 1;               ///< vortex winding

    unsigned long long seed = 0;
    std::filesystem::path output_dir = "out";
    int snapshot_every = 0;        ///< periodic snapshots every this many series rows (0 = off)

    /// Build the initial state described by this config.
    FlowState make_initial() const {
        if (!preset.empty()) {
            if (preset == "ground") return make_ground(grid, fiber);
            if (preset == "south-pole") return make_south_pole(grid, fiber.central_element);
            if (preset == "equator") return make_equator(grid, fiber.central_element);
            if (preset == "bubble")
                return make_bubble_fixture(grid, lambda, grid.n / 2, grid.n / 2, fiber.central_element);
            if (preset == "two-bubbles")
                return make_two_bubble_fixture(grid, lambda, fiber.central_element);
            if (preset == "random-smooth")
                return make_random_smooth(grid, fiber, seed, amplitude, cutoff);
            if (preset == "vortex") return make_vortex(grid, winding, fiber.central_element);
            throw ConfigError("unknown preset '" + preset + "'");
        }
        FlowState s = read_snapshot(snapshot_path);
        if (s.spec() != grid) throw ConfigError("initial.snapshot grid does not match grid.n/grid.length");
        if (s.model().kind != fiber.kind)
            throw ConfigError("initial.snapshot fiber kind does not match fiber.kind");
        s.phi.set_model(fiber); // snapshots carry no central element; the config's applies
        return s;
    }
};

namespace detail {

struct KvLine {
    std::string key, value;
    int line = 0;
};

inline std::vector<KvLine> parse_kv(std::istream& in) {
    std::vector<KvLine> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const char* ws = " \t\r\n";
            const size_t a = s.find_first_not_of(ws);
            if (a == std::string::npos) return std::string();
            const size_t b = s.find_last_not_of(ws);
            return s.substr(a, b - a + 1);
        };
        const std::string t = trim(line);
        if (t.empty()) continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        KvLine kv;
        kv.key = trim(t.substr(0, eq));
        kv.value = trim(t.substr(eq + 1));
        kv.line = lineno;
        if (kv.key.empty() || kv.value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        out.push_back(kv);
    }
    return out;
}

inline double to_double(const KvLine& kv) {
    try {
        size_t pos = 0;
        const double v = std::stod(kv.value, &pos);
        if (pos != kv.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("line " + std::to_string(kv.line) + ": '" + kv.value + "' is not a number");
    }
}

inline long long to_int(const KvLine& kv) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(kv.value, &pos);
        if (pos != kv.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("line " + std::to_string(kv.line) + ": '" + kv.value + "' is not an integer");
    }
}

inline bool to_bool(const KvLine& kv) {
    if (kv.value == "true" || kv.value == "1") return true;
    if (kv.value == "false" || kv.value == "0") return false;
    throw ConfigError("line " + std::to_string(kv.line) + ": '" + kv.value + "' is not a boolean");
}

inline std::vector<double> to_double_list(const KvLine& kv) {
    std::vector<double> out;
    std::stringstream ss(kv.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        KvLine sub{kv.key, item, kv.line};
        // strip spaces around each entry
        while (!sub.value.empty() && (sub.value.front() == ' ' || sub.value.front() == '\t'))
            sub.value.erase(sub.value.begin());
        while (!sub.value.empty() && (sub.value.back() == ' ' || sub.value.back() == '\t'))
            sub.value.pop_back();
        out.push_back(to_double(sub));
    }
    if (out.empty()) throw ConfigError("line " + std::to_string(kv.line) + ": empty list");
    return out;
}

} // namespace detail

inline RunConfig parse_config_stream(std::istream& in) {
    std::vector<detail::KvLine> kvs = detail::parse_kv(in);
    std::map<std::string, detail::KvLine> m;
    for (const auto& kv : kvs) {
        if (m.count(kv.key))
            throw ConfigError("line " + std::to_string(kv.line) + ": duplicate key '" + kv.key + "'");
        m[kv.key] = kv;
    }
    auto take = [&m](const std::string& key) -> std::optional<detail::KvLine> {
        auto it = m.find(key);
        if (it == m.end()) return std::nullopt;
        detail::KvLine kv = it->second;
        m.erase(it);
        return kv;
    };
    auto require = [&take](const std::string& key) {
        auto kv = take(key);
        if (!kv) throw ConfigError("missing required key '" + key + "'");
        return *kv;
    };

    RunConfig cfg;
    const long long n = detail::to_int(require("grid.n"));
    const double length = detail::to_double(require("grid.length"));
    try {
        cfg.grid = GridSpec(static_cast<int>(n), length);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }

    const std::string kind = require("fiber.kind").value;
    FiberKind fk = fiber_kind_from_name(kind);
    cfg.fiber = fk == FiberKind::Sphere ? FiberModel::sphere() : FiberModel::plane();
    if (auto kv = take("fiber.central_element")) cfg.fiber.central_element = detail::to_double(*kv);

    cfg.integrator.dt = detail::to_double(require("integrator.dt"));
    cfg.integrator.max_time = detail::to_double(require("integrator.max_time"));
    if (auto kv = take("integrator.scheme")) {
        if (kv->value == "euler") cfg.integrator.scheme = Scheme::ExplicitEuler;
        else if (kv->value == "rk4") cfg.integrator.scheme = Scheme::RK4;
        else throw ConfigError("line " + std::to_string(kv->line) + ": scheme must be euler or rk4");
    }
    if (auto kv = take("integrator.cfl_safety")) cfg.integrator.cfl_safety = detail::to_double(*kv);
    if (auto kv = take("integrator.adapt")) cfg.integrator.adapt = detail::to_bool(*kv);
    if (auto kv = take("integrator.stop_tension")) cfg.integrator.stop_tension = detail::to_double(*kv);
    if (!(cfg.integrator.dt > 0)) throw ConfigError("integrator.dt must be positive");
    if (!(cfg.integrator.cfl_safety > 0 && cfg.integrator.cfl_safety <= 1))
        throw ConfigError("integrator.cfl_safety must lie in (0, 1]");
    if (!cfg.integrator.adapt &&
        cfg.integrator.dt > parabolic_dt_bound(cfg.grid, cfg.integrator.cfl_safety) * (1.0 + 1e-12))
        throw ConfigError("integrator.dt exceeds cfl_safety * h^2 / 4; enable integrator.adapt or lower dt");

    cfg.monitors.ball_radii = {cfg.grid.length / 16.0, cfg.grid.length / 8.0, cfg.grid.length / 4.0};
    if (auto kv = take("monitors.epsilon0")) cfg.monitors.epsilon0 = detail::to_double(*kv);
    if (auto kv = take("monitors.ball_radii")) cfg.monitors.ball_radii = detail::to_double_list(*kv);
    if (auto kv = take("monitors.alpha_m")) cfg.monitors.alpha_m = detail::to_double(*kv);
    if (auto kv = take("monitors.check_every"))
        cfg.monitors.check_every = static_cast<int>(detail::to_int(*kv));
    try {
        cfg.monitors.validate(cfg.grid);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }

    auto preset = take("initial.preset");
    auto snap = take("initial.snapshot");
    if (!!preset == !!snap)
        throw ConfigError("exactly one of initial.preset and initial.snapshot is required");
    if (preset) cfg.preset = preset->value;
    if (snap) {
        cfg.snapshot_path = snap->value;
        if (!std::filesystem::exists(cfg.snapshot_path))
            throw ConfigError("line " + std::to_string(snap->line) + ": snapshot file '" +
                              snap->value + "' does not exist");
    }
    if (auto kv = take("initial.lambda")) cfg.lambda = detail::to_double(*kv);
    if (auto kv = take("initial.amplitude")) cfg.amplitude = detail::to_double(*kv);
    if (auto kv = take("initial.cutoff")) cfg.cutoff = static_cast<int>(detail::to_int(*kv));
    if (auto kv = take("initial.winding")) cfg.winding = static_cast<int>(detail::to_int(*kv));

    if (auto kv = take("seed")) cfg.seed = static_cast<unsigned long long>(detail::to_int(*kv));
    if (auto kv = take("output_dir")) cfg.output_dir = kv->value;
    if (auto kv = take("snapshot_every")) cfg.snapshot_every = static_cast<int>(detail::to_int(*kv));

    if (!m.empty()) {
        const auto& kv = m.begin()->second;
        throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
    }
    return cfg;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse_config_stream(in);
}

} // namespace ymh
