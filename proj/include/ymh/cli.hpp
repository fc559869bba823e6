#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "ymh/config.hpp"
#include "ymh/gauge.hpp"
#include "ymh/render.hpp"
#include "ymh/run.hpp"
#include "ymh/snapshot.hpp"

namespace ymh {

namespace detail {

/// All numeric output uses 17 significant digits.
inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_row(const TimeSeriesRow& r) {
    std::ostringstream os;
    os << num(r.time) << ',' << num(r.total_energy) << ',' << num(r.curvature_term) << ','
       << num(r.kinetic_term) << ',' << num(r.potential_term) << ',' << num(r.max_density) << ','
       << num(r.tension_norm1) << ',' << num(r.tension_norm2) << ',' << num(r.dissipation_rate)
       << ',' << num(r.bochner_ratio) << '\n';
    return os.str();
}

inline constexpr const char* kCsvHeader =
    "time,total_energy,curvature_term,kinetic_term,potential_term,max_density,"
    "tension_norm1,tension_norm2,dissipation_rate,bochner_ratio\n";

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string());
        out << text;
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string events_report(const RunReport& rep, double alpha_m) {
    AccountReport acc = bubble_account(rep.events, rep.initial_energy, rep.final_energy,
                                       rep.dissipated_outside_episodes, alpha_m);
    std::ostringstream os;
    int k = 0;
    for (const auto& row : acc.rows) {
        ++k;
        os << "event " << k << "\n";
        os << "  time = " << num(row.event.time) << "\n";
        os << "  location = (" << row.event.ix << ", " << row.event.iy << ")\n";
        os << "  scale = " << num(row.event.scale) << "\n";
        os << "  energy_before = " << num(row.event.energy_before) << "\n";
        os << "  energy_after = " << num(row.event.energy_after) << "\n";
        os << "  bubble_energy = " << num(row.event.bubble_energy()) << "\n";
        os << "  quanta = " << row.quanta << "\n";
        os << "  quantization_defect = " << num(row.quantization_defect) << "\n";
    }
    os << "accounting\n";
    os << "  initial_energy = " << num(acc.initial_energy) << "\n";
    os << "  final_energy = " << num(acc.final_energy) << "\n";
    os << "  dissipated = " << num(acc.dissipated) << "\n";
    os << "  total_bubble_energy = " << num(acc.total_bubble) << "\n";
    os << "  total_quanta = " << acc.total_quanta << "\n";
    os << "  accounting_defect = " << num(acc.accounting_defect) << "\n";
    return os.str();
}

} // namespace detail

/// `ymh run <config>`: integrate and write series.csv, events.txt, and
/// final.snap (plus optional periodic snapshots) into the output directory.
/// Exit codes: 0 ok, 1 configuration or I/O error, 2 non-finite fields.
inline int cmd_run(const std::string& config_path) {
    RunConfig cfg;
    try {
        cfg = parse_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        FlowState initial = cfg.make_initial();
        std::filesystem::create_directories(cfg.output_dir);

        std::ostringstream csv;
        csv << detail::kCsvHeader;
        long rows = 0;
        RowSink sink = [&](const TimeSeriesRow& row, const FlowState& st) {
            csv << detail::csv_row(row);
            ++rows;
            if (cfg.snapshot_every > 0 && rows % cfg.snapshot_every == 0)
                write_snapshot(cfg.output_dir / ("state_" + std::to_string(rows) + ".snap"), st);
        };

        RunReport rep = run(initial, cfg.integrator, cfg.monitors, sink);

        detail::write_text_atomic(cfg.output_dir / "series.csv", csv.str());
        detail::write_text_atomic(cfg.output_dir / "events.txt",
                                  detail::events_report(rep, cfg.monitors.alpha_m));
        write_snapshot(cfg.output_dir / "final.snap", rep.final_state);
        return 0;
    } catch (const NonFiniteField& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

/// `ymh gauge-fix <in> <out>`: Coulomb-fix the connection of a snapshot and
/// print residual, holonomy, and winding (when the holonomy is trivial).
inline int cmd_gauge_fix(const std::string& in_path, const std::string& out_path) {
    try {
        FlowState state = read_snapshot(in_path);
        CoulombResult fix = coulomb_fix(state.A);
        FlowState fixed = apply_gauge(fix.transform, state);

        write_snapshot(out_path, fixed);

        auto [h1, h2] = holonomy(fixed.A);
        auto [pure, witness] = is_pure_gauge(fixed.A, 1e-8);
        std::ostringstream os;
        os << "coulomb residual = " << detail::num(fix.residual) << "\n";
        os << "harmonic part = (" << detail::num(fix.harmonic_part.first) << ", "
           << detail::num(fix.harmonic_part.second) << ")\n";
        os << "holonomy mod 2pi = (" << detail::num(h1) << ", " << detail::num(h2) << ")\n";
        if (witness.holonomy_defect.first <= 1e-8 && witness.holonomy_defect.second <= 1e-8)
            os << "winding = (" << witness.transform.wind_x << ", " << witness.transform.wind_y
               << ")\n";
        else
            os << "winding = none\n";
        os << "pure gauge = " << (pure ? "yes" : "no") << "\n";
        std::cout << os.str();
        return 0;
    } catch (const BadSnapshot& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

/// `ymh render <in> <out> --field <density|curvature|moment>`: write a P5
/// graymap of the selected field.
inline int cmd_render(const std::string& in_path, const std::string& out_path,
                      const std::string& field) {
    try {
        FlowState state = read_snapshot(in_path);
        GrayImage img = render_field(state, field);
        write_pgm(out_path, img);
        return 0;
    } catch (const BadSnapshot& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace ymh
