#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ymh/diagnostics.hpp"
#include "ymh/flow.hpp"
#include "ymh/gauge.hpp"

namespace ymh {

enum class RunStatus { ReachedMaxTime, TensionConverged };

struct RunReport {
    std::vector<TimeSeriesRow> series;
    std::vector<SingularEvent> events;
    FlowState final_state;
    RunStatus status = RunStatus::ReachedMaxTime;
    double initial_energy = 0;
    double final_energy = 0;
    double dissipated_outside_episodes = 0; ///< 2 sum dt |tau|^2 over steps outside episodes
    long accepted_steps = 0;
    long rejected_steps = 0;
};

/// Optional per-row sink, e.g. for streaming CSV output or periodic snapshots.
using RowSink = std::function<void(const TimeSeriesRow&, const FlowState&)>;

namespace detail {

/// Largest ball mass at the widest configured radius. Ball masses grow with
/// the radius, so every radius is clear exactly when the widest one is.
inline double widest_ball_mass(const FlowState& s, const MonitorConfig& cfg) {
    ScalarGrid m = concentration_mass(s);
    return max_ball(ball_sums(m, cfg.ball_radii.back()), cfg.ball_radii.back()).mass;
}

} // namespace detail

/// Integrate the flow to max_time with monitors attached.
///
/// Concentration episodes: when the smallest configured ball traps epsilon0 of
/// |F| + |Dphi|^2 mass an episode opens, freezing the entry energy. It closes
/// once every configured ball is quiet (below epsilon0/2, with the factor two
/// as release hysteresis). An episode whose energy drop reaches alpha_m/2 is
/// recorded as a SingularEvent; the run then applies a Coulomb gauge fix to
/// the connection, resets dt, and continues. Persistent step rejection at the
/// minimal dt while concentration is active is also declared singular.
inline RunReport run(const FlowState& initial, const IntegratorConfig& icfg,
                     const MonitorConfig& mcfg, const RowSink& sink = {}) {
    mcfg.validate(initial.spec());
    if (!icfg.adapt && icfg.dt > parabolic_dt_bound(initial.spec(), icfg.cfl_safety) * (1.0 + 1e-12))
        throw ConfigError("run: fixed dt exceeds the stability bound cfl_safety * h^2 / 4");

    constexpr double kDtMin = 1e-12;
    constexpr int kRejectLimit = 20;

    RunReport rep;
    FlowState s = initial;
    double e_now = energy(s).total;
    if (!std::isfinite(e_now)) throw NonFiniteField("run: initial energy not finite");
    rep.initial_energy = e_now;

    enum class Episode { Idle, Active, Spent };
    Episode episode = Episode::Idle;
    double episode_energy = 0;
    SingularEvent pending;

    double dt = icfg.dt;
    int consecutive_rejects = 0;
    long accepted = 0;
    std::optional<FlowState> prev_monitored;

    auto emit_row = [&](const TensionPair& t) {
        TimeSeriesRow row;
        row.time = s.time;
        EnergyBreakdown eb = energy(s);
        row.total_energy = eb.total;
        row.curvature_term = eb.curvature_term;
        row.kinetic_term = eb.kinetic_term;
        row.potential_term = eb.potential_term;
        ScalarGrid dens = density_field(s);
        for (size_t i = 0; i < dens.size(); ++i) row.max_density = std::max(row.max_density, dens.data()[i]);
        auto [n1, n2] = tension_norms(t);
        row.tension_norm1 = n1;
        row.tension_norm2 = n2;
        row.dissipation_rate = 2.0 * (n1 * n1 + n2 * n2);
        if (prev_monitored) row.bochner_ratio = bochner_ratio(s, *prev_monitored).max_ratio;
        prev_monitored = s;
        rep.series.push_back(row);
        if (sink) sink(row, s);
        return row;
    };

    auto declare_event = [&](double e_after) {
        pending.energy_after = e_after;
        pending.time = s.time;
        rep.events.push_back(pending);
        // regularize the restart connection and resume from the configured dt
        CoulombResult fix = coulomb_fix(s.A);
        s = apply_gauge(fix.transform, s);
        dt = icfg.dt;
    };

    auto monitors = [&]() {
        TensionPair t = tension(s);
        TimeSeriesRow row = emit_row(t);

        if (episode == Episode::Idle) {
            auto c = detect_concentration(s, mcfg);
            if (c && c->radius <= mcfg.ball_radii.front() * (1.0 + 1e-12)) {
                episode = Episode::Active;
                episode_energy = row.total_energy;
                pending = SingularEvent{};
                pending.ix = c->ix;
                pending.iy = c->iy;
                pending.scale = c->radius;
                pending.energy_before = episode_energy;
            }
        } else {
            if (detail::widest_ball_mass(s, mcfg) < 0.5 * mcfg.epsilon0) {
                if (episode == Episode::Active && episode_energy - row.total_energy >= 0.5 * mcfg.alpha_m)
                    declare_event(row.total_energy);
                episode = Episode::Idle;
            }
        }
        return row;
    };

    monitors(); // row at t = 0

    const auto rhs = [](const FlowState& st) { return detail::direct_rhs(st); };
    std::optional<detail::FlowDeriv> k1; // slope at s, reused across adaptive retries

    const double t_end = icfg.max_time;
    while (s.time < t_end - 1e-15 * std::max(1.0, t_end)) {
        const double dt_eff = std::min(dt, t_end - s.time);
        if (!k1) k1 = rhs(s);
        FlowState next = detail::one_step_from(s, *k1, dt_eff, icfg.scheme, rhs);

        double e_next = e_now;
        if (icfg.adapt) {
            // a non-finite trial energy counts as a rejection at this dt
            e_next = energy(next).total;
        } else if (!next.A.comp(1).all_finite() || !next.A.comp(2).all_finite() ||
                   !next.phi.all_finite()) {
            throw NonFiniteField("run: non-finite field during step");
        }

        const double tol = 1e-10 * std::max(1.0, e_now);
        if (icfg.adapt && !(e_next <= e_now + tol)) {
            ++rep.rejected_steps;
            if (dt <= kDtMin * (1.0 + 1e-12)) {
                ++consecutive_rejects;
                if (consecutive_rejects >= kRejectLimit && episode == Episode::Active) {
                    // stiff blow-up path: persistent rejection at the dt floor
                    declare_event(e_now);
                    episode = Episode::Spent;
                    consecutive_rejects = 0;
                    e_now = energy(s).total;
                    k1.reset();
                }
            } else {
                dt = std::max(dt * 0.5, kDtMin);
            }
            continue;
        }

        // accepted
        consecutive_rejects = 0;
        if (episode == Episode::Idle) {
            // dissipation ledger; the slope at the pre-step state is -tau
            double rate = 0.0;
            const double w = s.spec().cell_area();
            for (size_t i = 0; i < k1->dA.comp1.size(); ++i)
                rate += k1->dA.comp1.data()[i] * k1->dA.comp1.data()[i] +
                        k1->dA.comp2.data()[i] * k1->dA.comp2.data()[i];
            for (const Vec3& q : k1->dphi) rate += dot(q, q);
            rep.dissipated_outside_episodes += 2.0 * dt_eff * rate * w;
        }
        s = std::move(next);
        k1.reset();
        e_now = e_next;
        ++accepted;
        ++rep.accepted_steps;
        if (icfg.adapt) dt = std::min(icfg.dt, dt * 2.0);

        if (accepted % mcfg.check_every == 0) {
            TimeSeriesRow row = monitors();
            if (icfg.stop_tension > 0.0 && row.tension_norm1 + row.tension_norm2 < icfg.stop_tension) {
                rep.status = RunStatus::TensionConverged;
                break;
            }
        }
    }

    if (rep.series.empty() || rep.series.back().time != s.time) monitors();
    rep.final_state = s;
    rep.final_energy = energy(s).total;
    return rep;
}

} // namespace ymh
