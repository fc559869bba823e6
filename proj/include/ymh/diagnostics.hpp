#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ymh/energy.hpp"
#include "ymh/flow.hpp"

namespace ymh {

inline constexpr double kPi = 3.14159265358979323846;

/// Knobs of the concentration detector and the bubble accounting.
struct MonitorConfig {
    double epsilon0 = 1.0;            ///< concentration threshold
    std::vector<double> ball_radii;   ///< ascending; all in (0, L/2]
    double alpha_m = 8.0 * kPi;       ///< bubble energy quantum for the sphere fiber
    int check_every = 10;             ///< monitor cadence in accepted steps

    void validate(const GridSpec& g) const {
        if (!(epsilon0 > 0.0)) throw ConfigError("monitors: epsilon0 must be positive");
        if (ball_radii.empty()) throw ConfigError("monitors: ball_radii must not be empty");
        for (double r : ball_radii)
            if (!(r > 0.0) || r > 0.5 * g.length)
                throw ConfigError("monitors: ball radii must lie in (0, L/2]");
        if (!std::is_sorted(ball_radii.begin(), ball_radii.end()))
            throw ConfigError("monitors: ball_radii must be ascending");
        if (check_every < 1) throw ConfigError("monitors: check_every must be >= 1");
    }
};

/// A detected loss-of-regularity event: where and when energy concentrated and
/// how much was shed across the episode.
struct SingularEvent {
    double time = 0;
    int ix = 0, iy = 0;
    double scale = 0;
    double energy_before = 0;
    double energy_after = 0;

    double bubble_energy() const { return energy_before - energy_after; }
    double quanta(double alpha_m) const { return bubble_energy() / alpha_m; }
};

/// One line of the diagnostics time series.
struct TimeSeriesRow {
    double time = 0;
    double total_energy = 0;
    double curvature_term = 0;
    double kinetic_term = 0;
    double potential_term = 0;
    double max_density = 0;
    double tension_norm1 = 0;
    double tension_norm2 = 0;
    double dissipation_rate = 0; ///< 2 (|tau1|^2 + |tau2|^2)
    double bochner_ratio = 0;
};

// ---------------------------------------------------------------------------
// dissipation

struct DissipationReport {
    bool monotone = true;
    double worst_increase = 0;             ///< largest energy increase over tolerance scale
    std::vector<double> step_defects;      ///< |dE + 2 dt (|dA/dt|^2 + |dphi/dt|^2)| per step
    std::vector<double> relative_defects;  ///< defect / (2 dt rate)
    double total_defect = 0;
};

/// Check monotone energy decay along consecutive accepted states and report
/// the defect of the first-order identity dE = -2 dt (|dA/dt|^2 + |dphi/dt|^2).
/// Throws MonotonicityViolation when the energy increases beyond tolerance.
inline DissipationReport check_dissipation(const std::vector<FlowState>& history) {
    if (history.size() < 2) throw Error("check_dissipation: need at least two states");
    DissipationReport rep;
    const GridSpec& g = history.front().spec();
    const double w = g.cell_area();
    const double scale = std::max(1.0, energy(history.front()).total);
    for (size_t k = 0; k + 1 < history.size(); ++k) {
        const FlowState& a = history[k];
        const FlowState& b = history[k + 1];
        const double dt = b.time - a.time;
        if (!(dt > 0)) throw Error("check_dissipation: states must be time-ordered");
        const double e0 = energy(a).total, e1 = energy(b).total;
        if (e1 > e0 + 1e-10 * scale) {
            rep.monotone = false;
            rep.worst_increase = std::max(rep.worst_increase, e1 - e0);
        }
        double rate = 0.0;
        for (size_t i = 0; i < a.phi.points().size(); ++i) {
            const Vec3 dphi = (b.phi.points()[i] - a.phi.points()[i]) * (1.0 / dt);
            rate += dot(dphi, dphi);
        }
        for (size_t i = 0; i < a.A.comp(1).size(); ++i) {
            const double d1 = (b.A.comp(1).data()[i] - a.A.comp(1).data()[i]) / dt;
            const double d2 = (b.A.comp(2).data()[i] - a.A.comp(2).data()[i]) / dt;
            rate += d1 * d1 + d2 * d2;
        }
        rate *= w;
        const double defect = std::abs((e1 - e0) + 2.0 * dt * rate);
        rep.step_defects.push_back(defect);
        rep.relative_defects.push_back(defect / std::max(2.0 * dt * rate, 1e-300));
        rep.total_defect += defect;
    }
    if (!rep.monotone)
        throw MonotonicityViolation("check_dissipation: energy increased along accepted steps");
    return rep;
}

// ---------------------------------------------------------------------------
// concentration detector

struct Concentration {
    int ix = 0, iy = 0;
    double radius = 0;
    double mass = 0;
};

namespace detail {

/// Mass field of the regularity criterion: h^2 (|F| + |D phi|^2) per cell.
inline ScalarGrid concentration_mass(const FlowState& s) {
    const GridSpec& g = s.spec();
    ScalarGrid F = curvature(s.A);
    CovariantDerivative D = covariant_derivative(s.A, s.phi);
    ScalarGrid m(g);
    const double w = g.cell_area();
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
            const size_t i = static_cast<size_t>(g.idx(ix, iy));
            m(ix, iy) = w * (std::abs(F(ix, iy)) + dot(D.d1[i], D.d1[i]) + dot(D.d2[i], D.d2[i]));
        }
    return m;
}

/// Circular correlation of the mass field with the periodic-ball indicator,
/// evaluated for every center at once via the cached FFT plans.
inline ScalarGrid ball_sums(const ScalarGrid& mass, double radius) {
    const GridSpec& g = mass.spec();
    const int n = g.n;
    ScalarGrid ind(g);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            ind(ix, iy) = g.node_distance(0, 0, ix, iy) <= radius + 1e-12 ? 1.0 : 0.0;

    std::lock_guard<std::mutex> lock(Fft2D::mutex());
    Fft2D& fft = Fft2D::for_size(n);
    std::vector<std::complex<double>> mh, ih;
    fft.forward(mass.data(), mh);
    fft.forward(ind.data(), ih);
    for (size_t i = 0; i < mh.size(); ++i) mh[i] *= ih[i];
    ScalarGrid out(g);
    fft.inverse(mh, out.data());
    return out;
}

inline Concentration max_ball(const ScalarGrid& sums, double radius) {
    Concentration c;
    c.radius = radius;
    const int n = sums.n();
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            if (sums(ix, iy) > c.mass) {
                c.mass = sums(ix, iy);
                c.ix = ix;
                c.iy = iy;
            }
    return c;
}

} // namespace detail

/// Scan the configured radii (ascending) and return the first ball holding at
/// least epsilon0 of |F| + |D phi|^2 mass; none when every ball is below.
inline std::optional<Concentration> detect_concentration(const FlowState& state,
                                                         const MonitorConfig& cfg) {
    ScalarGrid m = detail::concentration_mass(state);
    for (double r : cfg.ball_radii) {
        Concentration c = detail::max_ball(detail::ball_sums(m, r), r);
        if (c.mass >= cfg.epsilon0) return c;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// local energy inequality

/// Smallest constant C for which
///   E(t, B_R(x)) <= E(0, B_2R(x)) + C t E(0) / R^2
/// holds at every sampled center and radius between the two states (radii
/// must satisfy 2R <= L/2). Smooth flows keep this bounded; the caller
/// asserts a bound over its fixture family.
inline double local_energy_constant(const FlowState& initial, const FlowState& state,
                                    const std::vector<double>& radii) {
    const double t = state.time - initial.time;
    if (!(t > 0)) throw Error("local_energy_constant: states must be time-ordered");
    const GridSpec& g = state.spec();
    const double e0_total = energy(initial).total;
    if (e0_total <= 0) return 0.0;

    ScalarGrid d0 = density_field(initial), dt_ = density_field(state);
    const double w = g.cell_area();
    for (size_t i = 0; i < d0.size(); ++i) {
        d0.data()[i] *= w;
        dt_.data()[i] *= w;
    }
    double worst = 0.0;
    for (double r : radii) {
        if (!(r > 0.0) || 2.0 * r > 0.5 * g.length)
            throw BadRadius("local_energy_constant: need 0 < 2R <= L/2");
        ScalarGrid now = detail::ball_sums(dt_, r);
        ScalarGrid then = detail::ball_sums(d0, 2.0 * r);
        for (size_t i = 0; i < now.size(); ++i) {
            const double c_req = (now.data()[i] - then.data()[i]) * r * r / (t * e0_total);
            worst = std::max(worst, c_req);
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Bochner ratio

struct BochnerReport {
    ScalarGrid ratio;   ///< per-node (d_t - lap) e1 / ((1 + |F| + |Dphi|^2) e1)
    double max_ratio = 0;
};

namespace detail {
inline ScalarGrid e_hat(const FlowState& s) {
    const GridSpec& g = s.spec();
    ScalarGrid F = curvature(s.A);
    CovariantDerivative D = covariant_derivative(s.A, s.phi);
    ScalarGrid out(g);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
            const size_t i = static_cast<size_t>(g.idx(ix, iy));
            out(ix, iy) = std::sqrt(1.0 + F(ix, iy) * F(ix, iy)) + dot(D.d1[i], D.d1[i]) + dot(D.d2[i], D.d2[i]);
        }
    return out;
}
} // namespace detail

/// Parabolic operator applied to e1 = sqrt(1 + F^2) + |D phi|^2 between two
/// consecutive states, normalized by (1 + |F| + |D phi|^2) e1. The maximum is
/// an observed constant; it is logged, never asserted pointwise.
inline BochnerReport bochner_ratio(const FlowState& state, const FlowState& prev) {
    const double dt = state.time - prev.time;
    if (!(dt > 0)) throw Error("bochner_ratio: states must be time-ordered");
    const GridSpec& g = state.spec();
    ScalarGrid e_now = detail::e_hat(state);
    ScalarGrid e_prev = detail::e_hat(prev);
    ScalarGrid lap = discrete_laplacian(e_now);
    ScalarGrid F = curvature(state.A);
    CovariantDerivative D = covariant_derivative(state.A, state.phi);

    BochnerReport rep;
    rep.ratio = ScalarGrid(g);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
            const size_t i = static_cast<size_t>(g.idx(ix, iy));
            const double lhs = (e_now(ix, iy) - e_prev(ix, iy)) / dt - lap(ix, iy);
            const double den = (1.0 + std::abs(F(ix, iy)) + dot(D.d1[i], D.d1[i]) + dot(D.d2[i], D.d2[i])) * e_now(ix, iy);
            rep.ratio(ix, iy) = lhs / den;
            rep.max_ratio = std::max(rep.max_ratio, rep.ratio(ix, iy));
        }
    return rep;
}

// ---------------------------------------------------------------------------
// bubble fixture

namespace detail {

/// Radial profile of the degree-1 bubble: polar angle from the far (north)
/// pole as a function of s = r/lambda. Inside s <= 1 this is the exact
/// inverse-stereographic profile pi - 2 atan(s); on [1, 8] the profile follows
/// the reparametrization that minimizes the Dirichlet excess while reaching
/// the pole exactly at s = 8; beyond it is identically the pole.
inline double bubble_polar_angle(double s) {
    constexpr double s_cap = 1.0, s_end = 8.0;
    if (s <= 0.0) return kPi;
    if (s <= s_cap) return kPi - 2.0 * std::atan(s);
    if (s >= s_end) return 0.0;
    const double u = std::log(s);
    const double u2 = std::log(s_end);
    const double c1 = 1.0 - (s_cap * s_cap) / (s_end * s_end);
    const double grow = std::log(c1 / (1.0 - std::exp(2.0 * (u - u2))));
    return 2.0 * std::atan(std::exp(-(u + grow)));
}

} // namespace detail

/// Degree-1 bubble of concentration scale lambda centered at a node, on the
/// sphere fiber with A = 0. Kinetic energy is 8*pi up to the cap correction
/// (about +3%) and the lattice sampling error.
inline FlowState make_bubble_fixture(const GridSpec& spec, double lambda, int cx, int cy,
                                     double central_element = 1.0) {
    if (lambda < 4.0 * spec.spacing || lambda > spec.length / 32.0)
        throw BadScale("make_bubble_fixture: lambda must lie in [4h, L/32]");
    FiberModel model = FiberModel::sphere(central_element);
    SectionField phi(spec, model, Vec3{0, 0, 1});
    const int n = spec.n;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            double dx = spec.spacing * (ix - cx), dy = spec.spacing * (iy - cy);
            dx -= spec.length * std::round(dx / spec.length);
            dy -= spec.length * std::round(dy / spec.length);
            const double r = std::hypot(dx, dy);
            const double th = detail::bubble_polar_angle(r / lambda);
            if (th == 0.0) continue;
            const double psi = std::atan2(dy, dx);
            phi(ix, iy) = Vec3{std::sin(th) * std::cos(psi), std::sin(th) * std::sin(psi), std::cos(th)};
        }
    return FlowState{GaugeField(spec), std::move(phi), 0.0};
}

/// Two disjoint copies of the bubble at half-torus separation.
inline FlowState make_two_bubble_fixture(const GridSpec& spec, double lambda,
                                         double central_element = 1.0) {
    FlowState a = make_bubble_fixture(spec, lambda, spec.n / 4, spec.n / 2, central_element);
    FlowState b = make_bubble_fixture(spec, lambda, 3 * spec.n / 4, spec.n / 2, central_element);
    for (int iy = 0; iy < spec.n; ++iy)
        for (int ix = 0; ix < spec.n; ++ix) {
            // the copies have disjoint supports; splice the second into the first
            const Vec3& q = b.phi(ix, iy);
            if (q.z < 1.0) a.phi(ix, iy) = q;
        }
    return a;
}

// ---------------------------------------------------------------------------
// bubble-energy accounting

struct AccountReport {
    struct Row {
        SingularEvent event;
        int quanta = 0;
        double quantization_defect = 0; ///< |bubble - n alpha| / alpha
    };
    std::vector<Row> rows;
    double initial_energy = 0;
    double final_energy = 0;
    double dissipated = 0;      ///< 2 sum dt (|tau1|^2 + |tau2|^2) outside episodes
    double total_bubble = 0;
    double accounting_defect = 0; ///< E(0) - dissipated - bubbles - E(end)
    int total_quanta = 0;
};

/// Energy bookkeeping across a completed run: per-event quantization against
/// alpha(M) and the global identity E(0) = dissipated + bubbles + E(end).
inline AccountReport bubble_account(const std::vector<SingularEvent>& events,
                                    double initial_energy, double final_energy,
                                    double dissipated_outside_episodes, double alpha_m) {
    AccountReport rep;
    rep.initial_energy = initial_energy;
    rep.final_energy = final_energy;
    rep.dissipated = dissipated_outside_episodes;
    for (const SingularEvent& ev : events) {
        AccountReport::Row row;
        row.event = ev;
        row.quanta = int(std::lround(ev.bubble_energy() / alpha_m));
        row.quantization_defect = std::abs(ev.bubble_energy() - row.quanta * alpha_m) / alpha_m;
        rep.total_bubble += ev.bubble_energy();
        rep.total_quanta += row.quanta;
        rep.rows.push_back(row);
    }
    rep.accounting_defect = initial_energy - dissipated_outside_episodes - rep.total_bubble - final_energy;
    return rep;
}

} // namespace ymh
