#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "ymh/energy.hpp"
#include "ymh/fields.hpp"

namespace ymh {

enum class Scheme { ExplicitEuler, RK4 };

struct IntegratorConfig {
    double dt = 1e-4;
    Scheme scheme = Scheme::ExplicitEuler;
    double max_time = 1.0;
    double cfl_safety = 0.9;   ///< in (0,1]; fixed-step runs require dt <= cfl_safety * h^2 / 4
    bool adapt = false;        ///< halve dt when a step would increase the energy
    double stop_tension = 0.0; ///< stop early once |tau1| + |tau2| falls below this (0 = off)
};

/// Stability bound for the explicit schemes on this grid.
inline double parabolic_dt_bound(const GridSpec& g, double cfl_safety) {
    return cfl_safety * g.spacing * g.spacing / 4.0;
}

/// Gauged variables (abar, phibar) together with the accumulated gauge angle.
struct DeTurckState {
    GaugeField abar;
    SectionField phibar;
    ScalarGrid theta;
    double time = 0.0;

    DeTurckState() = default;
    explicit DeTurckState(const FlowState& initial)
        : abar(initial.A), phibar(initial.phi), theta(initial.spec()), time(initial.time) {}

    const GridSpec& spec() const { return abar.spec(); }
};

namespace detail {

/// Time derivative of a flow state, stored component-wise in ambient coordinates.
struct FlowDeriv {
    OneFormGrid dA;
    std::vector<Vec3> dphi;
};

struct DeTurckDeriv {
    OneFormGrid dA;
    std::vector<Vec3> dphi;
    ScalarGrid dtheta;
};

inline FlowDeriv direct_rhs(const FlowState& s) {
    TensionPair t = tension(s);
    FlowDeriv d;
    d.dA = std::move(t.tau1);
    d.dphi = std::move(t.tau2);
    for (size_t i = 0; i < d.dA.comp1.size(); ++i) {
        d.dA.comp1.data()[i] = -d.dA.comp1.data()[i];
        d.dA.comp2.data()[i] = -d.dA.comp2.data()[i];
    }
    for (Vec3& q : d.dphi) q = q * -1.0;
    return d;
}

/// Gauged system: the connection equation gains the gradient of its divergence
/// (which makes the principal part the full vector Laplacian), the section
/// equation gains -div(abar) * X(phibar), and the gauge angle integrates
/// d theta/dt = -div(abar). These are exactly the terms under which
/// apply_gauge(theta) maps solutions onto solutions of the direct flow.
inline DeTurckDeriv deturck_rhs(const DeTurckState& s) {
    FlowState view{s.abar, s.phibar, s.time};
    TensionPair t = tension(view);
    const GridSpec& g = s.spec();

    ScalarGrid div = divergence(s.abar.form);
    OneFormGrid grad_div = gradient(div);

    DeTurckDeriv d;
    d.dA = std::move(t.tau1);
    d.dphi = std::move(t.tau2);
    for (size_t i = 0; i < d.dA.comp1.size(); ++i) {
        d.dA.comp1.data()[i] = -d.dA.comp1.data()[i] + grad_div.comp1.data()[i];
        d.dA.comp2.data()[i] = -d.dA.comp2.data()[i] + grad_div.comp2.data()[i];
    }
    const Vec3* phib = s.phibar.points().data();
    for (size_t i = 0; i < d.dphi.size(); ++i)
        d.dphi[i] = d.dphi[i] * -1.0 - div.data()[i] * action_field(phib[i]);
    d.dtheta = ScalarGrid(g);
    for (size_t i = 0; i < d.dtheta.size(); ++i) d.dtheta.data()[i] = -div.data()[i];
    return d;
}

inline FlowState advance(const FlowState& s, const FlowDeriv& d, double dt) {
    FlowState out = s;
    for (size_t i = 0; i < out.A.comp(1).size(); ++i) {
        out.A.comp(1).data()[i] += dt * d.dA.comp1.data()[i];
        out.A.comp(2).data()[i] += dt * d.dA.comp2.data()[i];
    }
    for (size_t i = 0; i < out.phi.points().size(); ++i)
        out.phi.points()[i] += dt * d.dphi[i];
    out.phi.reproject();
    out.time += dt;
    return out;
}

inline DeTurckState advance(const DeTurckState& s, const DeTurckDeriv& d, double dt) {
    DeTurckState out = s;
    for (size_t i = 0; i < out.abar.comp(1).size(); ++i) {
        out.abar.comp(1).data()[i] += dt * d.dA.comp1.data()[i];
        out.abar.comp(2).data()[i] += dt * d.dA.comp2.data()[i];
        out.theta.data()[i] += dt * d.dtheta.data()[i];
    }
    for (size_t i = 0; i < out.phibar.points().size(); ++i)
        out.phibar.points()[i] += dt * d.dphi[i];
    out.phibar.reproject();
    out.time += dt;
    return out;
}

inline void accumulate(FlowDeriv& acc, const FlowDeriv& d, double w) {
    for (size_t i = 0; i < acc.dA.comp1.size(); ++i) {
        acc.dA.comp1.data()[i] += w * d.dA.comp1.data()[i];
        acc.dA.comp2.data()[i] += w * d.dA.comp2.data()[i];
    }
    for (size_t i = 0; i < acc.dphi.size(); ++i) acc.dphi[i] += w * d.dphi[i];
}

inline void accumulate(DeTurckDeriv& acc, const DeTurckDeriv& d, double w) {
    for (size_t i = 0; i < acc.dA.comp1.size(); ++i) {
        acc.dA.comp1.data()[i] += w * d.dA.comp1.data()[i];
        acc.dA.comp2.data()[i] += w * d.dA.comp2.data()[i];
        acc.dtheta.data()[i] += w * d.dtheta.data()[i];
    }
    for (size_t i = 0; i < acc.dphi.size(); ++i) acc.dphi[i] += w * d.dphi[i];
}

template <typename Deriv>
Deriv scaled(const Deriv& d, double w) {
    Deriv out = d;
    accumulate(out, d, w - 1.0);
    return out;
}

/// Classical RK4 with projected stage states; the stage slopes are combined
/// linearly and the section is projected once, after the combination.
template <typename State, typename Rhs>
State rk4_step(const State& s, double dt, Rhs rhs) {
    auto k1 = rhs(s);
    auto k2 = rhs(advance(s, k1, 0.5 * dt));
    auto k3 = rhs(advance(s, k2, 0.5 * dt));
    auto k4 = rhs(advance(s, k3, dt));
    auto k = scaled(k1, 1.0 / 6.0);
    accumulate(k, k2, 1.0 / 3.0);
    accumulate(k, k3, 1.0 / 3.0);
    accumulate(k, k4, 1.0 / 6.0);
    return advance(s, k, dt);
}

template <typename State, typename Rhs>
State one_step(const State& s, double dt, Scheme scheme, Rhs rhs) {
    if (scheme == Scheme::RK4) return rk4_step(s, dt, rhs);
    return advance(s, rhs(s), dt);
}

/// Same as one_step but with the slope at s already computed (reused across
/// adaptive retries at shrinking dt).
template <typename State, typename Deriv, typename Rhs>
State one_step_from(const State& s, const Deriv& k1, double dt, Scheme scheme, Rhs rhs) {
    if (scheme != Scheme::RK4) return advance(s, k1, dt);
    auto k2 = rhs(advance(s, k1, 0.5 * dt));
    auto k3 = rhs(advance(s, k2, 0.5 * dt));
    auto k4 = rhs(advance(s, k3, dt));
    auto k = scaled(k1, 1.0 / 6.0);
    accumulate(k, k2, 1.0 / 3.0);
    accumulate(k, k3, 1.0 / 3.0);
    accumulate(k, k4, 1.0 / 6.0);
    return advance(s, k, dt);
}

} // namespace detail

/// One accepted step of the direct gradient flow. In adaptive mode the step is
/// retried with a halved dt (up to 20 times) whenever it would increase the
/// energy; StepRejected is thrown when no decreasing step is found.
inline FlowState step_direct(const FlowState& state, const IntegratorConfig& cfg) {
    const double e0 = cfg.adapt ? energy(state).total : 0.0;
    const double tol = 1e-10 * std::max(1.0, e0);
    double dt = cfg.dt;
    for (int attempt = 0; attempt <= 20; ++attempt) {
        FlowState next = detail::one_step(state, dt, cfg.scheme,
                                          [](const FlowState& s) { return detail::direct_rhs(s); });
        if (!cfg.adapt) return next;
        // a non-finite trial energy counts as a rejection, not a failure
        const double e1 = energy(next).total;
        if (std::isfinite(e1) && e1 <= e0 + tol) return next;
        dt *= 0.5;
    }
    throw StepRejected("step_direct: energy increased at every dt down to dt/2^20");
}

/// One accepted step of the gauged (parabolic) system; the gauge angle is
/// advanced with the same scheme. Acceptance is judged on the energy of
/// (abar, phibar), which equals the energy of the reconstructed pair.
inline DeTurckState step_deturck(const DeTurckState& state, const IntegratorConfig& cfg) {
    const double e0 = cfg.adapt ? energy(FlowState{state.abar, state.phibar, state.time}).total : 0.0;
    const double tol = 1e-10 * std::max(1.0, e0);
    double dt = cfg.dt;
    for (int attempt = 0; attempt <= 20; ++attempt) {
        DeTurckState next = detail::one_step(state, dt, cfg.scheme,
                                             [](const DeTurckState& s) { return detail::deturck_rhs(s); });
        if (!cfg.adapt) return next;
        const double e1 = energy(FlowState{next.abar, next.phibar, next.time}).total;
        if (std::isfinite(e1) && e1 <= e0 + tol) return next;
        dt *= 0.5;
    }
    throw StepRejected("step_deturck: energy increased at every dt down to dt/2^20");
}

/// Undo the gauge: (A, phi) = apply_gauge(theta)(abar, phibar).
inline FlowState reconstruct(const DeTurckState& state) {
    GaugeTransform s(state.theta, 0, 0);
    FlowState bar{state.abar, state.phibar, state.time};
    return apply_gauge(s, bar);
}

} // namespace ymh
