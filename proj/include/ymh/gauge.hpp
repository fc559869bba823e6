#pragma once

#include <cmath>
#include <utility>

#include "ymh/energy.hpp"
#include "ymh/fields.hpp"

namespace ymh {

/// Result of the Coulomb slice projection A -> A + d theta with div(fixed) = 0.
struct CoulombResult {
    GaugeTransform transform;          ///< the angle that was applied
    GaugeField fixed;                  ///< divergence-free representative
    std::pair<double, double> harmonic_part; ///< mean of each fixed component
    double residual = 0;               ///< ||div(fixed)|| in the h^2-weighted norm
};

/// Coulomb gauge fixing on the torus: solve lap(theta) = -div(A) and shift
/// A by d theta. The harmonic (constant) part carries the holonomy and is
/// reported, never removed; the curvature is untouched since F(d theta) = 0.
inline CoulombResult coulomb_fix(const GaugeField& A) {
    const GridSpec& g = A.spec();
    ScalarGrid div = divergence(A.form);
    // the adjoint-difference divergence telescopes to zero mean on the torus;
    // strip the rounding residue so the solver precondition is met even when
    // the input is already (numerically) in Coulomb gauge
    ScalarGrid rhs(g);
    const double mean = grid_mean(div);
    for (size_t i = 0; i < rhs.size(); ++i) rhs.data()[i] = -(div.data()[i] - mean);
    ScalarGrid theta = solve_periodic_poisson(rhs);

    CoulombResult out;
    out.transform = GaugeTransform(theta, 0, 0);
    out.fixed = A;
    OneFormGrid dtheta = gradient(theta);
    for (size_t i = 0; i < dtheta.comp1.size(); ++i) {
        out.fixed.comp(1).data()[i] += dtheta.comp1.data()[i];
        out.fixed.comp(2).data()[i] += dtheta.comp2.data()[i];
    }
    out.harmonic_part = {grid_mean(out.fixed.comp(1)), grid_mean(out.fixed.comp(2))};
    out.residual = norm_l2(divergence(out.fixed.form));
    return out;
}

/// Witness for (non-)triviality: the winding pair plus the smooth angle such
/// that applying the transform to the zero connection reproduces A when A is
/// pure gauge.
struct PureGaugeWitness {
    GaugeTransform transform;
    double curvature_norm = 0;
    std::pair<double, double> holonomy_defect{0, 0}; ///< distance of holonomy to 0 mod 2 pi
    double reconstruction_residual = 0;              ///< ||d theta + winding part - A||
};

/// A is gauge-trivial iff its curvature vanishes and both holonomies are
/// multiples of 2 pi. The witness carries the winding integers recovered from
/// the raw period integrals.
inline std::pair<bool, PureGaugeWitness> is_pure_gauge(const GaugeField& A, double tol) {
    const GridSpec& g = A.spec();
    const double two_pi = 2.0 * 3.14159265358979323846;
    PureGaugeWitness w;
    w.curvature_norm = norm_l2(curvature(A));

    auto [raw1, raw2] = holonomy_raw(A);
    const int wind_x = int(std::lround(raw1 / two_pi));
    const int wind_y = int(std::lround(raw2 / two_pi));
    w.holonomy_defect = {std::abs(raw1 - wind_x * two_pi), std::abs(raw2 - wind_y * two_pi)};

    // remove the winding part, then integrate the remainder through the
    // Poisson solve: lap(theta) = div(A - winding) recovers theta with
    // d theta = A - winding exactly when A is flat with trivial holonomy
    GaugeField rest = A;
    const double c1 = two_pi * wind_x / g.length;
    const double c2 = two_pi * wind_y / g.length;
    for (size_t i = 0; i < rest.comp(1).size(); ++i) {
        rest.comp(1).data()[i] -= c1;
        rest.comp(2).data()[i] -= c2;
    }
    ScalarGrid div_rest = divergence(rest.form);
    const double mean_rest = grid_mean(div_rest);
    for (size_t i = 0; i < div_rest.size(); ++i) div_rest.data()[i] -= mean_rest;
    ScalarGrid theta = solve_periodic_poisson(div_rest);
    w.transform = GaugeTransform(theta, wind_x, wind_y);

    OneFormGrid dtheta = gradient(theta);
    double res = 0.0;
    for (size_t i = 0; i < dtheta.comp1.size(); ++i) {
        const double r1 = dtheta.comp1.data()[i] - rest.comp(1).data()[i];
        const double r2 = dtheta.comp2.data()[i] - rest.comp(2).data()[i];
        res += r1 * r1 + r2 * r2;
    }
    w.reconstruction_residual = std::sqrt(res * g.cell_area());

    const bool pure = w.curvature_norm <= tol && w.holonomy_defect.first <= tol &&
                      w.holonomy_defect.second <= tol;
    return {pure, w};
}

} // namespace ymh
