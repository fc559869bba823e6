#pragma once

#include <cmath>
#include <random>
#include <string>

#include "ymh/diagnostics.hpp"
#include "ymh/fields.hpp"

namespace ymh {

/// Zero-energy state: A = 0 and phi constant at a zero of the potential
/// (north pole for the sphere, (sqrt(2c), 0) for the plane).
inline FlowState make_ground(const GridSpec& spec, const FiberModel& model) {
    Vec3 p = model.kind == FiberKind::Sphere ? Vec3{0, 0, 1}
                                             : Vec3{std::sqrt(2.0 * model.central_element), 0, 0};
    return FlowState{GaugeField(spec), SectionField(spec, model, p), 0.0};
}

/// Constant south-pole section: an unstable critical point for c = 1.
inline FlowState make_south_pole(const GridSpec& spec, double central_element = 1.0) {
    return FlowState{GaugeField(spec),
                     SectionField(spec, FiberModel::sphere(central_element), Vec3{0, 0, -1}), 0.0};
}

/// Equatorial loop phi(x, y) = (cos 2 pi x / L, sin 2 pi x / L, 0) with A = 0.
inline FlowState make_equator(const GridSpec& spec, double central_element = 1.0) {
    SectionField phi(spec, FiberModel::sphere(central_element));
    for (int iy = 0; iy < spec.n; ++iy)
        for (int ix = 0; ix < spec.n; ++ix) {
            const double a = 2.0 * kPi * ix / spec.n;
            phi(ix, iy) = Vec3{std::cos(a), std::sin(a), 0.0};
        }
    return FlowState{GaugeField(spec), std::move(phi), 0.0};
}

/// Band-limited random perturbation of the ground state. The same seed always
/// produces the same state: modes are drawn in a fixed order and weighted by
/// 1/(1+|k|^2).
inline FlowState make_random_smooth(const GridSpec& spec, const FiberModel& model,
                                    unsigned long long seed, double amplitude, int cutoff) {
    if (cutoff < 1) throw ConfigError("random-smooth: cutoff must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto field = [&](ScalarGrid& f) {
        const int n = spec.n;
        for (int ky = -cutoff; ky <= cutoff; ++ky)
            for (int kx = -cutoff; kx <= cutoff; ++kx) {
                if (kx == 0 && ky == 0) continue;
                const double k2 = double(kx) * kx + double(ky) * ky;
                const double w = amplitude / (1.0 + k2);
                const double a = w * gauss(rng), b = w * gauss(rng);
                for (int iy = 0; iy < n; ++iy)
                    for (int ix = 0; ix < n; ++ix) {
                        const double ph = 2.0 * kPi * (double(kx) * ix + double(ky) * iy) / n;
                        f(ix, iy) += a * std::cos(ph) + b * std::sin(ph);
                    }
            }
    };

    GaugeField A(spec);
    field(A.comp(1));
    field(A.comp(2));
    ScalarGrid xi1(spec), xi2(spec);
    field(xi1);
    field(xi2);

    SectionField phi(spec, model);
    const double base = model.kind == FiberKind::Sphere ? 1.0 : std::sqrt(2.0 * model.central_element);
    for (int iy = 0; iy < spec.n; ++iy)
        for (int ix = 0; ix < spec.n; ++ix) {
            if (model.kind == FiberKind::Sphere)
                phi(ix, iy) = project(model, Vec3{xi1(ix, iy), xi2(ix, iy), 1.0});
            else
                phi(ix, iy) = Vec3{base + xi1(ix, iy), xi2(ix, iy), 0.0};
        }
    return FlowState{std::move(A), std::move(phi), 0.0};
}

/// Plane-fiber state with index +-n zeros at the four half-period points:
/// phi = sqrt(2c) w^n / |w|^(n-1) with w = sin(2 pi x / L) + i sin(2 pi y / L).
inline FlowState make_vortex(const GridSpec& spec, int winding, double central_element = 0.5) {
    if (winding == 0) throw ConfigError("vortex: winding must be nonzero");
    FiberModel model = FiberModel::plane(central_element);
    SectionField phi(spec, model);
    const double base = std::sqrt(2.0 * central_element);
    const int n = std::abs(winding);
    for (int iy = 0; iy < spec.n; ++iy)
        for (int ix = 0; ix < spec.n; ++ix) {
            const double wx = std::sin(2.0 * kPi * ix / spec.n);
            const double wy = std::sin(2.0 * kPi * iy / spec.n);
            const double r = std::hypot(wx, wy);
            if (r < 1e-14) {
                phi(ix, iy) = Vec3{0, 0, 0};
                continue;
            }
            double ang = std::atan2(wy, wx) * n;
            if (winding < 0) ang = -ang;
            phi(ix, iy) = Vec3{base * r * std::cos(ang), base * r * std::sin(ang), 0.0};
        }
    return FlowState{GaugeField(spec), std::move(phi), 0.0};
}

} // namespace ymh
