#pragma once

#include <cmath>
#include <vector>

#include "ymh/fiber.hpp"
#include "ymh/grid.hpp"

namespace ymh {

/// Abelian connection 1-form on the trivial bundle (reference connection zero).
struct GaugeField {
    OneFormGrid form;

    GaugeField() = default;
    explicit GaugeField(const GridSpec& spec) : form(spec) {}

    const GridSpec& spec() const { return form.spec(); }
    ScalarGrid& comp(int axis) { return form.comp(axis); }
    const ScalarGrid& comp(int axis) const { return form.comp(axis); }
};

/// Grid of fiber points.
class SectionField {
public:
    SectionField() = default;
    SectionField(const GridSpec& spec, const FiberModel& model, const Vec3& fill = Vec3{0, 0, 1})
        : spec_(spec), model_(model), p_(static_cast<size_t>(spec.size()), fill) {}

    const GridSpec& spec() const { return spec_; }
    const FiberModel& model() const { return model_; }

    /// Swap the model parameters; the fiber kind must stay the same.
    void set_model(const FiberModel& m) {
        if (m.kind != model_.kind) throw ShapeMismatch("set_model: fiber kind differs");
        model_ = m;
    }

    Vec3& operator()(int ix, int iy) { return p_[static_cast<size_t>(spec_.idx(ix, iy))]; }
    const Vec3& operator()(int ix, int iy) const { return p_[static_cast<size_t>(spec_.idx(ix, iy))]; }

    std::vector<Vec3>& points() { return p_; }
    const std::vector<Vec3>& points() const { return p_; }

    /// Re-apply the fiber constraint at every node.
    void reproject() {
        for (Vec3& q : p_) q = project(model_, q);
    }

    bool all_finite() const {
        for (const Vec3& q : p_)
            if (!std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(q.z)) return false;
        return true;
    }

private:
    GridSpec spec_;
    FiberModel model_;
    std::vector<Vec3> p_;
};

/// Gauge transformation s = exp(i theta). The angle grid stores the smooth
/// periodic branch; transforms that wind around the torus carry the winding as
/// an explicit integer pair, so their derivative is the exact constant 1-form
/// 2*pi*wind/L rather than the difference of a sawtooth.
struct GaugeTransform {
    ScalarGrid angle;
    int wind_x = 0, wind_y = 0;

    GaugeTransform() = default;
    explicit GaugeTransform(const GridSpec& spec) : angle(spec) {}
    GaugeTransform(ScalarGrid a, int wx, int wy) : angle(std::move(a)), wind_x(wx), wind_y(wy) {}

    const GridSpec& spec() const { return angle.spec(); }

    /// Total angle at a node, smooth branch plus winding part.
    double total_angle(int ix, int iy) const {
        const GridSpec& s = angle.spec();
        return angle(ix, iy) + 2.0 * 3.14159265358979323846 * (double(wind_x) * ix + double(wind_y) * iy) / s.n;
    }
};

/// The evolving pair (A, phi) at time t.
struct FlowState {
    GaugeField A;
    SectionField phi;
    double time = 0.0;

    FlowState() = default;
    FlowState(GaugeField a, SectionField p, double t = 0.0)
        : A(std::move(a)), phi(std::move(p)), time(t) {
        require_same_spec(A.spec(), phi.spec(), "FlowState");
    }

    const GridSpec& spec() const { return A.spec(); }
    const FiberModel& model() const { return phi.model(); }
};

/// Gauge action on the pair: A picks up the discrete derivative of the angle
/// (winding part added analytically), and phi rotates by the inverse phase,
/// which is the combination that leaves the discrete energy exactly invariant.
inline FlowState apply_gauge(const GaugeTransform& s, const FlowState& state) {
    require_same_spec(s.spec(), state.spec(), "apply_gauge");
    const GridSpec& g = state.spec();
    const int n = g.n;
    const double two_pi = 2.0 * 3.14159265358979323846;
    const double harm1 = two_pi * s.wind_x / g.length;
    const double harm2 = two_pi * s.wind_y / g.length;

    FlowState out = state;
    ScalarGrid d1 = forward_diff(s.angle, 1);
    ScalarGrid d2 = forward_diff(s.angle, 2);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            out.A.comp(1)(ix, iy) += d1(ix, iy) + harm1;
            out.A.comp(2)(ix, iy) += d2(ix, iy) + harm2;
            const double alpha = s.total_angle(ix, iy);
            out.phi(ix, iy) = project(state.model(), rotate_action(state.phi(ix, iy), -alpha));
        }
    return out;
}

inline GaugeTransform compose_gauge(const GaugeTransform& s1, const GaugeTransform& s2) {
    require_same_spec(s1.spec(), s2.spec(), "compose_gauge");
    GaugeTransform out(s1.spec());
    for (size_t i = 0; i < out.angle.size(); ++i)
        out.angle.data()[i] = s1.angle.data()[i] + s2.angle.data()[i];
    out.wind_x = s1.wind_x + s2.wind_x;
    out.wind_y = s1.wind_y + s2.wind_y;
    return out;
}

/// Reduce an angle to the principal branch (-pi, pi].
inline double wrap_angle(double a) {
    const double two_pi = 2.0 * 3.14159265358979323846;
    double r = std::remainder(a, two_pi);
    if (r <= -3.14159265358979323846) r += two_pi;
    return r;
}

/// Period integrals of A around the two torus generators, averaged over the
/// parallel lines and reduced modulo 2*pi.
inline std::pair<double, double> holonomy(const GaugeField& A) {
    const GridSpec& g = A.spec();
    const int n = g.n;
    double h1 = 0.0, h2 = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        double row = 0.0;
        for (int ix = 0; ix < n; ++ix) row += A.comp(1)(ix, iy);
        h1 += row;
    }
    for (int ix = 0; ix < n; ++ix) {
        double col = 0.0;
        for (int iy = 0; iy < n; ++iy) col += A.comp(2)(ix, iy);
        h2 += col;
    }
    h1 = g.spacing * h1 / n;
    h2 = g.spacing * h2 / n;
    return {wrap_angle(h1), wrap_angle(h2)};
}

/// Raw (unwrapped) period integrals; used to extract winding numbers.
inline std::pair<double, double> holonomy_raw(const GaugeField& A) {
    const GridSpec& g = A.spec();
    const int n = g.n;
    double h1 = 0.0, h2 = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            h1 += A.comp(1)(ix, iy);
            h2 += A.comp(2)(ix, iy);
        }
    return {g.spacing * h1 / n, g.spacing * h2 / n};
}

} // namespace ymh
