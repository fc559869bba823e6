#pragma once

#include <cmath>
#include <string>

#include "ymh/errors.hpp"

namespace ymh {

/// Ambient 3-vector. Plane-model points use the first two components with z kept at 0.
struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

enum class FiberKind { Sphere, Plane };

/// The fiber (M, omega) with its circle action: the unit sphere with rotation
/// about the third axis, or the flat plane with rotation about the origin.
struct FiberModel {
    FiberKind kind = FiberKind::Sphere;
    double central_element = 1.0;

    static FiberModel sphere(double c = 1.0) { return {FiberKind::Sphere, c}; }
    static FiberModel plane(double c = 0.5) { return {FiberKind::Plane, c}; }

    int ambient_dim() const { return kind == FiberKind::Sphere ? 3 : 2; }

    bool operator==(const FiberModel& o) const {
        return kind == o.kind && central_element == o.central_element;
    }
    bool operator!=(const FiberModel& o) const { return !(*this == o); }
};

/// Enforce the fiber constraint. Sphere: radial projection to |p| = 1; plane: identity.
inline Vec3 project(const FiberModel& m, const Vec3& p) {
    if (m.kind == FiberKind::Plane) return {p.x, p.y, 0.0};
    const double r = norm(p);
    if (r < 1e-8) throw DegeneratePoint("project: point too close to the origin");
    return p * (1.0 / r);
}

/// Project an ambient vector onto the tangent space at p.
inline Vec3 tangent_project(const FiberModel& m, const Vec3& p, const Vec3& v) {
    if (m.kind == FiberKind::Plane) return {v.x, v.y, 0.0};
    return v - dot(v, p) * p;
}

/// Generator of the circle action: (-p2, p1, 0) for both models.
inline Vec3 action_field(const Vec3& p) { return {-p.y, p.x, 0.0}; }

/// Moment map. Sphere: height p3; plane: |p|^2 / 2.
inline double moment(const FiberModel& m, const Vec3& p) {
    if (m.kind == FiberKind::Sphere) return p.z;
    return 0.5 * (p.x * p.x + p.y * p.y);
}

/// Riemannian gradient of the moment map.
inline Vec3 moment_gradient(const FiberModel& m, const Vec3& p) {
    if (m.kind == FiberKind::Sphere) return tangent_project(m, p, Vec3{0, 0, 1});
    return {p.x, p.y, 0.0};
}

/// Flow of the action field for time alpha: rotate (p1,p2) by alpha.
inline Vec3 rotate_action(const Vec3& p, double alpha) {
    const double c = std::cos(alpha), s = std::sin(alpha);
    return {c * p.x - s * p.y, s * p.x + c * p.y, p.z};
}

/// Exponential map at p. Sphere: geodesic in the direction of the tangent v;
/// plane: translation.
inline Vec3 exp_map(const FiberModel& m, const Vec3& p, const Vec3& v) {
    if (m.kind == FiberKind::Plane) return {p.x + v.x, p.y + v.y, 0.0};
    const double r = norm(v);
    if (r < 1e-300) return p;
    return std::cos(r) * p + (std::sin(r) / r) * v;
}

/// Area form evaluated on two tangent vectors at p, oriented so that
/// d(moment) = omega(action_field, .) holds for both models.
inline double symplectic_form(const FiberModel& m, const Vec3& p, const Vec3& u, const Vec3& v) {
    if (m.kind == FiberKind::Sphere) return dot(p, cross(u, v));
    return u.y * v.x - u.x * v.y;
}

inline const char* fiber_kind_name(FiberKind k) {
    return k == FiberKind::Sphere ? "sphere" : "plane";
}

inline FiberKind fiber_kind_from_name(const std::string& s) {
    if (s == "sphere") return FiberKind::Sphere;
    if (s == "plane") return FiberKind::Plane;
    throw ConfigError("unknown fiber kind '" + s + "' (expected sphere or plane)");
}

} // namespace ymh
