#pragma once

#include <cmath>
#include <vector>

#include "ymh/fields.hpp"

namespace ymh {

/// The three quadratic terms of the functional and their sum.
struct EnergyBreakdown {
    double curvature_term = 0;
    double kinetic_term = 0;
    double potential_term = 0;
    double total = 0;
};

/// Covariant derivative of phi: one tangent-vector grid per direction.
struct CovariantDerivative {
    std::vector<Vec3> d1, d2;
    std::vector<Vec3>& comp(int axis) { return axis == 1 ? d1 : d2; }
    const std::vector<Vec3>& comp(int axis) const { return axis == 1 ? d1 : d2; }
};

/// Gradient pair of (half) the discrete energy.
struct TensionPair {
    OneFormGrid tau1;
    std::vector<Vec3> tau2;
};

/// Abelian field strength F = d1 A2 - d2 A1 (forward differences).
inline ScalarGrid curvature(const GaugeField& A) {
    ScalarGrid f1 = forward_diff(A.comp(2), 1);
    ScalarGrid f2 = forward_diff(A.comp(1), 2);
    ScalarGrid out(A.spec());
    for (size_t i = 0; i < out.size(); ++i) out.data()[i] = f1.data()[i] - f2.data()[i];
    return out;
}

namespace detail {

/// Per-direction pieces of the covariant difference at one node:
/// transported neighbor T = R(h A) phi(x+e), raw difference G = (T - phi)/h,
/// and its tangent projection D.
struct CovPieces {
    Vec3 T, G, D;
};

inline CovPieces cov_at(const FiberModel& m, const GridSpec& g, const GaugeField& A,
                        const SectionField& phi, int axis, int ix, int iy) {
    const int nx = axis == 1 ? g.wrap(ix + 1) : ix;
    const int ny = axis == 2 ? g.wrap(iy + 1) : iy;
    CovPieces out;
    out.T = rotate_action(phi(nx, ny), g.spacing * A.comp(axis)(ix, iy));
    const double inv_h = 1.0 / g.spacing;
    out.G = (out.T - phi(ix, iy)) * inv_h;
    out.D = tangent_project(m, phi(ix, iy), out.G);
    return out;
}

} // namespace detail

/// Gauge-transported covariant difference, projected to the tangent space at
/// the base node. Transporting the neighbor with the link phase keeps |D phi|
/// exactly invariant under gauge transformations.
inline CovariantDerivative covariant_derivative(const GaugeField& A, const SectionField& phi) {
    require_same_spec(A.spec(), phi.spec(), "covariant_derivative");
    const GridSpec& g = phi.spec();
    const FiberModel& m = phi.model();
    const int n = g.n;
    CovariantDerivative out;
    out.d1.resize(static_cast<size_t>(g.size()));
    out.d2.resize(static_cast<size_t>(g.size()));
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            out.d1[static_cast<size_t>(g.idx(ix, iy))] = detail::cov_at(m, g, A, phi, 1, ix, iy).D;
            out.d2[static_cast<size_t>(g.idx(ix, iy))] = detail::cov_at(m, g, A, phi, 2, ix, iy).D;
        }
    return out;
}

/// Pointwise energy density F^2 + |D phi|^2 + (mu(phi) - c)^2.
inline ScalarGrid density_field(const FlowState& state) {
    const GridSpec& g = state.spec();
    const FiberModel& m = state.model();
    const int n = g.n;
    ScalarGrid F = curvature(state.A);
    ScalarGrid out(g);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const Vec3 d1 = detail::cov_at(m, g, state.A, state.phi, 1, ix, iy).D;
            const Vec3 d2 = detail::cov_at(m, g, state.A, state.phi, 2, ix, iy).D;
            const double dmu = moment(m, state.phi(ix, iy)) - m.central_element;
            out(ix, iy) = F(ix, iy) * F(ix, iy) + dot(d1, d1) + dot(d2, d2) + dmu * dmu;
        }
    return out;
}

/// Total energy, split into its three terms. The total is stored as the exact
/// sum of the terms.
inline EnergyBreakdown energy(const FlowState& state) {
    const GridSpec& g = state.spec();
    const FiberModel& m = state.model();
    const int n = g.n;
    ScalarGrid F = curvature(state.A);
    double ec = 0, ek = 0, ep = 0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const Vec3 d1 = detail::cov_at(m, g, state.A, state.phi, 1, ix, iy).D;
            const Vec3 d2 = detail::cov_at(m, g, state.A, state.phi, 2, ix, iy).D;
            const double dmu = moment(m, state.phi(ix, iy)) - m.central_element;
            ec += F(ix, iy) * F(ix, iy);
            ek += dot(d1, d1) + dot(d2, d2);
            ep += dmu * dmu;
        }
    const double w = g.cell_area();
    EnergyBreakdown out;
    out.curvature_term = w * ec;
    out.kinetic_term = w * ek;
    out.potential_term = w * ep;
    out.total = out.curvature_term + out.kinetic_term + out.potential_term;
    return out;
}

/// Energy inside the periodic ball of the given radius around a grid node.
inline double local_energy(const FlowState& state, int cx, int cy, double radius) {
    const GridSpec& g = state.spec();
    if (!(radius > 0.0) || radius > 0.5 * g.length)
        throw BadRadius("local_energy: radius must lie in (0, L/2]");
    ScalarGrid e = density_field(state);
    const int n = g.n;
    double acc = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            if (g.node_distance(ix, iy, cx, cy) <= radius + 1e-12) acc += e(ix, iy);
    return acc * g.cell_area();
}

/// Exact gradient of half the discrete energy with respect to (A, phi) under
/// the h^2-weighted inner products; tau2 is tangent at every node.
inline TensionPair tension(const FlowState& state) {
    const GridSpec& g = state.spec();
    const FiberModel& m = state.model();
    const int n = g.n;
    const double h = g.spacing;
    const double inv_h = 1.0 / h;
    const bool sphere = m.kind == FiberKind::Sphere;
    const size_t cells = static_cast<size_t>(g.size());

    // per node and direction: D phi, the link phase (cos, sin), the pairing
    // <D phi, X(T)>, and <G, phi>; flat row-major indexing throughout.
    // scratch is reused across calls, which matters in the step loop
    struct Scratch {
        std::vector<Vec3> D1, D2;
        std::vector<double> lc1, ls1, lc2, ls2, pair1, pair2, gphi1, gphi2, F, b1, b2;
    };
    static thread_local Scratch sc;
    sc.D1.resize(cells);
    sc.D2.resize(cells);
    for (auto* v : {&sc.lc1, &sc.ls1, &sc.lc2, &sc.ls2, &sc.pair1, &sc.pair2, &sc.gphi1,
                    &sc.gphi2, &sc.F, &sc.b1, &sc.b2})
        v->resize(cells);
    std::vector<Vec3>&D1 = sc.D1, &D2 = sc.D2;
    std::vector<double>&lc1 = sc.lc1, &ls1 = sc.ls1, &lc2 = sc.lc2, &ls2 = sc.ls2,
                       &pair1 = sc.pair1, &pair2 = sc.pair2, &gphi1 = sc.gphi1, &gphi2 = sc.gphi2;

    const Vec3* P = state.phi.points().data();
    const double* A1 = state.A.comp(1).data();
    const double* A2 = state.A.comp(2).data();

    for (size_t i = 0; i < cells; ++i) {
        lc1[i] = std::cos(h * A1[i]);
        ls1[i] = std::sin(h * A1[i]);
        lc2[i] = std::cos(h * A2[i]);
        ls2[i] = std::sin(h * A2[i]);
    }

    for (int axis = 1; axis <= 2; ++axis) {
        const double* lc = axis == 1 ? lc1.data() : lc2.data();
        const double* ls = axis == 1 ? ls1.data() : ls2.data();
        Vec3* D = axis == 1 ? D1.data() : D2.data();
        double* pr = axis == 1 ? pair1.data() : pair2.data();
        double* gp = axis == 1 ? gphi1.data() : gphi2.data();
        for (int iy = 0; iy < n; ++iy) {
            const size_t row = static_cast<size_t>(iy) * n;
            const size_t rown = axis == 1 ? row : static_cast<size_t>((iy + 1) % n) * n;
            for (int ix = 0; ix < n; ++ix) {
                const size_t i = row + ix;
                const size_t ie = axis == 1 ? row + (ix + 1 == n ? 0 : ix + 1) : rown + ix;
                const Vec3 p = P[i];
                const Vec3 nb = P[ie];
                const double c = lc[i], s = ls[i];
                const double Tx = c * nb.x - s * nb.y;
                const double Ty = s * nb.x + c * nb.y;
                const double Gx = (Tx - p.x) * inv_h;
                const double Gy = (Ty - p.y) * inv_h;
                const double Gz = (nb.z - p.z) * inv_h;
                double Dx, Dy, Dz;
                if (sphere) {
                    const double g_ = Gx * p.x + Gy * p.y + Gz * p.z;
                    gp[i] = g_;
                    Dx = Gx - g_ * p.x;
                    Dy = Gy - g_ * p.y;
                    Dz = Gz - g_ * p.z;
                } else {
                    Dx = Gx;
                    Dy = Gy;
                    Dz = 0.0;
                }
                D[i] = Vec3{Dx, Dy, Dz};
                pr[i] = Dy * Tx - Dx * Ty; // <D, X(T)>
            }
        }
    }

    // field strength and its backward adjoints, into scratch
    for (int iy = 0; iy < n; ++iy) {
        const size_t row = static_cast<size_t>(iy) * n;
        const size_t rowp = static_cast<size_t>((iy + 1) % n) * n;
        for (int ix = 0; ix < n; ++ix) {
            const size_t ie1 = row + (ix + 1 == n ? 0 : ix + 1);
            sc.F[row + ix] = (A2[ie1] - A2[row + ix] - A1[rowp + ix] + A1[row + ix]) * inv_h;
        }
    }
    for (int iy = 0; iy < n; ++iy) {
        const size_t row = static_cast<size_t>(iy) * n;
        const size_t rowm = static_cast<size_t>((iy + n - 1) % n) * n;
        for (int ix = 0; ix < n; ++ix) {
            const size_t i = row + ix;
            const size_t im1 = row + (ix == 0 ? n - 1 : ix - 1);
            sc.b1[i] = (sc.F[i] - sc.F[im1]) * inv_h;
            sc.b2[i] = (sc.F[i] - sc.F[rowm + ix]) * inv_h;
        }
    }

    TensionPair out;
    out.tau1 = OneFormGrid(g);
    out.tau2.assign(cells, Vec3{});
    double* t11 = out.tau1.comp1.data();
    double* t12 = out.tau1.comp2.data();
    const double* b1 = sc.b1.data();
    const double* b2 = sc.b2.data();

    for (int iy = 0; iy < n; ++iy) {
        const size_t row = static_cast<size_t>(iy) * n;
        const size_t rowm = static_cast<size_t>((iy + n - 1) % n) * n;
        for (int ix = 0; ix < n; ++ix) {
            const size_t i = row + ix;
            const size_t im1 = row + (ix == 0 ? n - 1 : ix - 1);
            const size_t im2 = rowm + ix;
            t11[i] = b2[i] + pair1[i];
            t12[i] = -b1[i] + pair2[i];

            // covariant divergence of D phi plus the potential force; the
            // back-rotation by -h A at the neighbor reuses its link phase
            Vec3 acc{};
            {
                const double c = lc1[im1], s = ls1[im1];
                const Vec3& Dm = D1[im1];
                acc.x += (c * Dm.x + s * Dm.y - D1[i].x) * inv_h;
                acc.y += (-s * Dm.x + c * Dm.y - D1[i].y) * inv_h;
                acc.z += (Dm.z - D1[i].z) * inv_h;
            }
            {
                const double c = lc2[im2], s = ls2[im2];
                const Vec3& Dm = D2[im2];
                acc.x += (c * Dm.x + s * Dm.y - D2[i].x) * inv_h;
                acc.y += (-s * Dm.x + c * Dm.y - D2[i].y) * inv_h;
                acc.z += (Dm.z - D2[i].z) * inv_h;
            }
            const Vec3 p = P[i];
            if (sphere) {
                acc -= gphi1[i] * D1[i] + gphi2[i] * D2[i];
                const double dmu = p.z - m.central_element;
                // potential force (mu - c) * grad(mu), with grad(mu) = P_tan e3
                acc.x -= dmu * p.z * p.x;
                acc.y -= dmu * p.z * p.y;
                acc.z += dmu * (1.0 - p.z * p.z);
                const double r = acc.x * p.x + acc.y * p.y + acc.z * p.z;
                out.tau2[i] = Vec3{acc.x - r * p.x, acc.y - r * p.y, acc.z - r * p.z};
            } else {
                const double dmu = 0.5 * (p.x * p.x + p.y * p.y) - m.central_element;
                acc.x += dmu * p.x;
                acc.y += dmu * p.y;
                acc.z = 0.0;
                out.tau2[i] = acc;
            }
        }
    }
    return out;
}

inline double norm_l2(const std::vector<Vec3>& v, const GridSpec& g) {
    double acc = 0.0;
    for (const Vec3& q : v) acc += dot(q, q);
    return std::sqrt(acc * g.cell_area());
}

/// h^2-weighted norms of the two tension components.
inline std::pair<double, double> tension_norms(const TensionPair& t) {
    const GridSpec& g = t.tau1.spec();
    return {norm_l2(t.tau1), norm_l2(t.tau2, g)};
}

} // namespace ymh
