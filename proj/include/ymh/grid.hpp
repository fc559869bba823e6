#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "ymh/errors.hpp"

namespace ymh {

/// Periodic N x N lattice on the flat torus [0,L)^2.
///
/// Nodes sit at (ix*h, iy*h) with h = length/n. Scalar data is stored
/// row-major with ix fastest: flat index = iy*n + ix.
struct GridSpec {
    int n = 0;        ///< points per side
    double length = 0; ///< physical side L
    double spacing = 0; ///< h = length/n (derived)

    GridSpec() = default;
    GridSpec(int n_, double length_) : n(n_), length(length_), spacing(length_ / n_) {
        if (n < 8 || n % 2 != 0)
            throw Error("GridSpec: n must be even and at least 8, got " + std::to_string(n));
        if (!(length > 0.0))
            throw Error("GridSpec: length must be positive");
    }

    int size() const { return n * n; }
    int wrap(int i) const { int m = i % n; return m < 0 ? m + n : m; }
    int idx(int ix, int iy) const { return wrap(iy) * n + wrap(ix); }
    double cell_area() const { return spacing * spacing; }

    /// Periodic distance between nodes (ix0,iy0) and (ix1,iy1).
    double node_distance(int ix0, int iy0, int ix1, int iy1) const {
        int dx = std::abs(wrap(ix0 - ix1));
        int dy = std::abs(wrap(iy0 - iy1));
        dx = std::min(dx, n - dx);
        dy = std::min(dy, n - dy);
        return spacing * std::sqrt(double(dx) * dx + double(dy) * dy);
    }

    bool operator==(const GridSpec& o) const { return n == o.n && length == o.length; }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// Scalar function sampled on the grid nodes.
class ScalarGrid {
public:
    ScalarGrid() = default;
    explicit ScalarGrid(const GridSpec& spec, double fill = 0.0)
        : spec_(spec), v_(static_cast<size_t>(spec.size()), fill) {}

    const GridSpec& spec() const { return spec_; }
    int n() const { return spec_.n; }

    double& operator()(int ix, int iy) { return v_[static_cast<size_t>(spec_.idx(ix, iy))]; }
    double operator()(int ix, int iy) const { return v_[static_cast<size_t>(spec_.idx(ix, iy))]; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    size_t size() const { return v_.size(); }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    GridSpec spec_;
    std::vector<double> v_;
};

/// Real-valued 1-form: two component grids (comp1 along x, comp2 along y).
struct OneFormGrid {
    ScalarGrid comp1, comp2;

    OneFormGrid() = default;
    explicit OneFormGrid(const GridSpec& spec) : comp1(spec), comp2(spec) {}

    const GridSpec& spec() const { return comp1.spec(); }
    ScalarGrid& comp(int axis) { return axis == 1 ? comp1 : comp2; }
    const ScalarGrid& comp(int axis) const { return axis == 1 ? comp1 : comp2; }
};

inline void require_same_spec(const GridSpec& a, const GridSpec& b, const char* what) {
    if (a != b) throw ShapeMismatch(std::string(what) + ": grid specs differ");
}

/// Forward difference (f(x+e_axis) - f(x))/h with periodic wraparound.
inline ScalarGrid forward_diff(const ScalarGrid& f, int axis) {
    assert(axis == 1 || axis == 2);
    const GridSpec& s = f.spec();
    const int n = s.n;
    const double inv_h = 1.0 / s.spacing;
    ScalarGrid out(s);
    for (int iy = 0; iy < n; ++iy) {
        const int iyp = (iy + 1) % n;
        for (int ix = 0; ix < n; ++ix) {
            const int ixp = (ix + 1) % n;
            const double fwd = (axis == 1) ? f(ixp, iy) : f(ix, iyp);
            out(ix, iy) = (fwd - f(ix, iy)) * inv_h;
        }
    }
    return out;
}

/// Exact negative adjoint of forward_diff under <u,v> = h^2 sum(u v):
/// <forward_diff(u), v> = -<u, backward_diff_adjoint(v)>. This is the backward
/// difference (f(x) - f(x-e_axis))/h.
inline ScalarGrid backward_diff_adjoint(const ScalarGrid& f, int axis) {
    assert(axis == 1 || axis == 2);
    const GridSpec& s = f.spec();
    const int n = s.n;
    const double inv_h = 1.0 / s.spacing;
    ScalarGrid out(s);
    for (int iy = 0; iy < n; ++iy) {
        const int iym = (iy + n - 1) % n;
        for (int ix = 0; ix < n; ++ix) {
            const int ixm = (ix + n - 1) % n;
            const double bwd = (axis == 1) ? f(ixm, iy) : f(ix, iym);
            out(ix, iy) = (f(ix, iy) - bwd) * inv_h;
        }
    }
    return out;
}

/// Five-point Laplacian, assembled as sum_axis backward_diff_adjoint(forward_diff(f)).
inline ScalarGrid discrete_laplacian(const ScalarGrid& f) {
    const GridSpec& s = f.spec();
    const int n = s.n;
    const double inv_h2 = 1.0 / (s.spacing * s.spacing);
    ScalarGrid out(s);
    for (int iy = 0; iy < n; ++iy) {
        const int iyp = (iy + 1) % n, iym = (iy + n - 1) % n;
        for (int ix = 0; ix < n; ++ix) {
            const int ixp = (ix + 1) % n, ixm = (ix + n - 1) % n;
            out(ix, iy) = (f(ixp, iy) + f(ixm, iy) + f(ix, iyp) + f(ix, iym) - 4.0 * f(ix, iy)) * inv_h2;
        }
    }
    return out;
}

/// h^2-weighted inner product.
inline double inner(const ScalarGrid& u, const ScalarGrid& v) {
    require_same_spec(u.spec(), v.spec(), "inner");
    double acc = 0.0;
    for (size_t i = 0; i < u.size(); ++i) acc += u.data()[i] * v.data()[i];
    return acc * u.spec().cell_area();
}

inline double norm_l2(const ScalarGrid& u) { return std::sqrt(inner(u, u)); }

inline double grid_sum(const ScalarGrid& u) {
    double acc = 0.0;
    for (size_t i = 0; i < u.size(); ++i) acc += u.data()[i];
    return acc;
}

inline double grid_mean(const ScalarGrid& u) { return grid_sum(u) / double(u.size()); }

inline double inner(const OneFormGrid& a, const OneFormGrid& b) {
    return inner(a.comp1, b.comp1) + inner(a.comp2, b.comp2);
}

inline double norm_l2(const OneFormGrid& a) { return std::sqrt(inner(a, a)); }

/// Divergence built from the adjoint differences: sum_axis backward_diff_adjoint(a_axis).
inline ScalarGrid divergence(const OneFormGrid& a) {
    ScalarGrid d1 = backward_diff_adjoint(a.comp1, 1);
    ScalarGrid d2 = backward_diff_adjoint(a.comp2, 2);
    ScalarGrid out(a.spec());
    for (size_t i = 0; i < out.size(); ++i) out.data()[i] = d1.data()[i] + d2.data()[i];
    return out;
}

/// Gradient 1-form (forward_diff per axis).
inline OneFormGrid gradient(const ScalarGrid& f) {
    OneFormGrid out(f.spec());
    out.comp1 = forward_diff(f, 1);
    out.comp2 = forward_diff(f, 2);
    return out;
}

namespace detail {

/// Cached FFTW plans and buffers for one grid size. FFTW planning is not
/// thread-safe, and the buffers are shared, so all use goes through a mutex.
class Fft2D {
public:
    explicit Fft2D(int n) : n_(n), nc_(n / 2 + 1) {
        real_ = fftw_alloc_real(static_cast<size_t>(n_) * n_);
        cplx_ = fftw_alloc_complex(static_cast<size_t>(n_) * nc_);
        fwd_ = fftw_plan_dft_r2c_2d(n_, n_, real_, cplx_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_2d(n_, n_, cplx_, real_, FFTW_ESTIMATE);
    }
    ~Fft2D() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(cplx_);
    }
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    int n() const { return n_; }
    int nc() const { return nc_; }

    /// Forward r2c transform of src into the complex buffer (unnormalized).
    void forward(const double* src, std::vector<std::complex<double>>& out) {
        std::copy(src, src + static_cast<size_t>(n_) * n_, real_);
        fftw_execute(fwd_);
        out.resize(static_cast<size_t>(n_) * nc_);
        for (size_t i = 0; i < out.size(); ++i)
            out[i] = std::complex<double>(cplx_[i][0], cplx_[i][1]);
    }

    /// Inverse c2r transform; divides by n^2 so forward->inverse is the identity.
    void inverse(const std::vector<std::complex<double>>& in, double* dst) {
        for (size_t i = 0; i < in.size(); ++i) {
            cplx_[i][0] = in[i].real();
            cplx_[i][1] = in[i].imag();
        }
        fftw_execute(bwd_);
        const double scale = 1.0 / (double(n_) * double(n_));
        for (size_t i = 0; i < static_cast<size_t>(n_) * n_; ++i) dst[i] = real_[i] * scale;
    }

    static Fft2D& for_size(int n) {
        static std::map<int, std::unique_ptr<Fft2D>> cache;
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, std::make_unique<Fft2D>(n)).first;
        return *it->second;
    }

    static std::mutex& mutex() {
        static std::mutex m;
        return m;
    }

private:
    int n_, nc_;
    double* real_;
    fftw_complex* cplx_;
    fftw_plan fwd_, bwd_;
};

} // namespace detail

/// Solve discrete_laplacian(theta) = rhs on the torus with mean(theta) = 0.
///
/// Uses the exact spectral inverse of the five-point Laplacian, so the residual
/// is at rounding level. Throws NonZeroMean when |mean(rhs)| > 1e-10 * ||rhs||.
inline ScalarGrid solve_periodic_poisson(const ScalarGrid& rhs) {
    const GridSpec& s = rhs.spec();
    const int n = s.n;
    const double nrm = norm_l2(rhs);
    if (std::abs(grid_mean(rhs)) > 1e-10 * std::max(nrm, 1e-300))
        throw NonZeroMean("solve_periodic_poisson: right side has nonzero mean");

    std::lock_guard<std::mutex> lock(detail::Fft2D::mutex());
    detail::Fft2D& fft = detail::Fft2D::for_size(n);
    std::vector<std::complex<double>> spec;
    fft.forward(rhs.data(), spec);

    const int nc = fft.nc();
    const double inv_h2 = 1.0 / (s.spacing * s.spacing);
    const double pi = 3.14159265358979323846;
    for (int ky = 0; ky < n; ++ky) {
        const double sy = std::sin(pi * ky / n);
        for (int kx = 0; kx < nc; ++kx) {
            const size_t i = static_cast<size_t>(ky) * nc + kx;
            if (kx == 0 && ky == 0) {
                spec[i] = 0.0; // mean-zero solution
                continue;
            }
            const double sx = std::sin(pi * kx / n);
            const double lambda = -4.0 * inv_h2 * (sx * sx + sy * sy);
            spec[i] /= lambda;
        }
    }

    ScalarGrid theta(s);
    fft.inverse(spec, theta.data());
    return theta;
}

} // namespace ymh
