#pragma once

// Radial meshes, multi-channel grid functions and the nonuniform
// three-point difference weights shared by every solver.

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "sylab/error.hpp"

namespace sylab {

/// Strictly increasing radial nodes with trapezoid weights in r.
struct RadialMesh {
    std::vector<double> r;
    std::vector<double> weights;
    double epsilon = 0.0;
    double sigma = 0.0;
    int nodes_per_shell = 0;

    std::size_t size() const { return r.size(); }
    double r_min() const { return r.front(); }
    double r_max() const { return r.back(); }
};

using MeshPtr = std::shared_ptr<const RadialMesh>;

namespace detail {

inline void fill_trapezoid(RadialMesh& m) {
    const std::size_t n = m.r.size();
    m.weights.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = m.r[i + 1] - m.r[i];
        m.weights[i] += 0.5 * h;
        m.weights[i + 1] += 0.5 * h;
    }
}

}  // namespace detail

inline MeshPtr mesh_from_nodes(std::vector<double> r) {
    if (r.size() < 3) throw ValidationError("a mesh needs at least 3 nodes");
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        if (!(r[i] < r[i + 1])) throw ValidationError("mesh nodes must be strictly increasing");
    }
    auto m = std::make_shared<RadialMesh>();
    m->r = std::move(r);
    detail::fill_trapezoid(*m);
    return m;
}

inline MeshPtr uniform_mesh(double a, double b, std::size_t n) {
    if (n < 3 || !(a < b)) throw ValidationError("uniform mesh needs a < b and n >= 3");
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = a + (b - a) * double(i) / double(n - 1);
    r.back() = b;
    return mesh_from_nodes(std::move(r));
}

/// Geometric nodes from r_min to sigma (constant ratio, at least
/// `nodes_per_shell` per factor 2), then uniform spacing up to R.
inline MeshPtr graded_mesh(double r_min, double sigma, double R, int nodes_per_shell) {
    if (!(r_min > 0.0 && r_min < sigma && sigma < R)) {
        throw ValidationError("graded mesh needs 0 < r_min < sigma < R");
    }
    if (nodes_per_shell < 8) throw ValidationError("graded mesh needs >= 8 nodes per dyadic shell");
    const double L = std::log2(sigma / r_min);
    const int n_geo = int(std::ceil(L * nodes_per_shell - 1e-9));
    const double ratio = std::exp2(L / n_geo);
    std::vector<double> r;
    r.reserve(n_geo + 64);
    // written from sigma downwards so dyadic radii sigma 2^{-m} are hit exactly
    // whenever L is an integer
    r.push_back(r_min);
    for (int i = 1; i < n_geo; ++i) r.push_back(sigma * std::exp2(-double(n_geo - i) * L / n_geo));
    r.push_back(sigma);
    const double h_target = sigma * (1.0 - 1.0 / ratio);
    const int n_uni = std::max(2, int(std::ceil((R - sigma) / h_target)));
    for (int i = 1; i <= n_uni; ++i) r.push_back(sigma + (R - sigma) * double(i) / n_uni);
    r.back() = R;
    auto m = std::make_shared<RadialMesh>();
    m->r = std::move(r);
    m->sigma = sigma;
    m->nodes_per_shell = nodes_per_shell;
    detail::fill_trapezoid(*m);
    return m;
}

/// Mesh for a gluing run at scale epsilon: r_min = epsilon * r_min_factor.
inline MeshPtr graded_mesh_for(double epsilon, double sigma, double R, int nodes_per_shell = 32,
                               double r_min_factor = 1e-3) {
    auto base = graded_mesh(epsilon * r_min_factor, sigma, R, nodes_per_shell);
    auto m = std::make_shared<RadialMesh>(*base);
    m->epsilon = epsilon;
    return m;
}

/// Values on a mesh; channel j holds the coefficient of the j-th
/// spherical-harmonic eigenvalue (channel 0 for radial data).
struct GridFunction {
    MeshPtr mesh;
    std::vector<std::vector<double>> channels;

    GridFunction() = default;
    GridFunction(MeshPtr m, std::size_t n_channels = 1)
        : mesh(std::move(m)), channels(n_channels, std::vector<double>(mesh->size(), 0.0)) {}
    GridFunction(MeshPtr m, std::vector<double> radial_values) : mesh(std::move(m)) {
        if (radial_values.size() != mesh->size()) throw ValidationError("grid function size mismatch");
        channels.push_back(std::move(radial_values));
    }

    template <class F>
    static GridFunction sample(MeshPtr m, F&& f) {
        GridFunction g(m);
        for (std::size_t i = 0; i < m->size(); ++i) g.channels[0][i] = f(m->r[i]);
        return g;
    }

    std::size_t size() const { return mesh->size(); }
    std::size_t channel_count() const { return channels.size(); }
    std::vector<double>& radial() & { return channels.at(0); }
    const std::vector<double>& radial() const& { return channels.at(0); }
    std::vector<double> radial() && { return std::move(channels.at(0)); }
    double operator[](std::size_t i) const { return channels[0][i]; }

    GridFunction& operator+=(const GridFunction& o) {
        check_compatible(o);
        for (std::size_t j = 0; j < channels.size(); ++j)
            for (std::size_t i = 0; i < size(); ++i) channels[j][i] += o.channels[j][i];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        check_compatible(o);
        for (std::size_t j = 0; j < channels.size(); ++j)
            for (std::size_t i = 0; i < size(); ++i) channels[j][i] -= o.channels[j][i];
        return *this;
    }
    GridFunction& operator*=(double c) {
        for (auto& ch : channels)
            for (auto& v : ch) v *= c;
        return *this;
    }

   private:
    void check_compatible(const GridFunction& o) const {
        if (o.mesh->size() != mesh->size() || o.channels.size() != channels.size()) {
            throw ValidationError("grid functions live on different meshes or channel counts");
        }
    }
};

inline GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
inline GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
inline GridFunction operator*(double c, GridFunction a) { return a *= c; }

/// Three-point weights (w_-, w_0, w_+) for the first and second derivative
/// at the middle of nodes x_{i-1} < x_i < x_{i+1}.
struct Stencil3 {
    std::array<double, 3> d1;
    std::array<double, 3> d2;
};

inline Stencil3 central_stencil(double xm, double x0, double xp) {
    const double hm = x0 - xm, hp = xp - x0, s = hm + hp;
    Stencil3 st;
    st.d1 = {-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s)};
    st.d2 = {2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s)};
    return st;
}

/// Derivative weights at x0 from the nodes x0, x1, x2 (one-sided, second order).
inline std::array<double, 3> one_sided_d1(double x0, double x1, double x2) {
    const double h1 = x1 - x0, h2 = x2 - x0;
    return {-(h1 + h2) / (h1 * h2), h2 / (h1 * (h2 - h1)), -h1 / (h2 * (h2 - h1))};
}

inline std::vector<double> derivative(const RadialMesh& m, const std::vector<double>& v) {
    const std::size_t n = m.size();
    std::vector<double> d(n);
    const auto& r = m.r;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const auto st = central_stencil(r[i - 1], r[i], r[i + 1]);
        d[i] = st.d1[0] * v[i - 1] + st.d1[1] * v[i] + st.d1[2] * v[i + 1];
    }
    auto w0 = one_sided_d1(r[0], r[1], r[2]);
    d[0] = w0[0] * v[0] + w0[1] * v[1] + w0[2] * v[2];
    auto wn = one_sided_d1(r[n - 1], r[n - 2], r[n - 3]);
    d[n - 1] = wn[0] * v[n - 1] + wn[1] * v[n - 2] + wn[2] * v[n - 3];
    return d;
}

/// Second derivative; end values are extrapolated linearly from the interior.
inline std::vector<double> second_derivative(const RadialMesh& m, const std::vector<double>& v) {
    const std::size_t n = m.size();
    std::vector<double> d(n);
    const auto& r = m.r;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const auto st = central_stencil(r[i - 1], r[i], r[i + 1]);
        d[i] = st.d2[0] * v[i - 1] + st.d2[1] * v[i] + st.d2[2] * v[i + 1];
    }
    d[0] = d[1] + (d[1] - d[2]) * (r[0] - r[1]) / (r[1] - r[2]);
    d[n - 1] = d[n - 2] + (d[n - 2] - d[n - 3]) * (r[n - 1] - r[n - 2]) / (r[n - 2] - r[n - 3]);
    return d;
}

}  // namespace sylab
