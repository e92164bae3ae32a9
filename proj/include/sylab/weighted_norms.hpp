#pragma once

// Discrete weighted Holder norms on dyadic shells around the singular
// point, and weighted L^2 norms with the S^{N-1} surface factor.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "sylab/error.hpp"
#include "sylab/grid.hpp"

namespace sylab {

inline constexpr int kDefaultShellCount = 18;

struct ShellDecomposition {
    double sigma = 0.0;
    int M = 0;
    std::vector<double> s;                       ///< s_m = sigma 2^{-m}
    std::vector<std::vector<std::size_t>> nodes;  ///< nodes with s_m/2 <= r < s_m
    std::vector<bool> active;                     ///< false when the shell lies below r_min

    std::size_t shell_of(std::size_t node) const {
        for (std::size_t m = 0; m < nodes.size(); ++m)
            if (std::find(nodes[m].begin(), nodes[m].end(), node) != nodes[m].end()) return m;
        return nodes.size();
    }
};

inline ShellDecomposition shell_decomposition(const RadialMesh& mesh, double sigma, int M = kDefaultShellCount) {
    if (!(sigma > 0.0) || M < 0) throw ValidationError("shell decomposition needs sigma > 0 and M >= 0");
    ShellDecomposition d;
    d.sigma = sigma;
    d.M = M;
    for (int m = 0; m <= M; ++m) {
        const double s = sigma * std::ldexp(1.0, -m);
        d.s.push_back(s);
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < mesh.size(); ++i)
            if (mesh.r[i] >= 0.5 * s && mesh.r[i] < s) idx.push_back(i);
        const bool below = s <= mesh.r_min();
        const bool outside = 0.5 * s >= mesh.r_max();
        if (idx.empty() && !below && !outside) {
            throw ValidationError("mesh too coarse: shell m=" + std::to_string(m) + " [" + std::to_string(0.5 * s) +
                                  ", " + std::to_string(s) + ") holds no node");
        }
        d.active.push_back(!idx.empty());
        d.nodes.push_back(std::move(idx));
    }
    return d;
}

struct NormReport {
    int k = 0;
    double alpha = 0.0;
    double nu = 0.0;
    double outer_part = 0.0;
    std::vector<double> shell_radius;     ///< s_m for every shell, active or not
    std::vector<double> shell_seminorm;   ///< |w|_{k,alpha,s_m}; 0 for skipped shells
    std::vector<double> shell_parts;      ///< s_m^{-nu} |w|_{k,alpha,s_m}
    std::vector<bool> shell_active;
    double total = 0.0;

    double shell_sup() const {
        double m = 0.0;
        for (double v : shell_parts) m = std::max(m, v);
        return m;
    }
};

namespace detail {

/// Per-node magnitudes of the derivatives of order 0..k of a radial function:
/// |w|, |w'|, max(|w''|, |w'/r|); `signed_parts` keeps the components for
/// Holder quotients.
struct DerivativeTable {
    std::vector<std::vector<double>> magnitude;                  // [order][node]
    std::vector<std::vector<std::vector<double>>> signed_parts;  // [order][component][node]
};

inline DerivativeTable derivative_table(const RadialMesh& mesh, const std::vector<double>& w, int k) {
    DerivativeTable t;
    const std::size_t n = mesh.size();
    t.magnitude.assign(k + 1, std::vector<double>(n));
    t.signed_parts.resize(k + 1);
    t.signed_parts[0] = {w};
    for (std::size_t i = 0; i < n; ++i) t.magnitude[0][i] = std::abs(w[i]);
    if (k >= 1) {
        const auto d1 = derivative(mesh, w);
        t.signed_parts[1] = {d1};
        for (std::size_t i = 0; i < n; ++i) t.magnitude[1][i] = std::abs(d1[i]);
        if (k >= 2) {
            const auto d2 = second_derivative(mesh, w);
            std::vector<double> tang(n);
            for (std::size_t i = 0; i < n; ++i) {
                tang[i] = d1[i] / mesh.r[i];
                t.magnitude[2][i] = std::max(std::abs(d2[i]), std::abs(tang[i]));
            }
            t.signed_parts[2] = {d2, tang};
        }
    }
    return t;
}

/// Sampled Holder quotient over node pairs i < j in `idx` with j - i >= 2
/// index steps and |r_j - r_i| <= max_dist; offsets grow geometrically.
inline double holder_quotient(const RadialMesh& mesh, const std::vector<std::vector<double>>& comps,
                              const std::vector<std::size_t>& idx, double alpha, double max_dist) {
    double q = 0.0;
    const std::size_t n = idx.size();
    auto pair = [&](std::size_t a, std::size_t b) {
        const std::size_t i = idx[a], j = idx[b];
        const double den = std::pow(mesh.r[j] - mesh.r[i], alpha);
        for (const auto& c : comps) q = std::max(q, std::abs(c[j] - c[i]) / den);
    };
    std::size_t far = 0;
    for (std::size_t a = 0; a + 2 < n; ++a) {
        // farthest partner within max_dist
        far = std::max(far, a + 2);
        while (far + 1 < n && mesh.r[idx[far + 1]] - mesh.r[idx[a]] <= max_dist) ++far;
        if (mesh.r[idx[a + 2]] - mesh.r[idx[a]] > max_dist) continue;
        for (std::size_t off = 2; a + off < far; off = off < 4 ? off + 1 : off + off / 2) pair(a, a + off);
        pair(a, far);
    }
    return q;
}

inline double region_seminorm(const RadialMesh& mesh, const DerivativeTable& t, const std::vector<std::size_t>& idx,
                              int k, double alpha, double scale, double max_dist) {
    double total = 0.0;
    for (int j = 0; j <= k; ++j) {
        double sup = 0.0;
        for (auto i : idx) sup = std::max(sup, t.magnitude[j][i]);
        total += std::pow(scale, j) * sup;
    }
    if (alpha > 0.0) {
        total += std::pow(scale, k + alpha) * holder_quotient(mesh, t.signed_parts[k], idx, alpha, max_dist);
    }
    return total;
}

inline NormReport radial_holder_norm(const RadialMesh& mesh, const std::vector<double>& w, int k, double alpha,
                                     double nu, const ShellDecomposition& sd) {
    NormReport rep;
    rep.k = k;
    rep.alpha = alpha;
    rep.nu = nu;
    const auto table = derivative_table(mesh, w, k);
    std::vector<std::size_t> outer;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (mesh.r[i] >= 0.5 * sd.sigma) outer.push_back(i);
    rep.outer_part = outer.empty() ? 0.0
                                   : region_seminorm(mesh, table, outer, k, alpha, 1.0,
                                                     std::numeric_limits<double>::infinity());
    rep.total = rep.outer_part;
    for (std::size_t m = 0; m < sd.s.size(); ++m) {
        const double s = sd.s[m];
        rep.shell_radius.push_back(s);
        rep.shell_active.push_back(sd.active[m]);
        if (!sd.active[m]) {
            rep.shell_seminorm.push_back(0.0);
            rep.shell_parts.push_back(0.0);
            continue;
        }
        const double semi = region_seminorm(mesh, table, sd.nodes[m], k, alpha, s, 0.25 * s);
        rep.shell_seminorm.push_back(semi);
        rep.shell_parts.push_back(std::pow(s, -nu) * semi);
        rep.total = std::max(rep.total, rep.shell_parts.back());
    }
    return rep;
}

}  // namespace detail

/// ||w||_{C^{k,alpha}_nu} = max(outer C^{k,alpha} norm on r >= sigma/2,
/// sup_m s_m^{-nu} |w|_{k,alpha,s_m}). Multi-channel functions sum the
/// per-channel norms.
inline NormReport weighted_holder_norm(const GridFunction& w, int k, double alpha, double nu, double sigma,
                                       int M_shell = kDefaultShellCount) {
    if (k < 0 || k > 2) throw ValidationError("weighted norms support k in {0,1,2}");
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("alpha in [0,1] required");
    const auto sd = shell_decomposition(*w.mesh, sigma, M_shell);
    NormReport total = detail::radial_holder_norm(*w.mesh, w.channels[0], k, alpha, nu, sd);
    for (std::size_t j = 1; j < w.channel_count(); ++j) {
        const auto r = detail::radial_holder_norm(*w.mesh, w.channels[j], k, alpha, nu, sd);
        total.outer_part += r.outer_part;
        for (std::size_t m = 0; m < r.shell_parts.size(); ++m) {
            total.shell_seminorm[m] += r.shell_seminorm[m];
            total.shell_parts[m] += r.shell_parts[m];
        }
    }
    total.total = std::max(total.outer_part, total.shell_sup());
    return total;
}

/// Uses the sigma recorded on a graded mesh.
inline NormReport weighted_holder_norm(const GridFunction& w, int k, double alpha, double nu) {
    if (!(w.mesh->sigma > 0.0)) throw ValidationError("mesh carries no sigma; pass it explicitly");
    return weighted_holder_norm(w, k, alpha, nu, w.mesh->sigma);
}

/// Least-squares slope of log2(shell part) against m over active shells;
/// a positive slope means the shell parts blow up towards the origin.
inline double shell_growth_rate(const NormReport& rep) {
    double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
    for (std::size_t m = 0; m < rep.shell_parts.size(); ++m) {
        if (!rep.shell_active[m] || !(rep.shell_parts[m] > 0.0)) continue;
        const double x = double(m), y = std::log2(rep.shell_parts[m]);
        S += 1;
        Sx += x;
        Sy += y;
        Sxx += x * x;
        Sxy += x * y;
    }
    if (S < 2) return 0.0;
    return (S * Sxy - Sx * Sy) / (S * Sxx - Sx * Sx);
}

inline double sphere_area(int N) { return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N); }

/// (int_{r_lo <= r <= r_hi} rho^{-2-2 delta} |w|^2 dx)^{1/2} by the trapezoid rule in r
/// with the |S^{N-1}| r^{N-1} volume factor.
inline double weighted_l2_norm(const GridFunction& w, double delta, int N,
                               double r_lo = 0.0, double r_hi = std::numeric_limits<double>::infinity()) {
    const auto& m = *w.mesh;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
        if (m.r[i] < r_lo || m.r[i + 1] > r_hi) continue;
        const double h = m.r[i + 1] - m.r[i];
        for (const auto& ch : w.channels) {
            auto f = [&](std::size_t q) {
                return std::pow(m.r[q], N - 3.0 - 2.0 * delta) * ch[q] * ch[q];
            };
            sum += 0.5 * h * (f(i) + f(i + 1));
        }
    }
    return std::sqrt(sphere_area(N) * sum);
}

struct NormAlgebraReport {
    double product_lhs = 0.0;   ///< ||w1 w2||_{gamma1+gamma2}
    double product_rhs = 0.0;   ///< ||w1||_{gamma1} ||w2||_{gamma2}
    double product_constant = 0.0;
    double gradient_norm = 0.0;  ///< ||w1'||_{gamma1-1}
    double gradient_constant = 0.0;
    double power_lhs = 0.0;  ///< || |w1|^p ||_{p gamma1}
    double power_rhs = 0.0;  ///< ||w1||_{gamma1}^p
    double power_constant = 0.0;
};

/// Empirical constants in the product, gradient and power bounds of the
/// weighted spaces (the power bound uses weight p gamma1).
inline NormAlgebraReport norm_algebra_check(const GridFunction& w1, const GridFunction& w2, double gamma1,
                                            double gamma2, int k, double alpha, double sigma, double p = 2.0) {
    NormAlgebraReport r;
    GridFunction prod(w1.mesh), grad(w1.mesh), pw(w1.mesh);
    const auto d1 = derivative(*w1.mesh, w1.radial());
    for (std::size_t i = 0; i < w1.size(); ++i) {
        prod.radial()[i] = w1[i] * w2[i];
        grad.radial()[i] = d1[i];
        pw.radial()[i] = std::pow(std::abs(w1[i]), p);
    }
    const double n1 = weighted_holder_norm(w1, k, alpha, gamma1, sigma).total;
    const double n2 = weighted_holder_norm(w2, k, alpha, gamma2, sigma).total;
    r.product_lhs = weighted_holder_norm(prod, k, alpha, gamma1 + gamma2, sigma).total;
    r.product_rhs = n1 * n2;
    r.product_constant = r.product_rhs > 0 ? r.product_lhs / r.product_rhs : 0.0;
    r.gradient_norm = weighted_holder_norm(grad, std::max(k - 1, 0), alpha, gamma1 - 1.0, sigma).total;
    r.gradient_constant = n1 > 0 ? r.gradient_norm / n1 : 0.0;
    r.power_lhs = weighted_holder_norm(pw, k, alpha, p * gamma1, sigma).total;
    r.power_rhs = std::pow(n1, p);
    r.power_constant = r.power_rhs > 0 ? r.power_lhs / r.power_rhs : 0.0;
    return r;
}

}  // namespace sylab
