#pragma once

// Hyper-dual numbers a + b e1 + c e2 + d e1 e2 with e1^2 = e2^2 = 0: one
// evaluation returns f, two first partials and the mixed second partial,
// all free of truncation error.

#include <cmath>

namespace sylab {

struct HyperDual {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    HyperDual() = default;
    HyperDual(double v) : a(v) {}  // NOLINT: implicit lift of constants
    HyperDual(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

    HyperDual& operator+=(const HyperDual& o) {
        a += o.a, b += o.b, c += o.c, d += o.d;
        return *this;
    }
    HyperDual& operator-=(const HyperDual& o) {
        a -= o.a, b -= o.b, c -= o.c, d -= o.d;
        return *this;
    }
    HyperDual& operator*=(const HyperDual& o) {
        *this = HyperDual{a * o.a, a * o.b + b * o.a, a * o.c + c * o.a, a * o.d + b * o.c + c * o.b + d * o.a};
        return *this;
    }
    HyperDual& operator/=(const HyperDual& o) {
        const double inv = 1.0 / o.a;
        // 1/x lifted by the chain rule: f' = -1/x^2, f'' = 2/x^3
        const HyperDual r{inv, -o.b * inv * inv, -o.c * inv * inv, -o.d * inv * inv + 2.0 * o.b * o.c * inv * inv * inv};
        return *this *= r;
    }
    HyperDual operator-() const { return {-a, -b, -c, -d}; }
};

inline HyperDual operator+(HyperDual x, const HyperDual& y) { return x += y; }
inline HyperDual operator-(HyperDual x, const HyperDual& y) { return x -= y; }
inline HyperDual operator*(HyperDual x, const HyperDual& y) { return x *= y; }
inline HyperDual operator/(HyperDual x, const HyperDual& y) { return x /= y; }

/// f(x) from f(x.a), f'(x.a), f''(x.a).
inline HyperDual chain(const HyperDual& x, double f0, double f1, double f2) {
    return {f0, f1 * x.b, f1 * x.c, f1 * x.d + f2 * x.b * x.c};
}

inline HyperDual exp(const HyperDual& x) {
    const double e = std::exp(x.a);
    return chain(x, e, e, e);
}
inline HyperDual sqrt(const HyperDual& x) {
    const double s = std::sqrt(x.a);
    return chain(x, s, 0.5 / s, -0.25 / (s * x.a));
}
inline HyperDual cos(const HyperDual& x) { return chain(x, std::cos(x.a), -std::sin(x.a), -std::cos(x.a)); }
inline HyperDual sin(const HyperDual& x) { return chain(x, std::sin(x.a), std::cos(x.a), -std::sin(x.a)); }
inline HyperDual pow(const HyperDual& x, double e) {
    return chain(x, std::pow(x.a, e), e * std::pow(x.a, e - 1.0), e * (e - 1.0) * std::pow(x.a, e - 2.0));
}

}  // namespace sylab
