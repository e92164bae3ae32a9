#pragma once

// Radial coefficient fields a(r), h(r) drawn from named analytic families
// so that every derivative is exact.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "sylab/error.hpp"

namespace sylab {

class RadialFunction {
   public:
    enum class Kind { Constant, PolynomialR2, Gaussian, CosineR2 };

    static RadialFunction constant(double c) { return {Kind::Constant, {c}}; }

    /// sum_i c_i r^{2i}
    static RadialFunction polynomial_r2(std::vector<double> coeffs) {
        if (coeffs.empty()) throw ValidationError("polynomial family needs at least one coefficient");
        return {Kind::PolynomialR2, std::move(coeffs)};
    }

    /// base + amp exp(-r^2 / width^2)
    static RadialFunction gaussian(double base, double amp, double width) {
        if (!(width > 0.0)) throw ValidationError("gaussian width > 0 violated");
        return {Kind::Gaussian, {base, amp, width}};
    }

    /// base + amp cos(freq r^2)
    static RadialFunction cosine_r2(double base, double amp, double freq) { return {Kind::CosineR2, {base, amp, freq}}; }

    /// Parses "constant", "polynomial", "gaussian" or "cosine" with its parameter list.
    static RadialFunction from_name(const std::string& name, const std::vector<double>& params) {
        if (name == "constant") {
            if (params.size() != 1) throw ValidationError("constant family takes 1 parameter");
            return constant(params[0]);
        }
        if (name == "polynomial" || name == "polynomial_r2") return polynomial_r2(params);
        if (name == "gaussian") {
            if (params.size() != 3) throw ValidationError("gaussian family takes 3 parameters (base, amp, width)");
            return gaussian(params[0], params[1], params[2]);
        }
        if (name == "cosine") {
            if (params.size() != 3) throw ValidationError("cosine family takes 3 parameters (base, amp, freq)");
            return cosine_r2(params[0], params[1], params[2]);
        }
        throw ValidationError("unknown coefficient family '" + name + "' (constant | polynomial | gaussian | cosine)");
    }

    Kind kind() const { return kind_; }
    const std::vector<double>& params() const { return p_; }

    double value(double r) const { return eval(r, 0); }
    double d1(double r) const { return eval(r, 1); }
    double d2(double r) const { return eval(r, 2); }

    std::string describe() const {
        std::ostringstream os;
        static constexpr const char* names[] = {"constant", "polynomial", "gaussian", "cosine"};
        os << names[int(kind_)] << "(";
        for (std::size_t i = 0; i < p_.size(); ++i) os << (i ? "," : "") << p_[i];
        os << ")";
        return os.str();
    }

   private:
    RadialFunction(Kind k, std::vector<double> p) : kind_(k), p_(std::move(p)) {}

    double eval(double r, int order) const {
        switch (kind_) {
            case Kind::Constant:
                return order == 0 ? p_[0] : 0.0;
            case Kind::PolynomialR2: {
                double s = 0.0;
                for (std::size_t i = 0; i < p_.size(); ++i) {
                    const double e = 2.0 * i;
                    if (order == 0) s += p_[i] * std::pow(r, e);
                    if (order == 1 && i > 0) s += p_[i] * e * std::pow(r, e - 1);
                    if (order == 2 && i > 0) s += p_[i] * e * (e - 1) * std::pow(r, e - 2);
                }
                return s;
            }
            case Kind::CosineR2: {
                const double w = p_[2], s = w * r * r;
                if (order == 0) return p_[0] + p_[1] * std::cos(s);
                if (order == 1) return -p_[1] * std::sin(s) * 2.0 * w * r;
                return -p_[1] * (std::cos(s) * 4.0 * w * w * r * r + std::sin(s) * 2.0 * w);
            }
            case Kind::Gaussian:
            default: {
                const double w2 = p_[2] * p_[2];
                const double g = p_[1] * std::exp(-r * r / w2);
                if (order == 0) return p_[0] + g;
                if (order == 1) return g * (-2.0 * r / w2);
                return g * (4.0 * r * r / (w2 * w2) - 2.0 / w2);
            }
        }
    }

    Kind kind_;
    std::vector<double> p_;
};

/// The pair (a, h) of -div(a grad u) + a h u = a u^p.
struct CoefficientField {
    RadialFunction a = RadialFunction::constant(1.0);
    RadialFunction h = RadialFunction::constant(0.0);
    double c0 = 1.0;  ///< coercivity constant of the quadratic form

    /// Checks min a > 0 and finiteness on [0, R] by dense sampling.
    void validate(double R) const {
        if (!(c0 > 0.0)) throw ValidationError("coercivity constant c0 > 0 violated");
        for (int i = 0; i <= 2000; ++i) {
            const double r = R * i / 2000.0;
            const double av = a.value(r);
            if (!(av > 0.0)) throw ValidationError("coefficient a must stay positive on [0,R]: a(" + std::to_string(r) + ")=" + std::to_string(av));
            if (!std::isfinite(a.d1(r)) || !std::isfinite(a.d2(r)) || !std::isfinite(h.value(r)) ||
                !std::isfinite(h.d1(r))) {
                throw ValidationError("coefficient fields must be finite on [0,R]");
            }
        }
    }

    double max_a(double R) const {
        double m = 0.0;
        for (int i = 0; i <= 2000; ++i) m = std::max(m, a.value(R * i / 2000.0));
        return m;
    }
};

}  // namespace sylab
