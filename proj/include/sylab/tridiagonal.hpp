#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sylab/error.hpp"

namespace sylab {

/// Row i reads lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1];
/// lower[0] and upper[n-1] are ignored.
struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const { return diag.size(); }

    std::vector<double> apply(const std::vector<double>& x) const {
        const std::size_t n = size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += lower[i] * x[i - 1];
            if (i + 1 < n) s += upper[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }

    double norm_inf() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            double s = std::abs(diag[i]);
            if (i > 0) s += std::abs(lower[i]);
            if (i + 1 < size()) s += std::abs(upper[i]);
            m = std::max(m, s);
        }
        return m;
    }
};

/// Condition estimates above this are treated as a singular system.
inline constexpr double kSingularCondition = 1e13;

/// LU factorization with partial pivoting (the gttrf layout: two
/// superdiagonals in U, one multiplier per step).
class TridiagonalLU {
   public:
    TridiagonalLU(const Tridiagonal& A, int mode = 0) : n_(A.size()), mode_(mode) {
        if (n_ < 2) throw ValidationError("tridiagonal system needs at least 2 rows");
        dl_.assign(A.lower.begin() + 1, A.lower.end());
        d_ = A.diag;
        du_.assign(A.upper.begin(), A.upper.end() - 1);
        du2_.assign(n_ > 2 ? n_ - 2 : 0, 0.0);
        swap_.assign(n_ - 1, false);
        const double scale = A.norm_inf();
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            throw SingularSystemError(mode, std::numeric_limits<double>::infinity(), "zero or non-finite matrix");
        }
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            if (std::abs(d_[i]) >= std::abs(dl_[i])) {
                const double f = d_[i] != 0.0 ? dl_[i] / d_[i] : 0.0;
                dl_[i] = f;
                d_[i + 1] -= f * du_[i];
            } else {
                const double f = d_[i] / dl_[i];
                d_[i] = dl_[i];
                dl_[i] = f;
                const double t = du_[i];
                du_[i] = d_[i + 1];
                d_[i + 1] = t - f * d_[i + 1];
                if (i + 2 < n_) {
                    du2_[i] = du_[i + 1];
                    du_[i + 1] = -f * du_[i + 1];
                }
                swap_[i] = true;
            }
        }
        min_pivot_ = std::numeric_limits<double>::infinity();
        for (double p : d_) min_pivot_ = std::min(min_pivot_, std::abs(p));
        if (min_pivot_ <= 1e-15 * scale) {
            throw SingularSystemError(mode, std::numeric_limits<double>::infinity(), "zero pivot");
        }
        // ||A^{-1}|| probed with two sign patterns
        double inv = 0.0;
        for (int pattern = 0; pattern < 2; ++pattern) {
            std::vector<double> e(n_);
            for (std::size_t i = 0; i < n_; ++i) e[i] = (pattern == 0 || i % 2 == 0) ? 1.0 : -1.0;
            const auto x = solve(e);
            for (double v : x) inv = std::max(inv, std::abs(v));
        }
        condition_ = scale * inv;
        if (!(condition_ < kSingularCondition)) {
            throw SingularSystemError(mode, condition_, "ill-conditioned system");
        }
    }

    std::vector<double> solve(std::vector<double> b) const {
        if (b.size() != n_) throw ValidationError("right-hand side size mismatch");
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            if (!swap_[i]) {
                b[i + 1] -= dl_[i] * b[i];
            } else {
                const double t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - dl_[i] * b[i];
            }
        }
        b[n_ - 1] /= d_[n_ - 1];
        b[n_ - 2] = (b[n_ - 2] - du_[n_ - 2] * b[n_ - 1]) / d_[n_ - 2];
        for (std::size_t ii = n_ - 2; ii-- > 0;) {
            b[ii] = (b[ii] - du_[ii] * b[ii + 1] - du2_[ii] * b[ii + 2]) / d_[ii];
        }
        return b;
    }

    double condition_estimate() const { return condition_; }
    double min_pivot() const { return min_pivot_; }
    int mode() const { return mode_; }

   private:
    std::size_t n_;
    int mode_;
    std::vector<double> dl_, d_, du_, du2_;
    std::vector<bool> swap_;
    double min_pivot_ = 0.0;
    double condition_ = 0.0;
};

}  // namespace sylab
