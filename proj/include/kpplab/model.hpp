#pragma once

#include <array>
#include <cmath>

#include "kpplab/common.hpp"
#include "kpplab/nonlinearity.hpp"

namespace kpplab {

/// Derived constants of the weighted linearization.
///   cstar    = 2 sqrt(f'(0)), the minimal wavespeed
///   gstar    = cstar / 2, the critical decay rate
///   beta     = left weight rate, 0 < beta < beta_max
///   alpha    = coefficient-envelope rate, 0 < alpha < gstar
///   beta_max = -cstar/2 + sqrt(cstar^2/4 - f'(1))
struct ModelParams {
    double cstar = 2.0;
    double gstar = 1.0;
    double beta = 0.2;
    double alpha = 0.8;
    double beta_max = 0.0;
    double f1_at_0 = 1.0;
    double f1_at_1 = -1.0;

    // f'(1) + cstar*beta + beta^2, the limit of zeta0 at -infinity
    double zeta0_minus_inf() const {
        return f1_at_1 + cstar * beta + beta * beta;
    }
};

inline ModelParams make_model(double f1_at_0, double f1_at_1, double beta,
                              double alpha) {
    if (!(f1_at_0 > 0.0)) throw std::invalid_argument("make_model: f'(0) must be > 0");
    if (!(f1_at_1 < 0.0)) throw std::invalid_argument("make_model: f'(1) must be < 0");
    ModelParams m;
    m.f1_at_0 = f1_at_0;
    m.f1_at_1 = f1_at_1;
    m.cstar = 2.0 * std::sqrt(f1_at_0);
    m.gstar = 0.5 * m.cstar;
    m.beta_max = -0.5 * m.cstar +
                 std::sqrt(0.25 * m.cstar * m.cstar - f1_at_1);
    if (!(beta > 0.0 && beta < m.beta_max))
        throw std::invalid_argument("make_model: beta outside (0, beta_max)");
    if (!(alpha > 0.0 && alpha < m.gstar))
        throw std::invalid_argument("make_model: alpha outside (0, gstar)");
    m.beta = beta;
    m.alpha = alpha;
    return m;
}

/// Exponential weight in log space:
///   log w(x) = -gstar*x  for x >= 1,   beta*x  for x <= -1,
/// bridged on [-1,1] by the unique degree-6 polynomial matching value,
/// first and second derivative at both ends and passing through 0 at x=0
/// (so w(0) = 1 exactly).
class Weight {
public:
    Weight() : Weight(make_model(1.0, -1.0, 0.2, 0.8)) {}

    explicit Weight(const ModelParams& m) : gstar_(m.gstar), beta_(m.beta) {
        // Solve the 7x7 system for p(x) = sum c_k x^k, k = 0..6:
        //   p(-1) = -beta, p'(-1) = beta, p''(-1) = 0,
        //   p(1) = -gstar, p'(1) = -gstar, p''(1) = 0, p(0) = 0.
        double a[7][8] = {};
        auto row_value = [&](int r, double x, double rhs) {
            double p = 1.0;
            for (int k = 0; k < 7; ++k) { a[r][k] = p; p *= x; }
            a[r][7] = rhs;
        };
        auto row_d1 = [&](int r, double x, double rhs) {
            double p = 1.0;
            for (int k = 1; k < 7; ++k) { a[r][k] = k * p; p *= x; }
            a[r][7] = rhs;
        };
        auto row_d2 = [&](int r, double x, double rhs) {
            double p = 1.0;
            for (int k = 2; k < 7; ++k) { a[r][k] = k * (k - 1.0) * p; p *= x; }
            a[r][7] = rhs;
        };
        row_value(0, -1.0, -beta_);
        row_d1(1, -1.0, beta_);
        row_d2(2, -1.0, 0.0);
        row_value(3, 1.0, -gstar_);
        row_d1(4, 1.0, -gstar_);
        row_d2(5, 1.0, 0.0);
        row_value(6, 0.0, 0.0);

        // Gaussian elimination with partial pivoting
        for (int col = 0; col < 7; ++col) {
            int piv = col;
            for (int r = col + 1; r < 7; ++r)
                if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
            for (int k = 0; k < 8; ++k) std::swap(a[col][k], a[piv][k]);
            for (int r = 0; r < 7; ++r) {
                if (r == col) continue;
                double fac = a[r][col] / a[col][col];
                for (int k = col; k < 8; ++k) a[r][k] -= fac * a[col][k];
            }
        }
        for (int k = 0; k < 7; ++k) c_[k] = a[k][7] / a[k][k];
    }

    double logw(double x) const {
        if (x >= 1.0) return -gstar_ * x;
        if (x <= -1.0) return beta_ * x;
        return poly(x, 0);
    }
    double dlogw(double x) const {
        if (x >= 1.0) return -gstar_;
        if (x <= -1.0) return beta_;
        return poly(x, 1);
    }
    double d2logw(double x) const {
        if (x >= 1.0 || x <= -1.0) return 0.0;
        return poly(x, 2);
    }
    double d3logw(double x) const {
        if (x >= 1.0 || x <= -1.0) return 0.0;
        return poly(x, 3);
    }
    double omega(double x) const { return std::exp(logw(x)); }
    /// w''/w = p'' + (p')^2 in log space.
    double d2w_over_w(double x) const {
        double d1 = dlogw(x);
        return d2logw(x) + d1 * d1;
    }

    const std::array<double, 7>& bridge_coefficients() const { return c_; }

private:
    double poly(double x, int deriv) const {
        double acc = 0.0;
        for (int k = 6; k >= deriv; --k) {
            double coef = c_[k];
            for (int d = 0; d < deriv; ++d) coef *= (k - d);
            acc = acc * x + coef;
        }
        return acc;
    }

    double gstar_, beta_;
    std::array<double, 7> c_{};
};

/// Spatial growth/decay rates of the -infinity limit system in weighted
/// variables, principal branch:
///   mu_pm = -(c+2b)/2 +- (1/2) sqrt((c+2b)^2 - 4(f'(1)+c b+b^2) + 4 lambda)
inline cx mu_pm(cx lambda, const ModelParams& m, int sign) {
    double cb = m.cstar + 2.0 * m.beta;
    cx rad = cb * cb - 4.0 * m.zeta0_minus_inf() + 4.0 * lambda;
    if (rad.real() <= 0.0 && rad.imag() == 0.0)
        throw std::invalid_argument(
            "mu_pm: lambda on the branch cut of the -infinity rates");
    cx root = std::sqrt(rad);
    return -0.5 * cb + (sign >= 0 ? 0.5 * root : -0.5 * root);
}

/// Signed horizontal distance from lambda to the essential-spectrum
/// parabola of the -infinity operator,
///   Gamma_- = { -l^2 + i(c+2b) l + f'(1)+c b+b^2 : l real }.
/// Positive means strictly to the right.
inline double gamma_minus_distance(cx lambda, const ModelParams& m) {
    double cb = std::max(m.cstar + 2.0 * m.beta, 1e-8);
    double ell = lambda.imag() / cb;
    double curve_re = -ell * ell + m.zeta0_minus_inf();
    return lambda.real() - curve_re;
}

} // namespace kpplab
