#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "kpplab/common.hpp"
#include "kpplab/fit.hpp"
#include "kpplab/model.hpp"
#include "kpplab/tridiag.hpp"

namespace kpplab {

/// Sampled critical front on a uniform grid, with its derivative and the
/// fitted right-tail coefficients of q(x) ~ (a + b x) e^{-gstar x}.
struct FrontProfile {
    std::vector<double> grid;
    std::vector<double> q;
    std::vector<double> dq;
    double xmin = 0.0, xmax = 0.0, h = 0.0;
    double gstar = 1.0;
    double left_rate = 0.0;  // decay rate of 1 - q at -infinity
    double left_coef = 0.0;  // 1 - q(x) ~ left_coef e^{left_rate x}
    double a = 0.0, b = 0.0;
    double fit_err = 0.0;
    double residual = 0.0;   // max centered-difference ODE residual

    std::size_t size() const { return grid.size(); }

    double q_at(double x) const {
        if (x >= xmax) return (a + b * x) * std::exp(-gstar * x);
        if (x <= xmin) return 1.0 - left_coef * std::exp(left_rate * x);
        return hermite(x, q, dq);
    }
    double dq_at(double x) const {
        if (x >= xmax)
            return (b - gstar * (a + b * x)) * std::exp(-gstar * x);
        if (x <= xmin) return -left_coef * left_rate * std::exp(left_rate * x);
        // q'' from the profile equation keeps the interpolant consistent
        std::size_t i = cell(x);
        double t = (x - grid[i]) / h;
        double d0 = dq[i], d1 = dq[i + 1];
        return d0 + (d1 - d0) * t;
    }

private:
    std::size_t cell(double x) const {
        auto i = static_cast<std::size_t>((x - xmin) / h);
        return std::min(i, grid.size() - 2);
    }
    double hermite(double x, const std::vector<double>& v,
                   const std::vector<double>& dv) const {
        std::size_t i = cell(x);
        double t = (x - grid[i]) / h;
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        double h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t);
        double h11 = t * t * (t - 1);
        return h00 * v[i] + h10 * h * dv[i] + h01 * v[i + 1] +
               h11 * h * dv[i + 1];
    }
};

struct FrontOptions {
    double x_minus = -60.0;
    double x_plus = 60.0;
    double h = 0.02;
    double newton_tol = 1e-11;
    int max_newton = 60;
    int max_outer = 16;
    // initial iterate: 0 = logistic, 1 = piecewise linear
    int initial_guess = 0;
};

/// Least-squares fit of q(x) e^{gstar x} against (a + b x) on [x_lo, x_hi].
/// Returns (a, b, relative residual). The window must sit in the far right
/// tail, x_lo >= 10/gstar.
inline std::tuple<double, double, double> fit_asymptotics(
    const FrontProfile& p, const ModelParams& m, double x_lo, double x_hi) {
    if (x_lo < 10.0 / m.gstar - 1e-12)
        throw std::invalid_argument("fit_asymptotics: window not in far tail");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.grid[i] >= x_lo && p.grid[i] <= x_hi) {
            xs.push_back(p.grid[i]);
            ys.push_back(p.q[i] * std::exp(m.gstar * p.grid[i]));
        }
    }
    if (xs.size() < 8)
        throw std::invalid_argument("fit_asymptotics: window too narrow");
    LineFit lf = fit_line(xs, ys);
    return {lf.intercept, lf.slope, lf.rel_residual};
}

namespace detail {

struct FrontSystem {
    const Nonlinearity& nl;
    const ModelParams& m;
    double h;
    double nu_left;   // decay rate of 1 - q at -infinity
    double eps_plus;  // Dirichlet value at the right end
    std::size_t n;

    // residual of the discrete system; row 0 is a first-order Robin
    // condition q' = nu (q - 1), last row Dirichlet. The Dirichlet row is
    // scaled by 1/eps_plus: the tail value is ~e^{-gstar x_plus} and a
    // boundary mismatch is amplified by e^{gstar (x_plus - x)} into the
    // interior, so it must be enforced in relative terms.
    void residual(const std::vector<double>& q, std::vector<double>& F) const {
        F[0] = (q[1] - q[0]) / h - nu_left * (q[0] - 1.0);
        const double ih2 = 1.0 / (h * h), i2h = 0.5 / h;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            F[i] = (q[i + 1] - 2.0 * q[i] + q[i - 1]) * ih2 +
                   m.cstar * (q[i + 1] - q[i - 1]) * i2h + nl.f(q[i]);
        }
        F[n - 1] = (q[n - 1] - eps_plus) / eps_plus;
    }

    void jacobian(const std::vector<double>& q, std::vector<double>& sub,
                  std::vector<double>& diag, std::vector<double>& sup) const {
        const double ih2 = 1.0 / (h * h), i2h = 0.5 / h;
        sub[0] = 0.0;
        diag[0] = -1.0 / h - nu_left;
        sup[0] = 1.0 / h;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            sub[i] = ih2 - m.cstar * i2h;
            diag[i] = -2.0 * ih2 + nl.f1(q[i]);
            sup[i] = ih2 + m.cstar * i2h;
        }
        sub[n - 1] = 0.0;
        diag[n - 1] = 1.0 / eps_plus;
        sup[n - 1] = 0.0;
    }
};

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double sumsq(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

// Damped Newton on the discrete front system, Armijo backtracking on the
// squared residual norm (the Newton direction is a guaranteed descent
// direction for it). q is the initial iterate and is updated in place.
// The residual floor is ~eps_machine/h^2 from cancellation in the second
// difference, so convergence is also accepted on vanishing Newton steps.
inline void front_newton(const FrontSystem& sys, std::vector<double>& q,
                         double tol, int max_iter) {
    const std::size_t n = sys.n;
    const double floor_tol =
        std::max(tol, 20.0 * 2.2e-16 / (sys.h * sys.h));
    std::vector<double> F(n), sub(n), diag(n), sup(n), qtry(n);
    sys.residual(q, F);
    double phi = sumsq(F);
    for (int it = 0; it < max_iter; ++it) {
        if (max_abs(F) < tol) return;
        sys.jacobian(q, sub, diag, sup);
        std::vector<double> step = solve_tridiagonal(sub, diag, sup, F);
        if (max_abs(step) < 1e-12) return;
        double lam = 1.0;
        for (int ls = 0;; ++ls) {
            for (std::size_t i = 0; i < n; ++i) qtry[i] = q[i] - lam * step[i];
            std::vector<double> Ft(n);
            sys.residual(qtry, Ft);
            double phit = sumsq(Ft);
            if (phit <= phi * (1.0 - 2e-4 * lam) || max_abs(Ft) < tol) {
                q = qtry;
                F = Ft;
                phi = phit;
                break;
            }
            lam *= 0.5;
            if (ls == 40) {
                if (max_abs(step) < 1e-8 && max_abs(F) < floor_tol) return;
                throw solver_error("solve_front: line search failed");
            }
        }
    }
    if (max_abs(F) >= floor_tol)
        throw solver_error("solve_front: Newton did not converge");
}

} // namespace detail

/// Solve the critical-front boundary value problem
///   q'' + cstar q' + f(q) = 0,  q(-inf)=1, q(+inf)=0,
/// on [x_minus, x_plus] by damped Newton on centered differences.
/// Left end carries the tail condition q' = nu (q - 1); the right Dirichlet
/// value is made self-consistent with the fitted (a + b x) e^{-gstar x}
/// expansion, and the translate is adjusted until q(0) = 1/2.
inline FrontProfile solve_front(const Nonlinearity& nl, const ModelParams& m,
                                const FrontOptions& opt = {}) {
    if (!(opt.x_minus < -10.0 / m.beta))
        throw std::invalid_argument("solve_front: x_minus not deep enough");
    if (!(opt.x_plus > 20.0 / m.gstar))
        throw std::invalid_argument("solve_front: x_plus not deep enough");

    const double h = opt.h;
    const auto n = static_cast<std::size_t>(
                       std::llround((opt.x_plus - opt.x_minus) / h)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = opt.x_minus + h * double(i);
    const auto i0 = static_cast<std::size_t>(std::llround(-opt.x_minus / h));
    if (std::abs(grid[i0]) > 1e-9)
        throw std::invalid_argument("solve_front: grid must contain x = 0");

    const double nu_left =
        -0.5 * m.cstar + std::sqrt(0.25 * m.cstar * m.cstar - m.f1_at_1);

    std::vector<double> q(n);
    if (opt.initial_guess == 0) {
        for (std::size_t i = 0; i < n; ++i)
            q[i] = 1.0 / (1.0 + std::exp(m.gstar * grid[i]));
    } else {
        for (std::size_t i = 0; i < n; ++i)
            q[i] = std::clamp(0.5 - grid[i] / 20.0, 0.0, 1.0);
    }

    detail::FrontSystem sys{nl, m, h, nu_left, 0.0, n};
    sys.eps_plus = opt.x_plus * std::exp(-m.gstar * opt.x_plus);

    // The single right-hand Dirichlet value eps_plus is the only remaining
    // degree of freedom (the left Robin row is scale-free), and it controls
    // the translate of the solution. Pin q(0) = 1/2 by a secant iteration
    // on ln(eps_plus); the response of q(0) to ln(eps_plus) is O(q'(0)) and
    // well conditioned.
    detail::front_newton(sys, q, opt.newton_tol, opt.max_newton);
    double w_prev = std::log(sys.eps_plus);
    double g_prev = q[i0] - 0.5;
    {
        double dq0 = (q[i0 + 1] - q[i0 - 1]) / (2.0 * h);
        double shift = (0.5 - q[i0]) / dq0;
        sys.eps_plus = std::exp(w_prev - m.gstar * shift);
    }
    for (int outer = 0; outer < opt.max_outer; ++outer) {
        detail::front_newton(sys, q, opt.newton_tol, opt.max_newton);
        double g = q[i0] - 0.5;
        if (std::abs(g) < 1e-11) break;
        if (outer == opt.max_outer - 1)
            throw solver_error("solve_front: phase iteration stalled");
        double w = std::log(sys.eps_plus);
        double dw = (w - w_prev) / (g - g_prev) * (-g);
        if (!std::isfinite(dw)) break; // at the conditioning floor
        dw = std::clamp(dw, -2.0, 2.0);
        w_prev = w;
        g_prev = g;
        sys.eps_plus = std::exp(w + dw);
    }

    FrontProfile p;
    p.grid = grid;
    p.q = q;
    p.xmin = opt.x_minus;
    p.xmax = opt.x_plus;
    p.h = h;
    p.gstar = m.gstar;
    p.left_rate = nu_left;
    p.left_coef = (1.0 - q[0]) * std::exp(-nu_left * opt.x_minus);

    // monotonicity (the comparison principle forces strict decrease)
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (q[i + 1] >= q[i] + 1e-14)
            throw solver_error("solve_front: profile not monotone");
    }

    // fourth-order derivative samples
    p.dq.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n) {
            p.dq[i] = (-q[i + 2] + 8.0 * q[i + 1] - 8.0 * q[i - 1] +
                       q[i - 2]) / (12.0 * h);
        } else if (i == 0) {
            p.dq[i] = (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * h);
        } else if (i == 1) {
            p.dq[i] = (q[2] - q[0]) / (2.0 * h);
        } else if (i + 2 == n) {
            p.dq[i] = (q[i + 1] - q[i - 1]) / (2.0 * h);
        } else {
            p.dq[i] = (3.0 * q[n - 1] - 4.0 * q[n - 2] + q[n - 3]) / (2.0 * h);
        }
    }

    // interior centered-difference residual
    double res = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double r = (q[i + 1] - 2.0 * q[i] + q[i - 1]) / (h * h) +
                   m.cstar * (q[i + 1] - q[i - 1]) / (2.0 * h) + nl.f(q[i]);
        res = std::max(res, std::abs(r));
    }
    p.residual = res;

    const double wlo = std::max(12.0 / m.gstar, 0.25 * opt.x_plus);
    const double whi = 0.6 * opt.x_plus;
    auto [a, b, err] = fit_asymptotics(p, m, wlo, whi);
    p.a = a;
    p.b = b;
    p.fit_err = err;
    if (!(p.b > 0.0)) throw solver_error("solve_front: fitted b not positive");
    return p;
}

/// Simple sampled function container used by mode oracles.
struct SampledFunction {
    std::vector<double> x;
    std::vector<double> v;
    std::vector<double> dv;
};

/// The zero-eigenvalue decaying-at-minus-infinity mode x -> q'(x)/w(x),
/// with its derivative. Exact up to profile accuracy; used as the oracle
/// for the lambda = 0 eigenvalue ODE.
inline SampledFunction derivative_mode(const FrontProfile& p, const Weight& w) {
    SampledFunction s;
    const std::size_t n = p.size();
    s.x = p.grid;
    s.v.resize(n);
    s.dv.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double iw = std::exp(-w.logw(p.grid[i]));
        s.v[i] = p.dq[i] * iw;
    }
    for (std::size_t i = 0; i < n; ++i) {
        // d/dx (q'/w) = (q'' - q' w'/w) / w, with q'' from differences of dq
        double d2q;
        if (i >= 1 && i + 1 < n)
            d2q = (p.dq[i + 1] - p.dq[i - 1]) / (2.0 * p.h);
        else if (i == 0)
            d2q = (p.dq[1] - p.dq[0]) / p.h;
        else
            d2q = (p.dq[n - 1] - p.dq[n - 2]) / p.h;
        double iw = std::exp(-w.logw(p.grid[i]));
        s.dv[i] = (d2q - p.dq[i] * w.dlogw(p.grid[i])) * iw;
    }
    return s;
}

} // namespace kpplab
