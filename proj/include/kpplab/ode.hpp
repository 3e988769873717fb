#pragma once

#include <cmath>
#include <functional>

#include "kpplab/common.hpp"

namespace kpplab {

/// Adaptive Dormand-Prince 5(4) pair. The state type must provide
/// operator+, operator*(double) and norm_inf(); right-hand sides are
/// callables f(x, y) -> State. Direction of integration is inferred from
/// the sign of (x1 - x0); steps land exactly on requested output nodes.
template <class State>
class Rk45 {
public:
    double rtol = 1e-10;
    double atol = 1e-13;
    double max_step = 1.0;
    long max_steps = 2'000'000;

    template <class Rhs>
    State integrate(Rhs&& f, double x0, double x1, State y) {
        integrate_observed(std::forward<Rhs>(f), x0, x1, y, nullptr);
        return y;
    }

    /// Integrate from x0 to x1; `observe(x, y, dy)` fires at x0, at x1 and
    /// nowhere else. y is updated in place.
    template <class Rhs>
    void integrate_observed(Rhs&& f, double x0, double x1, State& y,
                            const std::function<void(double, const State&,
                                                     const State&)>* observe) {
        const double dir = (x1 >= x0) ? 1.0 : -1.0;
        double x = x0;
        State k1 = f(x, y);
        if (observe) (*observe)(x, y, k1);
        if (x0 == x1) return;
        double h = std::min(max_step, std::abs(x1 - x0)) * dir;

        long steps = 0;
        while (dir * (x1 - x) > 0.0) {
            if (++steps > max_steps)
                throw solver_error("rk45: step limit exceeded");
            if (dir * (x + h - x1) > 0.0) h = x1 - x;

            State k2 = f(x + h * c2, y + k1 * (h * a21));
            State k3 = f(x + h * c3, y + k1 * (h * a31) + k2 * (h * a32));
            State k4 = f(x + h * c4,
                         y + k1 * (h * a41) + k2 * (h * a42) + k3 * (h * a43));
            State k5 = f(x + h * c5, y + k1 * (h * a51) + k2 * (h * a52) +
                                         k3 * (h * a53) + k4 * (h * a54));
            State k6 = f(x + h, y + k1 * (h * a61) + k2 * (h * a62) +
                                    k3 * (h * a63) + k4 * (h * a64) +
                                    k5 * (h * a65));
            State y5 = y + k1 * (h * b1) + k3 * (h * b3) + k4 * (h * b4) +
                       k5 * (h * b5) + k6 * (h * b6);
            State k7 = f(x + h, y5);
            State err = k1 * (h * e1) + k3 * (h * e3) + k4 * (h * e4) +
                        k5 * (h * e5) + k6 * (h * e6) + k7 * (h * e7);

            double sc = atol + rtol * std::max(y.norm_inf(), y5.norm_inf());
            double en = err.norm_inf() / sc;
            if (!std::isfinite(en))
                throw solver_error("rk45: non-finite state (blow-up)");

            if (en <= 1.0) {
                x += h;
                y = y5;
                k1 = k7; // FSAL
            }
            double fac = 0.9 * std::pow(en > 1e-30 ? en : 1e-30, -0.2);
            fac = std::min(5.0, std::max(0.2, fac));
            h *= fac;
            if (std::abs(h) > max_step) h = max_step * dir;
            if (std::abs(h) < 1e-14)
                throw solver_error("rk45: step size underflow");
        }
        if (observe) (*observe)(x, y, k1);
    }

private:
    // Dormand-Prince coefficients
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                            e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

} // namespace kpplab
