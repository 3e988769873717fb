#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "kpplab/common.hpp"

namespace kpplab {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rel_residual = 0.0; // ||r||_2 / ||y||_2 over the fit window
};

/// Least-squares straight line y ~ intercept + slope * x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("fit_line: need at least 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double det = n * sxx - sx * sx;
    LineFit f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    double rss = 0, yss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
        yss += y[i] * y[i];
    }
    f.rel_residual = yss > 0 ? std::sqrt(rss / yss) : 0.0;
    return f;
}

struct EnvelopeFit {
    double log_c = 0.0;  // log of the fitted prefactor
    double rate = 0.0;   // fitted exponential rate: |v| ~ C e^{rate * x}
    double c() const { return std::exp(log_c); }
};

/// Fit |v(x)| ~ C e^{rate x} by least squares on log|v|.
/// Zero (or denormal) samples are skipped.
inline EnvelopeFit fit_exp_envelope(std::span<const double> x,
                                    std::span<const double> absv) {
    std::vector<double> xs, ys;
    xs.reserve(x.size());
    ys.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (absv[i] > 1e-290) {
            xs.push_back(x[i]);
            ys.push_back(std::log(absv[i]));
        }
    }
    LineFit lf = fit_line(xs, ys);
    return {lf.intercept, lf.slope};
}

/// Log-log decay-rate fit: y ~ C (1+t)^{slope}, returns slope.
inline double fit_loglog_slope(std::span<const double> t,
                               std::span<const double> y) {
    std::vector<double> lt, ly;
    lt.reserve(t.size());
    ly.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (y[i] > 1e-290) {
            lt.push_back(std::log(1.0 + t[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    return fit_line(lt, ly).slope;
}

} // namespace kpplab
