#pragma once

#include <complex>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpplab {

using cx = std::complex<double>;

constexpr double pi = 3.14159265358979323846;

/// Thrown when an iteration fails to converge or a solution blows up.
/// Distinct from std::invalid_argument so callers can map numeric failures
/// to a dedicated exit status.
class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vec2c {
    cx a{0.0, 0.0};
    cx b{0.0, 0.0};

    Vec2c operator+(const Vec2c& o) const { return {a + o.a, b + o.b}; }
    Vec2c operator-(const Vec2c& o) const { return {a - o.a, b - o.b}; }
    Vec2c operator*(double s) const { return {a * s, b * s}; }
    Vec2c operator*(cx s) const { return {a * s, b * s}; }
    Vec2c& operator+=(const Vec2c& o) { a += o.a; b += o.b; return *this; }

    double norm_inf() const { return std::max(std::abs(a), std::abs(b)); }
};

inline Vec2c operator*(double s, const Vec2c& v) { return v * s; }

struct Mat2c {
    cx a11{0.0}, a12{0.0}, a21{0.0}, a22{0.0};

    Vec2c operator*(const Vec2c& v) const {
        return {a11 * v.a + a12 * v.b, a21 * v.a + a22 * v.b};
    }
    Mat2c operator-(const Mat2c& o) const {
        return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
    }
};

/// Complex value in split-exponent form: value = mantissa * exp(log_scale).
/// Used wherever products of exponentially large/small factors would
/// overflow doubles (Wronskians at |y| ~ 60, e^{lambda t} weights).
struct ScaledC {
    cx mantissa{0.0};
    double log_scale{0.0};

    cx value() const { return mantissa * std::exp(log_scale); }
    double log_abs() const {
        double m = std::abs(mantissa);
        return m > 0.0 ? std::log(m) + log_scale
                       : -std::numeric_limits<double>::infinity();
    }
    ScaledC operator*(const ScaledC& o) const {
        return {mantissa * o.mantissa, log_scale + o.log_scale};
    }
    ScaledC operator/(const ScaledC& o) const {
        return {mantissa / o.mantissa, log_scale - o.log_scale};
    }
    /// Renormalize so |mantissa| is O(1).
    ScaledC normalized() const {
        double m = std::abs(mantissa);
        if (m == 0.0 || !std::isfinite(m)) return *this;
        return {mantissa / m, log_scale + std::log(m)};
    }
};

/// exp(z) for complex z with the real part carried in the exponent slot.
inline ScaledC scaled_exp(cx z) {
    return {std::exp(cx(0.0, z.imag())), z.real()};
}

/// Accumulates a sum of ScaledC terms without over/underflow.
class ScaledAccumulator {
public:
    void add(const ScaledC& t) {
        if (std::abs(t.mantissa) == 0.0) return;
        if (empty_) {
            sum_ = t.mantissa;
            scale_ = t.log_scale;
            empty_ = false;
            return;
        }
        double d = t.log_scale - scale_;
        if (d > 40.0) {
            // incoming term dwarfs the running sum; rebase
            sum_ = sum_ * std::exp(-d) + t.mantissa;
            scale_ = t.log_scale;
        } else {
            sum_ += t.mantissa * std::exp(d);
        }
        double m = std::abs(sum_);
        if (m > 1e100) {
            sum_ /= m;
            scale_ += std::log(m);
        }
    }
    ScaledC total() const { return empty_ ? ScaledC{} : ScaledC{sum_, scale_}; }

private:
    cx sum_{0.0};
    double scale_{0.0};
    bool empty_ = true;
};

inline bool approx_rel(double got, double want, double tol) {
    return std::abs(got - want) <= tol * std::max(1e-300, std::abs(want));
}

} // namespace kpplab
