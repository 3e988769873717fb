#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "kpplab/common.hpp"
#include "kpplab/context.hpp"
#include "kpplab/ode.hpp"

namespace kpplab {

enum class SpectralRegion { small, mid, large };

struct RegionThresholds {
    double m_small = 0.5;   // |lambda| <= m_small -> small-lambda bounds
    double m_large = 10.0;  // |lambda| >= m_large -> large-lambda bounds
    double delta0 = 0.05;   // Omega_delta wedge offset
    double delta1 = 0.2679491924311227; // tan(pi/12), wedge slope

    bool in_omega_delta(cx lambda) const {
        return lambda.real() >= -delta0 - delta1 * std::abs(lambda.imag());
    }
};

/// A point of the resolvent set together with its principal square root
/// (branch cut on the negative reals, Re >= 0) and region tag.
struct SpectralPoint {
    cx lambda{0.0};
    cx s{0.0}; // sqrt(lambda), principal branch
    SpectralRegion region = SpectralRegion::mid;
};

inline bool off_negative_reals(cx lambda) {
    return lambda.imag() != 0.0 || lambda.real() >= 0.0;
}

inline SpectralPoint make_spectral_point(cx lambda, const ModelContext& ctx,
                                         const RegionThresholds& th = {}) {
    SpectralPoint sp;
    sp.lambda = lambda;
    sp.s = std::sqrt(lambda);
    double mod = std::abs(lambda);
    if (mod <= th.m_small && off_negative_reals(lambda) &&
        ctx.distance_to_gamma_minus(lambda) > 0.0) {
        sp.region = SpectralRegion::small;
    } else if (mod >= th.m_large && th.in_omega_delta(lambda)) {
        sp.region = SpectralRegion::large;
    } else {
        sp.region = SpectralRegion::mid;
    }
    return sp;
}

/// First-order system matrix of the eigenvalue ODE L p = lambda p:
/// P' = A(x, lambda) P with P = (p, p').
inline Mat2c assemble_A(double x, cx lambda, const ModelContext& ctx) {
    return {cx(0.0), cx(1.0), lambda - ctx.zeta0(x), cx(-ctx.zeta1(x))};
}

enum class ModeKind { phi_plus, psi_plus, phi_minus, psi_minus };

inline const char* mode_name(ModeKind k) {
    switch (k) {
        case ModeKind::phi_plus: return "phi+";
        case ModeKind::psi_plus: return "psi+";
        case ModeKind::phi_minus: return "phi-";
        case ModeKind::psi_minus: return "psi-";
    }
    return "?";
}

struct ModeOptions {
    double x_far = 0.0;     // truncation; 0 -> use the context domain
    double x_stop = NAN;    // NAN -> default span for the kind
    double rtol = 1e-10;
    double atol = 1e-13;
    double max_step = 0.1;
    // skip the strict spectral-location preconditions; used when the
    // Laplace contour continues the modes left of Gamma_-
    bool allow_spectral_continuation = false;
    // force additional output nodes at this uniform spacing (0 = natural
    // integrator steps only); the fine grid is needed by finite-difference
    // residual checks
    double forced_spacing = 0.0;
};

/// Envelope-normalized solution of the eigenvalue ODE on (part of) the
/// line: full solution = e^{rate x + log_scale(x)} (Z1, Z2)(x).
/// Z is stored at integrator nodes (ascending x) with its derivative for
/// cubic Hermite evaluation in between.
class ModeSolution {
public:
    ModeKind kind = ModeKind::phi_plus;
    SpectralPoint lambda;
    cx rate{0.0};
    std::vector<double> grid;
    std::vector<Vec2c> Z, dZ;
    std::vector<double> log_scale;

    double x_lo() const { return grid.front(); }
    double x_hi() const { return grid.back(); }

    /// Envelope value at x in split-exponent form (no rate factor).
    void envelope_at(double x, Vec2c& z, double& scale) const {
        if (x < grid.front() - 1e-9 || x > grid.back() + 1e-9)
            throw std::invalid_argument("ModeSolution: x outside stored span");
        x = std::clamp(x, grid.front(), grid.back());
        auto it = std::upper_bound(grid.begin(), grid.end(), x);
        std::size_t i = (it == grid.begin())
                            ? 0
                            : std::min<std::size_t>(it - grid.begin() - 1,
                                                    grid.size() - 2);
        double hseg = grid[i + 1] - grid[i];
        double t = (x - grid[i]) / hseg;
        scale = std::max(log_scale[i], log_scale[i + 1]);
        double f0 = std::exp(log_scale[i] - scale);
        double f1 = std::exp(log_scale[i + 1] - scale);
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        double h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t);
        double h11 = t * t * (t - 1);
        z.a = h00 * Z[i].a * f0 + h10 * hseg * dZ[i].a * f0 +
              h01 * Z[i + 1].a * f1 + h11 * hseg * dZ[i + 1].a * f1;
        z.b = h00 * Z[i].b * f0 + h10 * hseg * dZ[i].b * f0 +
              h01 * Z[i + 1].b * f1 + h11 * hseg * dZ[i + 1].b * f1;
    }

    /// First envelope component with scale folded in (safe in the regions
    /// where no rescaling occurred).
    cx z1_at(double x) const {
        Vec2c z;
        double sc;
        envelope_at(x, z, sc);
        return z.a * std::exp(sc);
    }
    cx z2_at(double x) const {
        Vec2c z;
        double sc;
        envelope_at(x, z, sc);
        return z.b * std::exp(sc);
    }
    /// Remainder theta_1 (phi modes) or kappa_1 (psi modes): Z1 - 1.
    cx remainder1_at(double x) const { return z1_at(x) - 1.0; }
    /// Remainder in the derivative slot: Z2 - rate.
    cx remainder2_at(double x) const { return z2_at(x) - rate; }

    /// Full solution value; overflows for |rate x| large, prefer the
    /// split-exponent accessors in Green's function assembly.
    cx value_at(double x) const {
        Vec2c z;
        double sc;
        envelope_at(x, z, sc);
        return z.a * std::exp(rate * x + sc);
    }
    cx derivative_at(double x) const {
        Vec2c z;
        double sc;
        envelope_at(x, z, sc);
        return z.b * std::exp(rate * x + sc);
    }
};

namespace detail {

struct EnvelopeRhs {
    const ModelContext& ctx;
    cx lambda;
    cx rate;
    Vec2c operator()(double x, const Vec2c& z) const {
        // Z' = (A(x,lambda) - rate I) Z
        return {z.b - rate * z.a,
                (lambda - ctx.zeta0(x)) * z.a + (-ctx.zeta1(x) - rate) * z.b};
    }
};

} // namespace detail

/// Construct one of the four envelope-normalized modes by integrating the
/// envelope ODE from the far end of its half-line:
///   phi+ : rate -sqrt(lambda), from +X (backward)
///   psi+ : rate +sqrt(lambda), from +X (backward), needs 2 Re sqrt(lambda) < alpha
///   phi- : rate mu+(lambda),   from -X (forward)
///   psi- : rate mu-(lambda),   from x=0 (backward), rescaled at -X
/// psi- is started at 0 because its -infinity-anchored integral equation
/// has no stable numerical direction: the spectral gap Re(mu+ - mu-)
/// exceeds the coefficient convergence rate there. Growing modes are only
/// defined up to multiples of the decaying one, so the determinants built
/// from it are unaffected.
inline ModeSolution solve_mode(ModeKind kind, const SpectralPoint& sp,
                               const ModelContext& ctx,
                               const ModeOptions& opt = {}) {
    const double X = opt.x_far > 0.0 ? opt.x_far
                                     : std::min(-ctx.x_min(), ctx.x_max());
    const cx lam = sp.lambda;

    if (!opt.allow_spectral_continuation) {
        if (ctx.distance_to_gamma_minus(lam) <= 0.0)
            throw std::invalid_argument(
                "solve_mode: lambda not strictly right of Gamma_-");
        if ((kind == ModeKind::phi_plus || kind == ModeKind::psi_plus) &&
            !off_negative_reals(lam))
            throw std::invalid_argument(
                "solve_mode: lambda on the negative real axis");
    }
    if (kind == ModeKind::psi_plus &&
        !(2.0 * sp.s.real() - ctx.prm.alpha < 0.0))
        throw std::invalid_argument(
            "solve_mode: psi+ needs 2 Re sqrt(lambda) < alpha");

    ModeSolution ms;
    ms.kind = kind;
    ms.lambda = sp;

    double x_start = 0.0, x_end = 0.0;
    switch (kind) {
        case ModeKind::phi_plus:
            ms.rate = -sp.s;
            x_start = X;
            x_end = std::isnan(opt.x_stop) ? -X : opt.x_stop;
            break;
        case ModeKind::psi_plus:
            ms.rate = sp.s;
            x_start = X;
            x_end = std::isnan(opt.x_stop) ? 0.0 : opt.x_stop;
            break;
        case ModeKind::phi_minus:
            ms.rate = ctx.mu_plus(lam);
            x_start = -X;
            x_end = std::isnan(opt.x_stop) ? X : opt.x_stop;
            break;
        case ModeKind::psi_minus:
            ms.rate = ctx.mu_minus(lam);
            x_start = 0.0;
            x_end = std::isnan(opt.x_stop) ? -X : opt.x_stop;
            break;
    }

    detail::EnvelopeRhs rhs{ctx, lam, ms.rate};
    Rk45<Vec2c> integ;
    integ.rtol = opt.rtol;
    integ.atol = opt.atol;
    integ.max_step = opt.max_step;

    Vec2c z{1.0, ms.rate};
    double scale = 0.0;
    ms.grid.push_back(x_start);
    ms.Z.push_back(z);
    ms.dZ.push_back(rhs(x_start, z));
    ms.log_scale.push_back(scale);

    const double dir = (x_end >= x_start) ? 1.0 : -1.0;
    double segment = opt.forced_spacing > 0.0 ? opt.forced_spacing
                                              : opt.max_step;
    double x = x_start;
    std::function<void(double, const Vec2c&, const Vec2c&)> observe =
        [&](double xo, const Vec2c& zo, const Vec2c& dzo) {
            if (xo == x) return; // segment start is already stored
            ms.grid.push_back(xo);
            ms.Z.push_back(zo);
            ms.dZ.push_back(dzo);
            ms.log_scale.push_back(scale);
        };
    while (dir * (x_end - x) > 1e-12) {
        double xn = x + dir * segment;
        if (dir * (xn - x_end) > 0.0) xn = x_end;
        integ.integrate_observed(rhs, x, xn, z, &observe);
        x = xn;
        double m = z.norm_inf();
        if (m > 1e50) {
            z = z * (1.0 / m);
            ms.Z.back() = z;
            ms.dZ.back() = rhs(x, z);
            scale += std::log(m);
            ms.log_scale.back() = scale;
        }
        if (scale > 600.0)
            throw solver_error("solve_mode: envelope blow-up (wrong branch "
                               "or forbidden lambda)");
    }

    if (dir < 0.0) {
        std::reverse(ms.grid.begin(), ms.grid.end());
        std::reverse(ms.Z.begin(), ms.Z.end());
        std::reverse(ms.dZ.begin(), ms.dZ.end());
        std::reverse(ms.log_scale.begin(), ms.log_scale.end());
    }

    if (kind == ModeKind::psi_minus) {
        // normalize so the envelope tends to (1, mu-) at the far left
        Vec2c zfar = ms.Z.front();
        double sfar = ms.log_scale.front();
        cx norm = zfar.a;
        for (std::size_t i = 0; i < ms.Z.size(); ++i) {
            ms.Z[i] = {ms.Z[i].a / norm, ms.Z[i].b / norm};
            ms.dZ[i] = {ms.dZ[i].a / norm, ms.dZ[i].b / norm};
            ms.log_scale[i] -= sfar;
        }
    }
    return ms;
}

/// Local ODE residual of a stored mode at its own nodes:
/// max |Z'(node) - (A - rate I) Z(node)| relative to |Z|.
inline double mode_residual(const ModeSolution& ms, const ModelContext& ctx) {
    detail::EnvelopeRhs rhs{ctx, ms.lambda.lambda, ms.rate};
    double worst = 0.0;
    for (std::size_t i = 0; i < ms.grid.size(); ++i) {
        Vec2c want = rhs(ms.grid[i], ms.Z[i]);
        double err = (want - ms.dZ[i]).norm_inf();
        worst = std::max(worst, err / std::max(1.0, ms.Z[i].norm_inf()));
    }
    return worst;
}

/// (kappa_1^+ - theta_1^+) / sqrt(lambda) at x; finite as lambda -> 0.
/// For |lambda| below 1e-12 the limit is taken by Richardson extrapolation
/// in sqrt(lambda) along the positive real axis.
inline cx cancellation_Lambda(double x, const SpectralPoint& sp,
                              const ModelContext& ctx,
                              const ModeOptions& opt = {}) {
    if (x < 0.0)
        throw std::invalid_argument("cancellation_Lambda: needs x >= 0");
    auto eval = [&](const SpectralPoint& p) {
        ModeOptions o = opt;
        o.x_stop = std::min(0.0, x);
        ModeSolution phi = solve_mode(ModeKind::phi_plus, p, ctx, o);
        ModeSolution psi = solve_mode(ModeKind::psi_plus, p, ctx, o);
        return (psi.z1_at(x) - phi.z1_at(x)) / p.s;
    };
    if (std::abs(sp.lambda) >= 1e-12) return eval(sp);
    double s0 = 1e-3;
    SpectralPoint pa = make_spectral_point(cx(s0 * s0, 0.0), ctx);
    SpectralPoint pb = make_spectral_point(cx(0.25 * s0 * s0, 0.0), ctx);
    cx la = eval(pa), lb = eval(pb);
    return lb + (lb - la) / 3.0; // eliminate the O(s^2) term
}

} // namespace kpplab
