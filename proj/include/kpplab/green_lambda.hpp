#pragma once

#include <random>
#include <vector>

#include "kpplab/common.hpp"
#include "kpplab/evans.hpp"
#include "kpplab/fit.hpp"
#include "kpplab/modes.hpp"
#include "kpplab/tridiag.hpp"

namespace kpplab {

enum class GreenRegime {
    r1_y_le_0_le_x,
    r2_x_le_0_le_y,
    r3_0_le_y_le_x,
    r4_0_le_x_le_y,
    r5_y_le_x_le_0,
    r6_x_le_y_le_0,
    large_lambda
};

inline GreenRegime classify_regime(double x, double y) {
    if (y <= 0.0 && 0.0 <= x) return GreenRegime::r1_y_le_0_le_x;
    if (x <= 0.0 && 0.0 <= y) return GreenRegime::r2_x_le_0_le_y;
    if (0.0 <= y && y <= x) return GreenRegime::r3_0_le_y_le_x;
    if (0.0 <= x && x <= y) return GreenRegime::r4_0_le_x_le_y;
    if (y <= x && x <= 0.0) return GreenRegime::r5_y_le_x_le_0;
    return GreenRegime::r6_x_le_y_le_0;
}

struct GreenLambdaSample {
    SpectralPoint lambda;
    double x = 0.0, y = 0.0;
    cx value{0.0};
    GreenRegime regime = GreenRegime::r1_y_le_0_le_x;
};

/// Pointwise Green's function
///   G_lambda(x,y) = phi+(x) phi-(y) / W(y)   (x >= y)
///                   phi-(x) phi+(y) / W(y)   (x <= y)
/// assembled from envelope representations; the exponential rates cancel
/// against the Wronskian analytically:
///   x >= y: e^{-s(x-y)}      Zp1(x) Zm1(y) / wenv(y)
///   x <= y: e^{mu+ (x-y)}    Zm1(x) Zp1(y) / wenv(y)
/// with wenv the envelope Wronskian. Both formulas coincide at x = y.
class GreenLambdaEvaluator {
public:
    GreenLambdaEvaluator(const SpectralPoint& sp, const ModelContext& ctx,
                         const ModeOptions& opt = {})
        : pair_(sp, ctx, opt), sp_(sp) {}

    explicit GreenLambdaEvaluator(ModePair pair)
        : pair_(std::move(pair)), sp_(pair_.point()) {}

    ScaledC value_scaled(double x, double y) const {
        const ModeSolution& p = pair_.phi_plus();
        const ModeSolution& m = pair_.phi_minus();
        Vec2c zpy, zmy;
        double cpy, cmy;
        p.envelope_at(y, zpy, cpy);
        m.envelope_at(y, zmy, cmy);
        cx wenv = zpy.a * zmy.b - zpy.b * zmy.a; // scale cpy + cmy
        if (x >= y) {
            Vec2c zpx;
            double cpx;
            p.envelope_at(x, zpx, cpx);
            ScaledC num{zpx.a * zmy.a, cpx + cmy};
            ScaledC den{wenv, cpy + cmy};
            return (num / den * scaled_exp(p.rate * (x - y))).normalized();
        }
        Vec2c zmx;
        double cmx;
        m.envelope_at(x, zmx, cmx);
        ScaledC num{zmx.a * zpy.a, cmx + cpy};
        ScaledC den{wenv, cpy + cmy};
        return (num / den * scaled_exp(m.rate * (x - y))).normalized();
    }

    cx value(double x, double y) const { return value_scaled(x, y).value(); }

    /// d/dx G_lambda(x, y), from the envelope derivative slot (exact, no
    /// finite differencing).
    cx dvalue_dx(double x, double y) const {
        const ModeSolution& p = pair_.phi_plus();
        const ModeSolution& m = pair_.phi_minus();
        Vec2c zpy, zmy;
        double cpy, cmy;
        p.envelope_at(y, zpy, cpy);
        m.envelope_at(y, zmy, cmy);
        cx wenv = zpy.a * zmy.b - zpy.b * zmy.a;
        if (x >= y) {
            Vec2c zpx;
            double cpx;
            p.envelope_at(x, zpx, cpx);
            ScaledC num{zpx.b * zmy.a, cpx + cmy};
            ScaledC den{wenv, cpy + cmy};
            return (num / den * scaled_exp(p.rate * (x - y))).value();
        }
        Vec2c zmx;
        double cmx;
        m.envelope_at(x, zmx, cmx);
        ScaledC num{zmx.b * zpy.a, cmx + cpy};
        ScaledC den{wenv, cpy + cmy};
        return (num / den * scaled_exp(m.rate * (x - y))).value();
    }

    /// Jump of d/dx G across x = y (right limit minus left limit); equals
    /// -1 by construction of the matched solution of (L - lambda) G = -delta.
    cx derivative_jump(double y) const {
        const ModeSolution& p = pair_.phi_plus();
        const ModeSolution& m = pair_.phi_minus();
        Vec2c zp, zm;
        double cp, cm;
        p.envelope_at(y, zp, cp);
        m.envelope_at(y, zm, cm);
        cx wenv = zp.a * zm.b - zp.b * zm.a;
        cx right = zp.b * zm.a / wenv; // lim_{x->y+} using the x >= y branch
        cx left = zm.b * zp.a / wenv;  // lim_{x->y-} using the x <= y branch
        return right - left;
    }

    const ModePair& pair() const { return pair_; }
    const SpectralPoint& point() const { return sp_; }

private:
    ModePair pair_;
    SpectralPoint sp_;
};

inline GreenLambdaSample green_lambda(const SpectralPoint& sp, double x,
                                      double y, const ModelContext& ctx,
                                      const ModeOptions& opt = {}) {
    GreenLambdaEvaluator ev(sp, ctx, opt);
    GreenLambdaSample s;
    s.lambda = sp;
    s.x = x;
    s.y = y;
    s.value = ev.value(x, y);
    s.regime = std::abs(sp.lambda) >= RegionThresholds{}.m_large
                   ? GreenRegime::large_lambda
                   : classify_regime(x, y);
    return s;
}

/// Independent resolvent oracle: solve the centered-difference system
/// (L_h - lambda) g = -e_j / h on a truncated interval with Dirichlet
/// ends. Shares nothing with the mode/Wronskian construction.
struct DiscreteResolvent {
    std::vector<double> grid;
    std::vector<cx> g;
};

inline DiscreteResolvent discrete_resolvent(const ModelContext& ctx,
                                            cx lambda, double y, double x_lo,
                                            double x_hi, double h) {
    const auto n = static_cast<std::size_t>(
                       std::llround((x_hi - x_lo) / h)) + 1;
    DiscreteResolvent r;
    r.grid.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.grid[i] = x_lo + h * double(i);
    auto j = static_cast<std::size_t>(std::llround((y - x_lo) / h));
    std::vector<cx> sub(n), diag(n), sup(n), rhs(n, cx(0.0));
    const double ih2 = 1.0 / (h * h), i2h = 0.5 / h;
    diag[0] = 1.0;
    sup[0] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double z1 = ctx.zeta1(r.grid[i]);
        sub[i] = ih2 - z1 * i2h;
        diag[i] = -2.0 * ih2 + ctx.zeta0(r.grid[i]) - lambda;
        sup[i] = ih2 + z1 * i2h;
    }
    sub[n - 1] = 0.0;
    diag[n - 1] = 1.0;
    rhs[j] = -1.0 / h;
    r.g = solve_tridiagonal(sub, diag, sup, rhs);
    return r;
}

/// Max over the sample set of |G| divided by the predicted small-lambda
/// envelope, per regime. The envelopes are those of the six orderings:
///   (i)/(ii) e^{-+s(x-y)} e^{(mu+ - s) min(x,y)}
///   (iii)/(iv) e^{-+s(x-y)} e^{(s - alpha) min(x,y)}
///   (v) e^{mu-(x-y)}, (vi) e^{mu+(x-y)}
struct RegimeBoundReport {
    double max_ratio[6] = {0, 0, 0, 0, 0, 0};
    int samples[6] = {0, 0, 0, 0, 0, 0};
};

inline double small_lambda_envelope_log(GreenRegime r, double x, double y,
                                        cx s, cx mup, cx mum, double alpha) {
    switch (r) {
        case GreenRegime::r1_y_le_0_le_x:
            return (-s * (x - y)).real() + ((mup - s) * y).real();
        case GreenRegime::r2_x_le_0_le_y:
            return (s * (x - y)).real() + ((mup - s) * x).real();
        case GreenRegime::r3_0_le_y_le_x:
            return (-s * (x - y)).real() + (s.real() - alpha) * y;
        case GreenRegime::r4_0_le_x_le_y:
            return (s * (x - y)).real() + (s.real() - alpha) * x;
        case GreenRegime::r5_y_le_x_le_0:
            return (mum * (x - y)).real();
        case GreenRegime::r6_x_le_y_le_0:
            return (mup * (x - y)).real();
        default:
            return 0.0;
    }
}

inline RegimeBoundReport verify_small_lambda_bounds(
    const ModelContext& ctx, std::span<const cx> lambdas,
    std::span<const double> xs, std::span<const double> ys,
    const ModeOptions& opt = {}) {
    RegimeBoundReport rep;
    for (cx lam : lambdas) {
        SpectralPoint sp = make_spectral_point(lam, ctx);
        if (sp.region != SpectralRegion::small)
            throw std::invalid_argument(
                "verify_small_lambda_bounds: lambda outside small region");
        GreenLambdaEvaluator ev(sp, ctx, opt);
        cx mup = ctx.mu_plus(lam), mum = ctx.mu_minus(lam);
        for (double x : xs) {
            for (double y : ys) {
                GreenRegime r = classify_regime(x, y);
                double env = small_lambda_envelope_log(r, x, y, sp.s, mup,
                                                       mum, ctx.prm.alpha);
                double lg = ev.value_scaled(x, y).log_abs();
                double ratio = std::exp(lg - env);
                int k = static_cast<int>(r);
                rep.max_ratio[k] = std::max(rep.max_ratio[k], ratio);
                rep.samples[k]++;
            }
        }
    }
    return rep;
}

struct LargeLambdaReport {
    double eta_fit = 0.0;   // decay rate in sqrt(|lambda|) |x-y|
    double c_fit = 0.0;     // sup |G| sqrt(|lambda|) e^{eta sqrt(|lambda|) d}
    double eta_min = 0.0;   // weakest per-lambda fit
};

inline LargeLambdaReport verify_large_lambda_bound(
    const ModelContext& ctx, std::span<const cx> lambdas,
    std::span<const double> dists, const ModeOptions& opt = {}) {
    LargeLambdaReport rep;
    rep.eta_min = 1e300;
    std::vector<std::pair<double, double>> samples; // (sqrt|lam| d, log|G|+log sqrt|lam|)
    RegionThresholds th;
    for (cx lam : lambdas) {
        SpectralPoint sp = make_spectral_point(lam, ctx);
        if (!(std::abs(lam) > th.m_large && th.in_omega_delta(lam)))
            throw std::invalid_argument(
                "verify_large_lambda_bound: lambda outside large region");
        ModeOptions o = opt;
        o.allow_spectral_continuation = true;
        GreenLambdaEvaluator ev(sp, ctx, o);
        double rt = std::sqrt(std::abs(lam));
        std::vector<double> us, ls;
        for (double d : dists) {
            double lg = ev.value_scaled(0.5 * d, -0.5 * d).log_abs();
            us.push_back(rt * d);
            ls.push_back(lg + std::log(rt));
            samples.emplace_back(rt * d, lg + std::log(rt));
        }
        LineFit lf = fit_line(us, ls);
        rep.eta_min = std::min(rep.eta_min, -lf.slope);
    }
    // pooled fit and the constant at the pooled eta
    std::vector<double> u, l;
    for (auto& s : samples) {
        u.push_back(s.first);
        l.push_back(s.second);
    }
    LineFit lf = fit_line(u, l);
    rep.eta_fit = -lf.slope;
    double c = 0.0;
    for (auto& s : samples)
        c = std::max(c, std::exp(s.second + rep.eta_fit * s.first));
    rep.c_fit = c;
    return rep;
}

} // namespace kpplab
