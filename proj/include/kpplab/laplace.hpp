#pragma once

#include <map>
#include <memory>

#include "kpplab/common.hpp"
#include "kpplab/contour.hpp"
#include "kpplab/fit.hpp"
#include "kpplab/green_lambda.hpp"

namespace kpplab {

struct GreenTimeSample {
    double t = 0.0, x = 0.0, y = 0.0;
    double value = 0.0;
    double im_ratio = 0.0; // |Im| / (|Re| + guard); conjugate symmetry check
    TimeRegime regime = TimeRegime::bulk;
    bool converged = true;
};

inline double heat_kernel(double t, double x, double y) {
    double d = x - y;
    return std::exp(-d * d / (4.0 * t)) / std::sqrt(4.0 * pi * t);
}

/// Temporal Green's function
///   G(t,x,y) = (1/2 pi i) \int_Gamma e^{lambda t} G_lambda(x,y) d lambda
/// computed by Gauss-Legendre panels along a ContourSpec. Pointwise
/// evaluators are cached per lambda node, so sweeps over (x, y) at a
/// fixed contour cost one mode solve per node only.
class GreenTimeEvaluator {
public:
    explicit GreenTimeEvaluator(const ModelContext& ctx, ContourParams cp = {},
                                ModeOptions mopt = {})
        : ctx_(&ctx), cp_(cp), mopt_(mopt) {
        mopt_.allow_spectral_continuation = true;
    }

    const ModelContext& context() const { return *ctx_; }
    const ContourParams& params() const { return cp_; }

    /// Restrict the stored mode span for cached evaluators; on_contour may
    /// then only be queried with x, y inside [lo, hi]. Cuts the memory of
    /// large sweeps.
    void set_span(double lo, double hi) {
        span_lo_ = lo;
        span_hi_ = hi;
        cache_.clear();
    }

    const GreenLambdaEvaluator& lambda_evaluator(cx lam) {
        auto key = std::make_pair(lam.real(), lam.imag());
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
        if (cache_.size() > cache_cap_) cache_.clear();
        SpectralPoint sp = make_spectral_point(lam, *ctx_);
        ModeOptions mo = mopt_;
        auto ev = std::make_shared<GreenLambdaEvaluator>(
            ModePair(solve_mode(ModeKind::phi_plus, sp, *ctx_,
                                with_stop(mo, span_lo_)),
                     solve_mode(ModeKind::phi_minus, sp, *ctx_,
                                with_stop(mo, span_hi_))));
        return *cache_.emplace(key, std::move(ev)).first->second;
    }

    /// Contour sum at (t, x, y); the contour may have been built for a
    /// different (smaller) t, which remains valid by contour independence.
    double on_contour(const ContourSpec& c, double t, double x, double y,
                      double* im_ratio = nullptr) {
        ScaledAccumulator acc;
        double max_exp = -1e300;
        for (const auto& seg : c.segments) {
            for (const auto& node : seg.nodes) {
                double et = node.lambda.real() * t;
                if (et < max_exp - 180.0) continue; // no |G| can rescue this
                const GreenLambdaEvaluator& ev = lambda_evaluator(node.lambda);
                ScaledC g = ev.value_scaled(x, y);
                ScaledC term = g * scaled_exp(node.lambda * t);
                term.mantissa *= node.weight / (2.0 * pi * cx(0.0, 1.0));
                acc.add(term);
                max_exp = std::max(max_exp, term.log_abs());
            }
        }
        cx v = acc.total().value();
        if (im_ratio)
            *im_ratio = std::abs(v.imag()) / (std::abs(v.real()) + 1e-300);
        return v.real();
    }

    /// Single-point contour sum with per-node throwaway evaluators whose
    /// mode spans are trimmed to [min(x,y), max(x,y)]; O(1) memory.
    double single_point(const ContourSpec& c, double t, double x, double y,
                        double* im_ratio = nullptr) const {
        ScaledAccumulator acc;
        double max_exp = -1e300;
        ModeOptions mo = mopt_;
        for (const auto& seg : c.segments) {
            for (const auto& node : seg.nodes) {
                double et = node.lambda.real() * t;
                if (et < max_exp - 180.0) continue;
                SpectralPoint sp = make_spectral_point(node.lambda, *ctx_);
                GreenLambdaEvaluator ev(
                    ModePair(solve_mode(ModeKind::phi_plus, sp, *ctx_,
                                        with_stop(mo, std::min(x, y))),
                             solve_mode(ModeKind::phi_minus, sp, *ctx_,
                                        with_stop(mo, std::max(x, y)))));
                ScaledC term =
                    ev.value_scaled(x, y) * scaled_exp(node.lambda * t);
                term.mantissa *= node.weight / (2.0 * pi * cx(0.0, 1.0));
                acc.add(term);
                max_exp = std::max(max_exp, term.log_abs());
            }
        }
        cx v = acc.total().value();
        if (im_ratio)
            *im_ratio = std::abs(v.imag()) / (std::abs(v.real()) + 1e-300);
        return v.real();
    }

    /// Build the (t,x,y)-adapted contour, evaluate, and verify quadrature
    /// convergence by doubling the panel count. Throws solver_error if the
    /// doubled result moves by more than rtol relative (above a small
    /// absolute floor that covers cancellation noise in deep tails).
    GreenTimeSample value(double t, double x, double y, double rtol = 1e-6,
                          double abs_floor = 1e-12) const {
        ContourSpec c1 = build_contour(t, x, y, cp_, ctx_->prm);
        double im1 = 0.0, im2 = 0.0;
        double v1 = single_point(c1, t, x, y, &im1);
        ContourParams cp2 = cp_;
        cp2.refine = 2 * cp_.refine;
        ContourSpec c2 = build_contour(t, x, y, cp2, ctx_->prm);
        double v2 = single_point(c2, t, x, y, &im2);
        GreenTimeSample s;
        s.t = t;
        s.x = x;
        s.y = y;
        s.value = v2;
        s.im_ratio = im2;
        s.regime = c1.regime;
        s.converged = std::abs(v2 - v1) <=
                      std::max(rtol * std::abs(v2), abs_floor);
        if (!s.converged)
            throw solver_error("green_time: quadrature did not converge "
                               "under panel doubling");
        return s;
    }

    void clear_cache() { cache_.clear(); }
    std::size_t cache_size() const { return cache_.size(); }

private:
    static ModeOptions with_stop(ModeOptions mo, double stop) {
        if (!std::isnan(stop)) mo.x_stop = stop;
        return mo;
    }

    const ModelContext* ctx_;
    ContourParams cp_;
    ModeOptions mopt_;
    double span_lo_ = NAN, span_hi_ = NAN;
    std::size_t cache_cap_ = 4000;
    std::map<std::pair<double, double>,
             std::shared_ptr<GreenLambdaEvaluator>> cache_;
};

/// One-shot evaluation against a caller-supplied contour.
inline GreenTimeSample green_time(double t, double x, double y,
                                  const ContourSpec& c,
                                  const ModelContext& ctx,
                                  ContourParams cp = {}) {
    GreenTimeEvaluator ev(ctx, cp);
    GreenTimeSample s;
    s.t = t;
    s.x = x;
    s.y = y;
    s.regime = c.regime;
    s.value = ev.single_point(c, t, x, y, &s.im_ratio);
    return s;
}

struct TimeBoundReport {
    double slope = 0.0;        // log-log rate of sup_{|x-y|<=1} |G(t,.,.)|
    double kappa = 0.0;        // fitted Gaussian width parameter
    double c_bulk = 0.0;       // sup |G| / ((1+d) t^{-3/2} e^{-d^2/kappa t} + e^{-r t})
    double c_fast = 0.0;       // sup |G| sqrt(t) e^{d^2/(kappa t)} over fast samples
    double r = 0.0;            // exponential remainder rate used (= delta0)
    std::vector<double> ts, sups;
};

/// Measure the bound envelopes of the temporal kernel on (t, x, y) grids.
/// kappa is fitted from the spatial log-Gaussian profile at the largest
/// bulk t; constants are suprema of |G| over the stated envelopes.
inline TimeBoundReport verify_time_bounds(GreenTimeEvaluator& ev,
                                          std::span<const double> ts_bulk,
                                          std::span<const double> offsets,
                                          std::span<const double> ys,
                                          double kappa_safety = 1.25) {
    TimeBoundReport rep;
    rep.r = ev.params().delta0;

    // sup over |x-y| <= 1 per t, one shared contour per t
    for (double t : ts_bulk) {
        ContourSpec c = build_contour(t, 0.5, 0.0, ev.params(),
                                      ev.context().prm);
        double sup = 0.0;
        for (double y : ys)
            for (double off : offsets)
                if (std::abs(off) <= 1.0)
                    sup = std::max(sup,
                                   std::abs(ev.on_contour(c, t, y + off, y)));
        rep.ts.push_back(t);
        rep.sups.push_back(sup);
    }
    rep.slope = fit_loglog_slope(rep.ts, rep.sups);

    // Gaussian profile fit at the largest t
    double tg = ts_bulk.back();
    {
        ContourSpec c = build_contour(tg, 0.0, 0.0, ev.params(),
                                      ev.context().prm);
        std::vector<double> u, l;
        for (double d = 0.0; d <= std::sqrt(20.0 * tg); d += std::sqrt(tg) / 2.0) {
            double g = std::abs(ev.on_contour(c, tg, d, 0.0));
            if (g > 1e-280) {
                u.push_back(d * d / tg);
                l.push_back(std::log(g));
            }
        }
        LineFit lf = fit_line(u, l);
        rep.kappa = -1.0 / lf.slope;
    }

    double kap = rep.kappa * kappa_safety;
    // bulk constant over the same samples
    for (std::size_t i = 0; i < rep.ts.size(); ++i) {
        double t = rep.ts[i];
        ContourSpec c = build_contour(t, 0.5, 0.0, ev.params(),
                                      ev.context().prm);
        for (double y : ys) {
            for (double off : offsets) {
                double d = std::abs(off);
                double g = std::abs(ev.on_contour(c, t, y + off, y));
                double env = (1.0 + d) / std::pow(t, 1.5) *
                                 std::exp(-d * d / (kap * t)) +
                             std::exp(-rep.r * t);
                rep.c_bulk = std::max(rep.c_bulk, g / env);
            }
        }
    }
    // fast/short samples: t < 1 and |x-y| >= K t
    const double K = ev.params().split_K(ev.context().prm);
    for (double t : {0.25, 0.5}) {
        for (double d : {0.0, 1.0, 2.0, 4.0}) {
            GreenTimeSample s = ev.value(t, 0.5 * d, -0.5 * d);
            double env = std::exp(-d * d / (kap * t)) / std::sqrt(t);
            rep.c_fast = std::max(rep.c_fast, std::abs(s.value) / env);
        }
    }
    for (double t : {1.0, 2.0}) {
        double d = K * t + 2.0;
        GreenTimeSample s = ev.value(t, 0.5 * d, -0.5 * d);
        double env = std::exp(-d * d / (kap * t)) / std::sqrt(t);
        rep.c_fast = std::max(rep.c_fast, std::abs(s.value) / env);
    }
    return rep;
}

/// \int G(t, x, y) h(y) dy by trapezoid over the sample grid of h, with a
/// single rho_min contour shared across all (x, y) pairs (valid for every
/// pair by contour independence).
inline std::vector<double> convolve_green(GreenTimeEvaluator& ev, double t,
                                          std::span<const double> ygrid,
                                          std::span<const double> h,
                                          std::span<const double> xs) {
    if (ygrid.size() != h.size())
        throw std::invalid_argument("convolve_green: grid/sample mismatch");
    ContourSpec c = build_contour(t, 0.0, 0.0, ev.params(), ev.context().prm);
    double dy = ygrid[1] - ygrid[0];
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        double acc = 0.0;
        for (std::size_t j = 0; j < ygrid.size(); ++j) {
            if (h[j] == 0.0) continue;
            double w = (j == 0 || j + 1 == ygrid.size()) ? 0.5 : 1.0;
            acc += w * ev.on_contour(c, t, x, ygrid[j]) * h[j];
        }
        out.push_back(acc * dy);
    }
    return out;
}

} // namespace kpplab
