#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "kpplab/common.hpp"
#include "kpplab/context.hpp"
#include "kpplab/fit.hpp"
#include "kpplab/laplace.hpp"
#include "kpplab/quadrature.hpp"
#include "kpplab/tridiag.hpp"

namespace kpplab {

/// Stable form of the Taylor remainder N(mu, nu) = (f(mu+nu) - f(mu)
/// - f'(mu) nu) / nu, with the nu -> 0 limit f''(mu) nu / 2 below 1e-8.
inline double nonlinear_remainder(const Nonlinearity& nl, double mu,
                                  double nu) {
    if (std::abs(nu) < 1e-8) return 0.5 * nl.f2(mu) * nu;
    return (nl.f(mu + nu) - nl.f(mu) - nl.f1(mu) * nu) / nu;
}

struct SimGrid {
    double xmin = -100.0, xmax = 90.0, h = 0.02;
    std::size_t n = 0;

    SimGrid() { n = count(); }
    SimGrid(double a, double b, double step) : xmin(a), xmax(b), h(step) {
        n = count();
    }
    double x(std::size_t i) const { return xmin + h * double(i); }

private:
    std::size_t count() const {
        return static_cast<std::size_t>(std::llround((xmax - xmin) / h)) + 1;
    }
};

struct HistorySample {
    double t = 0.0;
    double sup = 0.0;          // sup |p|
    double sup_weighted = 0.0; // sup |p| / (1+|x|)
    double theta = 0.0;        // running sup of (1+t)^{3/2} sup_weighted
};

struct SimState {
    SimGrid grid;
    std::vector<double> p;
    double t = 0.0;
    std::vector<HistorySample> history;
    double theta_running = 0.0;
    double boundary_max = 0.0; // largest |p| ever seen at the two end nodes

    // multistep memory
    std::vector<double> prev_rhs;
    double prev_dt = 0.0;

    double sup() const {
        double m = 0.0;
        for (double v : p) m = std::max(m, std::abs(v));
        return m;
    }
    double sup_weighted() const {
        double m = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            m = std::max(m, std::abs(p[i]) / (1.0 + std::abs(grid.x(i))));
        return m;
    }
    void record() {
        HistorySample s;
        s.t = t;
        s.sup = sup();
        s.sup_weighted = sup_weighted();
        theta_running = std::max(theta_running,
                                 std::pow(1.0 + t, 1.5) * s.sup_weighted);
        s.theta = theta_running;
        history.push_back(s);
        boundary_max = std::max({boundary_max, std::abs(p.front()),
                                 std::abs(p.back())});
    }
};

inline SimState make_state(const SimGrid& g,
                           const std::function<double(double)>& p0) {
    SimState s;
    s.grid = g;
    s.p.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) s.p[i] = p0(g.x(i));
    s.p.front() = 0.0;
    s.p.back() = 0.0;
    s.record();
    return s;
}

/// Method-of-lines IMEX stepper for p_t = L p [+ N(q*, w p) p]:
/// second-order centered differences, Crank-Nicolson on the diffusion
/// block, variable-step Adams-Bashforth-2 on advection/reaction (and the
/// nonlinear term), homogeneous Dirichlet ends. First step falls back to
/// IMEX Euler.
class Evolution {
public:
    enum class Kind { linear, nonlinear, full_u };

    Evolution(const ModelContext& ctx, const SimGrid& g, Kind kind)
        : ctx_(&ctx), g_(g), kind_(kind) {
        z0_.resize(g.n);
        z1_.resize(g.n);
        w_.resize(g.n);
        qs_.resize(g.n);
        for (std::size_t i = 0; i < g.n; ++i) {
            double x = g.x(i);
            z0_[i] = ctx.zeta0(x);
            z1_[i] = ctx.zeta1(x);
            w_[i] = ctx.omega(x);
            qs_[i] = ctx.pure_heat ? 0.0 : ctx.front.q_at(x);
        }
    }

    const SimGrid& grid() const { return g_; }

    /// Advance one step of size dt. Throws on blow-up or guard-band
    /// violation (u = q* + w p must stay in [-0.1, 1.1]).
    void step(SimState& s, double dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
        const std::size_t n = g_.n;
        if (lu_dt_ != dt) {
            std::vector<double> sub(n), diag(n), sup(n);
            double r = 0.5 * dt / (g_.h * g_.h);
            sub[0] = 0.0; diag[0] = 1.0; sup[0] = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                sub[i] = -r;
                diag[i] = 1.0 + 2.0 * r;
                sup[i] = -r;
            }
            sub[n - 1] = 0.0; diag[n - 1] = 1.0; sup[n - 1] = 0.0;
            lu_ = TridiagonalLU(sub, diag, sup);
            lu_dt_ = dt;
        }

        std::vector<double> F(n);
        explicit_rhs(s.p, F);

        double w1 = 1.0, w0 = 0.0;
        if (!s.prev_rhs.empty() && s.prev_dt > 0.0) {
            double rr = dt / s.prev_dt;
            w1 = 1.0 + 0.5 * rr;
            w0 = -0.5 * rr;
        }

        std::vector<double> rhs(n, 0.0);
        double r = 0.5 * dt / (g_.h * g_.h);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double diff = s.p[i + 1] - 2.0 * s.p[i] + s.p[i - 1];
            rhs[i] = s.p[i] + r * diff +
                     dt * (w1 * F[i] + (w0 != 0.0 ? w0 * s.prev_rhs[i] : 0.0));
        }
        lu_.solve_inplace(rhs);

        double old_sup = s.sup();
        s.p.swap(rhs);
        s.p.front() = 0.0;
        s.p.back() = 0.0;
        s.t += dt;
        s.prev_rhs.swap(F);
        s.prev_dt = dt;

        double new_sup = s.sup();
        if (!std::isfinite(new_sup) ||
            (old_sup > 1e-280 && new_sup > 10.0 * old_sup))
            throw solver_error("step: instability detected");
    }

private:
    void explicit_rhs(const std::vector<double>& p,
                      std::vector<double>& F) const {
        const std::size_t n = g_.n;
        const double i2h = 0.5 / g_.h;
        F[0] = 0.0;
        F[n - 1] = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double px = (p[i + 1] - p[i - 1]) * i2h;
            double val;
            if (kind_ == Kind::full_u) {
                // u_t = u_xx + cstar u_x + f(u); diffusion handled implicitly
                val = ctx_->prm.cstar * px + ctx_->nl.f(p[i]);
            } else {
                val = z1_[i] * px + z0_[i] * p[i];
                if (kind_ == Kind::nonlinear) {
                    double nu = w_[i] * p[i];
                    double u = qs_[i] + nu;
                    if (u < -0.1 || u > 1.1)
                        throw solver_error("step: guard band violated, "
                                           "perturbation too large");
                    val += nonlinear_remainder(ctx_->nl, qs_[i], nu) * p[i];
                }
            }
            F[i] = val;
        }
    }

    const ModelContext* ctx_;
    SimGrid g_;
    Kind kind_;
    std::vector<double> z0_, z1_, w_, qs_;
    TridiagonalLU lu_;
    double lu_dt_ = -1.0;
};

/// One linear step of p_t = L p.
inline SimState step_linear(const ModelContext& ctx, SimState s, double dt) {
    Evolution ev(ctx, s.grid, Evolution::Kind::linear);
    ev.step(s, dt);
    return s;
}

/// One step of the full perturbation equation including N(q*, w p) p.
inline SimState step_nonlinear(const ModelContext& ctx, SimState s,
                               double dt) {
    Evolution ev(ctx, s.grid, Evolution::Kind::nonlinear);
    ev.step(s, dt);
    return s;
}

struct DecayReport {
    std::vector<HistorySample> series;
    double slope = 0.0;        // fitted on sup_weighted over t in [10, T]
    double omega_const = 0.0;  // sup (1+|x|) w(x)
    double p0_sup = 0.0;       // ||p0||_inf
    double p0_weighted_l1 = 0.0; // int (1+|y|) |p0|
    bool guard_ok = true;
    double boundary_max = 0.0;
    double theta_final = 0.0;
};

inline double omega_infinity(const ModelContext& ctx) {
    double m = 0.0;
    for (double x = -120.0; x <= 120.0; x += 0.01)
        m = std::max(m, (1.0 + std::abs(x)) * ctx.omega(x));
    return m;
}

struct DecayOptions {
    SimGrid grid{-100.0, 90.0, 0.02};
    double dt = 0.01;
    double t_final = 200.0;
    double record_dt = 0.25;
    double fit_from = 10.0;
    bool nonlinear = true;
};

/// Evolve the (non)linear perturbation equation and report the running
/// Theta(t) = sup_{tau<=t} (1+tau)^{3/2} sup_x |p|/(1+|x|) together with
/// the fitted decay slope of the weighted sup norm.
inline DecayReport run_decay_experiment(
    const ModelContext& ctx, const std::function<double(double)>& p0,
    const DecayOptions& opt = {}) {
    SimState s = make_state(opt.grid, p0);
    DecayReport rep;
    rep.omega_const = omega_infinity(ctx);
    rep.p0_sup = s.sup();
    {
        std::vector<double> integrand(opt.grid.n);
        for (std::size_t i = 0; i < opt.grid.n; ++i)
            integrand[i] = (1.0 + std::abs(opt.grid.x(i))) *
                           std::abs(s.p[i]);
        rep.p0_weighted_l1 = trapezoid(integrand, opt.grid.h);
    }

    Evolution ev(ctx, opt.grid,
                 opt.nonlinear ? Evolution::Kind::nonlinear
                               : Evolution::Kind::linear);
    double next_record = opt.record_dt;
    try {
        while (s.t < opt.t_final - 1e-12) {
            ev.step(s, opt.dt);
            if (s.t >= next_record - 1e-12) {
                s.record();
                next_record += opt.record_dt;
            }
        }
    } catch (const solver_error&) {
        rep.guard_ok = false;
        throw;
    }
    s.record();

    std::vector<double> ts, vals;
    for (const auto& hsm : s.history) {
        if (hsm.t >= opt.fit_from && hsm.sup_weighted > 0.0) {
            ts.push_back(hsm.t);
            vals.push_back(hsm.sup_weighted);
        }
    }
    rep.slope = fit_loglog_slope(ts, vals);
    rep.series = s.history;
    rep.boundary_max = s.boundary_max;
    rep.theta_final = s.theta_running;
    return rep;
}

/// Trajectory snapshots for the Duhamel identity check.
struct Trajectory {
    SimGrid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> p;       // field at each time
    std::vector<std::vector<double>> source;  // N(q*, w p) p at each time
};

inline Trajectory record_trajectory(const ModelContext& ctx,
                                    const std::function<double(double)>& p0,
                                    const SimGrid& g, double dt, double t_end,
                                    double snap_dt, bool nonlinear) {
    Trajectory tr;
    tr.grid = g;
    Evolution ev(ctx, g,
                 nonlinear ? Evolution::Kind::nonlinear
                           : Evolution::Kind::linear);
    SimState s = make_state(g, p0);
    auto snap = [&]() {
        tr.times.push_back(s.t);
        tr.p.push_back(s.p);
        std::vector<double> src(g.n, 0.0);
        if (nonlinear) {
            for (std::size_t i = 0; i < g.n; ++i) {
                double nu = ctx.omega(g.x(i)) * s.p[i];
                double qv = ctx.pure_heat ? 0.0 : ctx.front.q_at(g.x(i));
                src[i] = nonlinear_remainder(ctx.nl, qv, nu) * s.p[i];
            }
        }
        tr.source.push_back(std::move(src));
    };
    snap();
    double next = snap_dt;
    while (s.t < t_end - 1e-12) {
        ev.step(s, dt);
        if (s.t >= next - 1e-12) {
            snap();
            next += snap_dt;
        }
    }
    return tr;
}

/// Evaluate both sides of the integral identity
///   p(t,x) = int G(t,x,y) p0(y) dy
///          + int_0^t int G(t-tau,x,y) src(tau,y) dy dtau
/// at the sampled x locations and return the largest mismatch. The last
/// tau panel [t - Delta, t] is integrated analytically through the
/// short-time expansion int_0^Delta e^{s L} g ds ~ Delta g + Delta^2/2 L g.
inline double duhamel_residual(const ModelContext& ctx,
                               GreenTimeEvaluator& gte, const Trajectory& tr,
                               double t, std::span<const double> xs) {
    // locate t in the snapshot times
    std::size_t it = 0;
    while (it < tr.times.size() && tr.times[it] < t - 1e-9) ++it;
    if (it == tr.times.size() ||
        std::abs(tr.times[it] - t) > 1e-6)
        throw std::invalid_argument("duhamel_residual: t not snapshotted");
    double snap_dt = tr.times[1] - tr.times[0];
    if (snap_dt > 0.25 + 1e-12)
        throw std::invalid_argument("duhamel_residual: tau step too coarse");

    const SimGrid& g = tr.grid;
    double dy = g.h;
    bool nonlinear = false;
    for (const auto& src : tr.source) {
        for (double v : src) {
            if (v != 0.0) { nonlinear = true; break; }
        }
        if (nonlinear) break;
    }

    // master contour valid for all s >= snap_dt
    ContourSpec master = build_contour(std::min(snap_dt, t), 0.0, 0.0,
                                       gte.params(), gte.context().prm);

    auto convolve = [&](double s, const std::vector<double>& field,
                        double x) {
        double acc = 0.0;
        for (std::size_t j = 0; j < g.n; ++j) {
            if (field[j] == 0.0) continue;
            double w = (j == 0 || j + 1 == g.n) ? 0.5 : 1.0;
            acc += w * gte.on_contour(master, s, x, g.x(j)) * field[j];
        }
        return acc * dy;
    };

    double worst = 0.0;
    for (double x : xs) {
        double rhs = convolve(t, tr.p[0], x);
        if (nonlinear) {
            // tau integral over snapshot panels, trapezoid in tau up to
            // t - Delta, then the analytic short-time closure
            double Delta = snap_dt;
            std::size_t last = it; // index of time t
            for (std::size_t k = 0; k + 1 <= last; ++k) {
                if (tr.times[k + 1] > t - Delta + 1e-9) break;
                double s0 = t - tr.times[k];
                double s1 = t - tr.times[k + 1];
                double f0 = convolve(s0, tr.source[k], x);
                double f1 = convolve(s1, tr.source[k + 1], x);
                rhs += 0.5 * (f0 + f1) * (tr.times[k + 1] - tr.times[k]);
            }
            // closure on [t - Delta, t]: Delta g + Delta^2/2 L g at tau = t
            const std::vector<double>& gsrc = tr.source[last];
            auto idx = static_cast<std::size_t>(
                std::llround((x - g.xmin) / g.h));
            double lg = 0.0;
            if (idx >= 1 && idx + 1 < g.n) {
                double gxx = (gsrc[idx + 1] - 2.0 * gsrc[idx] +
                              gsrc[idx - 1]) / (g.h * g.h);
                double gx = (gsrc[idx + 1] - gsrc[idx - 1]) / (2.0 * g.h);
                lg = gxx + ctx.zeta1(x) * gx + ctx.zeta0(x) * gsrc[idx];
            }
            rhs += Delta * gsrc[idx] + 0.5 * Delta * Delta * lg;
        }
        // left side: p(t, x) at the nearest grid node
        auto idx = static_cast<std::size_t>(std::llround((x - g.xmin) / g.h));
        worst = std::max(worst, std::abs(tr.p[it][idx] - rhs));
    }
    return worst;
}

/// Numerical check of the convolution inequality
///   int_0^t (1+t-tau)^{-3/2} (1+tau)^{-3} dtau <= C (1+t)^{-3/2}:
/// returns (1+t)^{3/2} * LHS for each requested t.
inline std::vector<double> convolution_inequality_check(
    std::span<const double> ts, double tol = 1e-10) {
    std::vector<double> out;
    for (double t : ts) {
        if (t <= 0.0) {
            out.push_back(0.0);
            continue;
        }
        auto f = [t](double tau) {
            return std::pow(1.0 + t - tau, -1.5) * std::pow(1.0 + tau, -3.0);
        };
        double v = adaptive_simpson(f, 0.0, t, tol);
        out.push_back(std::pow(1.0 + t, 1.5) * v);
    }
    return out;
}

} // namespace kpplab
