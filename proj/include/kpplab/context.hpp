#pragma once

#include <memory>
#include <string>

#include "kpplab/front.hpp"
#include "kpplab/model.hpp"
#include "kpplab/nonlinearity.hpp"

namespace kpplab {

struct ModelConfig {
    std::string nonlinearity = "kpp";
    double beta = 0.2;
    double alpha = 0.8;
    double domain_left = -60.0;
    double domain_right = 60.0;
    double grid_step = 0.02;
};

/// Everything downstream modules need: reaction term, derived constants,
/// weight and the solved front. Immutable after construction; all
/// evaluations are pure.
class ModelContext {
public:
    Nonlinearity nl;
    ModelParams prm;
    Weight weight;
    FrontProfile front;
    bool pure_heat = false;

    /// zeta1 = cstar + 2 w'/w; vanishes for x >= 1, equals cstar + 2 beta
    /// for x <= -1.
    double zeta1(double x) const {
        if (pure_heat) return 0.0;
        return prm.cstar + 2.0 * weight.dlogw(x);
    }

    /// zeta0 = f'(q*) + cstar w'/w + w''/w.
    double zeta0(double x) const {
        if (pure_heat) return 0.0;
        return nl.f1(front.q_at(x)) + prm.cstar * weight.dlogw(x) +
               weight.d2w_over_w(x);
    }

    cx mu_plus(cx lambda) const {
        if (pure_heat) return std::sqrt(lambda);
        return mu_pm(lambda, prm, +1);
    }
    cx mu_minus(cx lambda) const {
        if (pure_heat) return -std::sqrt(lambda);
        return mu_pm(lambda, prm, -1);
    }
    double distance_to_gamma_minus(cx lambda) const {
        return gamma_minus_distance(lambda, prm);
    }

    double omega(double x) const { return pure_heat ? 1.0 : weight.omega(x); }

    double x_min() const { return pure_heat ? -60.0 : front.xmin; }
    double x_max() const { return pure_heat ? 60.0 : front.xmax; }
};

inline ModelContext make_context(const ModelConfig& cfg = {}) {
    ModelContext ctx;
    ctx.nl = make_nonlinearity(cfg.nonlinearity);
    ctx.prm = make_model(ctx.nl.f1(0.0), ctx.nl.f1(1.0), cfg.beta, cfg.alpha);
    ctx.weight = Weight(ctx.prm);
    FrontOptions fo;
    fo.x_minus = cfg.domain_left;
    fo.x_plus = cfg.domain_right;
    fo.h = cfg.grid_step;
    ctx.front = solve_front(ctx.nl, ctx.prm, fo);
    return ctx;
}

/// Constant-coefficient control problem: zeta0 = zeta1 = 0, w = 1,
/// so the operator is the plain Laplacian and every Green's function
/// object has a heat-kernel closed form.
inline ModelContext make_pure_heat_context() {
    ModelContext ctx;
    ctx.nl = make_nonlinearity("kpp");
    ctx.prm = ModelParams{};
    ctx.prm.cstar = 0.0;
    ctx.prm.gstar = 0.0;
    ctx.prm.beta = 0.0;
    ctx.prm.alpha = 0.8;
    ctx.prm.beta_max = 0.0;
    ctx.prm.f1_at_0 = 0.0;
    ctx.prm.f1_at_1 = 0.0;
    ctx.pure_heat = true;
    return ctx;
}

} // namespace kpplab
