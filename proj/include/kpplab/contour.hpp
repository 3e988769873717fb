#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "kpplab/common.hpp"
#include "kpplab/context.hpp"
#include "kpplab/quadrature.hpp"

namespace kpplab {

enum class TimeRegime { short_or_fast, bulk };

struct ContourParams {
    double theta = 5.0 * pi / 6.0; // ray angle, pi/2 < theta < pi
    double delta0 = 0.05;          // ray offset: lambda = -delta0 + e^{i theta} l
    double L = 4.0;                // bulk parabola: rho = |x-y| / (L t)
    double K = 0.0;                // regime split |x-y| <= K t; 0 -> 4 max(1, cstar)
    double rho_min = 0.05;         // parabola floor when x = y
    double tail_cut = 1e-18;       // ray truncation threshold
    int gl_order = 12;
    int refine = 1;                // panel multiplier for convergence checks

    double split_K(const ModelParams& m) const {
        return K > 0.0 ? K : 4.0 * std::max(1.0, m.cstar);
    }
};

struct QuadNode {
    cx lambda;
    cx weight; // Gauss weight times d lambda / d parameter
};

struct ContourSegment {
    enum class Kind { parabola, ray_upper, ray_lower } kind;
    double p0 = 0.0, p1 = 0.0; // parameter interval (k or ell)
    cx start, end;             // endpoints in the lambda plane
    std::vector<QuadNode> nodes;
};

/// Laplace-inversion path: a parabolic segment sqrt(lambda) = rho + i k,
/// k in [-k*, k*], continued by the two rays of
/// Gamma_delta = { -delta0 + cos(theta)|l| + i sin(theta) l }, with
/// Gauss-Legendre panels per segment. Panel density follows the
/// variation of |e^{lambda t}|.
struct ContourSpec {
    TimeRegime regime = TimeRegime::bulk;
    double t = 1.0;
    double rho = 0.0, kstar = 0.0, ell1 = 0.0, ell_max = 0.0;
    double theta = 0.0, delta0 = 0.0;
    std::vector<ContourSegment> segments;

    std::size_t node_count() const {
        std::size_t n = 0;
        for (auto& s : segments) n += s.nodes.size();
        return n;
    }
    double max_joint_mismatch() const {
        double m = 0.0;
        // parabola is segments[0]; rays attach at its two ends
        const auto& par = segments[0];
        m = std::max(m, std::abs(par.end - segments[1].start));
        m = std::max(m, std::abs(par.start - segments[2].start));
        return m;
    }
};

namespace detail {

inline void panel_nodes(ContourSegment& seg, double a, double b, int order,
                        const std::function<cx(double)>& lam,
                        const std::function<cx(double)>& dlam, double sign) {
    const GaussRule& r = gauss_legendre(order);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < order; ++i) {
        double p = mid + half * r.nodes[i];
        seg.nodes.push_back({lam(p), sign * dlam(p) * (half * r.weights[i])});
    }
}

} // namespace detail

/// Intersection of the parabola sqrt(lambda) = rho + i k with the ray
/// boundary: k* = -rho cot(theta) + sqrt(rho^2 csc^2(theta) + delta0).
inline double contour_kstar(double rho, double theta, double delta0) {
    double cot = std::cos(theta) / std::sin(theta);
    double csc = 1.0 / std::sin(theta);
    return -rho * cot + std::sqrt(rho * rho * csc * csc + delta0);
}

inline ContourSpec build_contour(double t, double x, double y,
                                 const ContourParams& cp,
                                 const ModelParams& m) {
    if (!(t > 0.0)) throw std::invalid_argument("build_contour: t must be > 0");
    const double d = std::abs(x - y);
    const double K = cp.split_K(m);

    ContourSpec c;
    c.t = t;
    c.theta = cp.theta;
    c.delta0 = cp.delta0;
    if (t >= 1.0 && d <= K * t) {
        c.regime = TimeRegime::bulk;
        c.rho = std::max(cp.rho_min, d / (cp.L * t));
    } else {
        // saddle-point parabola: rho^2 t - rho d = -d^2/(4t) at rho = d/(2t)
        c.regime = TimeRegime::short_or_fast;
        c.rho = std::max(cp.rho_min, d / (2.0 * t));
    }
    c.kstar = contour_kstar(c.rho, cp.theta, cp.delta0);
    c.ell1 = 2.0 * c.rho * c.kstar / std::sin(cp.theta);

    // Everything is truncated where |e^{lambda t}| drops below tail_cut
    // relative to the parabola apex (the uniform factor e^{-rho d} of
    // |G_lambda| on the parabola cancels in the comparison). Nodes are
    // only generated on the live part; the geometric junction (kstar,
    // ell1) is kept exact regardless.
    const double budget = -std::log(cp.tail_cut);
    const double k_live = std::min(c.kstar, std::sqrt(budget / t));
    const bool rays_live = c.kstar * c.kstar * t < budget;
    c.ell_max = rays_live
                    ? c.ell1 + (budget - c.kstar * c.kstar * t) /
                                   (t * std::abs(std::cos(cp.theta)))
                    : c.ell1;

    const double rho = c.rho;
    ContourSegment par;
    par.kind = ContourSegment::Kind::parabola;
    par.p0 = -c.kstar;
    par.p1 = c.kstar;
    auto plam = [rho](double k) { return cx(rho, k) * cx(rho, k); };
    auto pdlam = [rho](double k) { return 2.0 * cx(0.0, 1.0) * cx(rho, k); };
    par.start = plam(par.p0);
    par.end = plam(par.p1);
    {
        // panel count: |e^{lambda t}| variation of ~2 per panel, and the
        // oscillation e^{i k (2 rho t - d)} resolved at <= ~4 rad per panel
        double phase_rate = std::abs(2.0 * rho * t - d);
        int jmax = std::max({4, int(std::ceil(k_live * k_live * t / 2.0)),
                             int(std::ceil(k_live * phase_rate / 4.0))});
        jmax = std::min(jmax * cp.refine, 800);
        std::vector<double> edges{0.0};
        for (int j = 1; j <= jmax; ++j)
            edges.push_back(k_live * std::sqrt(double(j) / double(jmax)));
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
            // mirror panels around k = 0
            detail::panel_nodes(par, edges[e], edges[e + 1], cp.gl_order,
                                plam, pdlam, 1.0);
            detail::panel_nodes(par, -edges[e + 1], -edges[e], cp.gl_order,
                                plam, pdlam, 1.0);
        }
    }
    c.segments.push_back(std::move(par));

    const double th = cp.theta, d0 = cp.delta0;
    auto rlam_u = [th, d0](double l) {
        return cx(-d0 + std::cos(th) * l, std::sin(th) * l);
    };
    auto rdlam_u = [th](double) { return cx(std::cos(th), std::sin(th)); };
    auto rlam_l = [th, d0](double l) {
        return cx(-d0 + std::cos(th) * l, -std::sin(th) * l);
    };
    auto rdlam_l = [th](double) { return cx(std::cos(th), -std::sin(th)); };

    for (int side = 0; side < 2; ++side) {
        ContourSegment ray;
        ray.kind = side == 0 ? ContourSegment::Kind::ray_upper
                             : ContourSegment::Kind::ray_lower;
        ray.p0 = c.ell1;
        ray.p1 = c.ell_max;
        ray.start = side == 0 ? rlam_u(c.ell1) : rlam_l(c.ell1);
        ray.end = side == 0 ? rlam_u(c.ell_max) : rlam_l(c.ell_max);
        // geometric panels on the e^{t cos(theta) l} decay scale, width
        // also capped so the e^{-sqrt(lambda) d} phase stays resolved
        double sd = 1.0 / (t * std::abs(std::cos(th)));
        double a = c.ell1;
        double w0 = 0.5 * sd / cp.refine;
        int guard = 0;
        while (a < c.ell_max && ++guard < 500) {
            double w = w0;
            if (d > 1e-9)
                w = std::min(w, 8.0 * std::sqrt(std::max(a, d0)) / d);
            double b = std::min(a + w, c.ell_max);
            if (side == 0)
                detail::panel_nodes(ray, a, b, cp.gl_order, rlam_u, rdlam_u,
                                    1.0);
            else
                // lower ray is traversed from infinity inward
                detail::panel_nodes(ray, a, b, cp.gl_order, rlam_l, rdlam_l,
                                    -1.0);
            a = b;
            w0 *= 1.6;
        }
        c.segments.push_back(std::move(ray));
    }
    return c;
}

} // namespace kpplab
