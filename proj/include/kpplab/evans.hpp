#pragma once

#include <functional>
#include <span>
#include <vector>

#include "kpplab/common.hpp"
#include "kpplab/modes.hpp"

namespace kpplab {

/// phi+ / phi- pair at one lambda, with the Wronskian in split-exponent
/// form. Determinants of envelope components are combined with the rate
/// factors re-attached analytically, so |y| ~ 60 does not overflow.
class ModePair {
public:
    ModePair(const SpectralPoint& sp, const ModelContext& ctx,
             const ModeOptions& opt = {})
        : phip_(solve_mode(ModeKind::phi_plus, sp, ctx, opt)),
          phim_(solve_mode(ModeKind::phi_minus, sp, ctx, opt)),
          sp_(sp) {}

    ModePair(ModeSolution phip, ModeSolution phim)
        : phip_(std::move(phip)), phim_(std::move(phim)),
          sp_(phip_.lambda) {}

    /// W_lambda(y) = phi+ phi-' - phi+' phi-.
    ScaledC wronskian(double y) const {
        Vec2c zp, zm;
        double cp, cm;
        phip_.envelope_at(y, zp, cp);
        phim_.envelope_at(y, zm, cm);
        cx det = zp.a * zm.b - zp.b * zm.a;
        return (ScaledC{det, cp + cm} *
                scaled_exp((phip_.rate + phim_.rate) * y)).normalized();
    }

    const ModeSolution& phi_plus() const { return phip_; }
    const ModeSolution& phi_minus() const { return phim_; }
    const SpectralPoint& point() const { return sp_; }

private:
    ModeSolution phip_, phim_;
    SpectralPoint sp_;
};

/// Evans function value W_lambda(y); overflow-safe only through moderate
/// |y|, use ModePair::wronskian for split-exponent access.
inline cx wronskian(const SpectralPoint& sp, double y,
                    const ModelContext& ctx, const ModeOptions& opt = {}) {
    return ModePair(sp, ctx, opt).wronskian(y).value();
}

struct EvansSample {
    SpectralPoint lambda;
    cx W0{0.0};
    cx J{0.0}, I{0.0}, H{0.0}, K{0.0};
};

/// The four auxiliary determinants used to re-expand one mode family in
/// the other: J = det(phi+, psi+), I = det(phi-, psi+) (y >= 0 side);
/// H = det(phi-, psi-), K = det(phi+, psi-) (y <= 0 side).
/// Split-exponent values: det(u, v)(y) = env_det * e^{(rate_u + rate_v) y}.
struct AuxDeterminants {
    ScaledC J, I, H, K;
};

class AuxModeSet {
public:
    AuxModeSet(const SpectralPoint& sp, const ModelContext& ctx,
               const ModeOptions& opt = {})
        : pair_(sp, ctx, opt),
          psip_(solve_mode(ModeKind::psi_plus, sp, ctx, opt)),
          psim_(solve_mode(ModeKind::psi_minus, sp, ctx, opt)) {}

    // psi+ lives on [0, X] and psi- on [-X, 0], so J/I are available for
    // y >= 0 and H/K for y <= 0; at y = 0 all four.
    AuxDeterminants determinants(double y) const {
        AuxDeterminants d;
        if (y >= 0.0) {
            d.J = det2(pair_.phi_plus(), psip_, y);
            d.I = det2(pair_.phi_minus(), psip_, y);
        }
        if (y <= 0.0) {
            d.H = det2(pair_.phi_minus(), psim_, y);
            d.K = det2(pair_.phi_plus(), psim_, y);
        }
        return d;
    }

    EvansSample sample(double y) const {
        EvansSample s;
        s.lambda = pair_.point();
        s.W0 = pair_.wronskian(0.0).value();
        AuxDeterminants d = determinants(y);
        s.J = d.J.value();
        s.I = d.I.value();
        s.H = d.H.value();
        s.K = d.K.value();
        return s;
    }

    const ModePair& pair() const { return pair_; }
    const ModeSolution& psi_plus() const { return psip_; }
    const ModeSolution& psi_minus() const { return psim_; }

private:
    static ScaledC det2(const ModeSolution& u, const ModeSolution& v,
                        double y) {
        Vec2c zu, zv;
        double cu, cv;
        u.envelope_at(y, zu, cu);
        v.envelope_at(y, zv, cv);
        cx det = zu.a * zv.b - zu.b * zv.a;
        return ScaledC{det, cu + cv} * scaled_exp((u.rate + v.rate) * y);
    }

    ModePair pair_;
    ModeSolution psip_, psim_;
};

struct WindingResult {
    int winding = 0;
    double max_phase_jump = 0.0;  // flag when above pi/2
    bool resolved = true;
};

/// Discrete winding number of f along a closed node sequence (first node
/// repeated at the end is not required).
inline WindingResult winding_number(const std::function<cx(cx)>& f,
                                    std::span<const cx> path) {
    WindingResult r;
    if (path.size() < 3)
        throw std::invalid_argument("winding_number: too few nodes");
    std::vector<cx> vals(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) vals[i] = f(path[i]);
    double total = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        cx a = vals[i], b = vals[(i + 1) % path.size()];
        double dphi = std::arg(b / a);
        r.max_phase_jump = std::max(r.max_phase_jump, std::abs(dphi));
        total += dphi;
    }
    r.winding = static_cast<int>(std::lround(total / (2.0 * pi)));
    r.resolved = r.max_phase_jump <= 0.5 * pi;
    return r;
}

/// Closed rectangle path with n nodes per edge.
inline std::vector<cx> rectangle_path(double re_lo, double re_hi,
                                      double im_lo, double im_hi, int n) {
    std::vector<cx> p;
    p.reserve(4 * n);
    for (int i = 0; i < n; ++i)
        p.emplace_back(re_lo + (re_hi - re_lo) * i / n, im_lo);
    for (int i = 0; i < n; ++i)
        p.emplace_back(re_hi, im_lo + (im_hi - im_lo) * i / n);
    for (int i = 0; i < n; ++i)
        p.emplace_back(re_hi - (re_hi - re_lo) * i / n, im_hi);
    for (int i = 0; i < n; ++i)
        p.emplace_back(re_lo, im_hi - (im_hi - im_lo) * i / n);
    return p;
}

/// Winding of lambda -> W_lambda(0) along a closed contour right of
/// Gamma_-; zero signals no point spectrum enclosed. Throws solver_error
/// when consecutive phase jumps exceed pi/2 (insufficient resolution).
inline WindingResult no_unstable_spectrum_scan(const ModelContext& ctx,
                                               std::span<const cx> path,
                                               const ModeOptions& opt = {}) {
    ModeOptions o = opt;
    o.x_stop = 0.0;
    auto f = [&](cx lam) {
        SpectralPoint sp = make_spectral_point(lam, ctx);
        return ModePair(sp, ctx, o).wronskian(0.0).value();
    };
    WindingResult r = winding_number(f, path);
    if (!r.resolved)
        throw solver_error("no_unstable_spectrum_scan: phase jump > pi/2, "
                           "increase node count");
    return r;
}

} // namespace kpplab
