#pragma once

// Quantum dilogarithm evaluators: the q-Pochhammer symbol and G_q for the
// compact regime, and the noncompact integral form Phi_b / Psi_b.  All
// routines are pure functions of their inputs and configuration and return a
// value together with an error estimate (truncation tail bound for products,
// node-doubling delta for contour integrals).

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "stint/common.hpp"
#include "stint/quadrature.hpp"

namespace stint::specfun {

struct QParam {
    cplx q;
    explicit QParam(cplx q_) : q(q_) {
        if (!(std::abs(q) < 1.0)) throw ConfigError("QParam: |q| must be < 1");
    }
};

struct BParam {
    double b;
    explicit BParam(double b_) : b(b_) {
        if (!(b > 0.0)) throw ConfigError("BParam: b must be > 0");
    }
    // b + 1/b, the width parameter of the convergence strip |Im z| < Q/2.
    double strip() const { return b + 1.0 / b; }
};

struct TruncationPolicy {
    double tol = 1e-14;
    int max_terms = 10000;
    double pole_guard = 1e-8;
};

struct ValErr {
    cplx value;
    double err;
};

// ---------------------------------------------------------------------------
// (z; q)_infty = prod_{i>=0} (1 - q^i z), truncated once the log-tail bound
// |q^n z| / ((1-|q|)(1-|q^n z|)) drops below tol.
// ---------------------------------------------------------------------------
inline ValErr q_pochhammer(cplx z, const QParam& q, const TruncationPolicy& pol = {}) {
    const double qa = std::abs(q.q);
    cplx prod = 1.0;
    cplx qi = 1.0;  // q^i
    for (int i = 0; i < pol.max_terms; ++i) {
        prod *= 1.0 - qi * z;
        qi *= q.q;
        const double t = std::abs(qi) * std::abs(z);
        if (t < 0.5) {
            const double tail = t / ((1.0 - qa) * (1.0 - t));
            if (tail < pol.tol) return {prod, std::abs(prod) * tail};
        }
    }
    throw NonConvergent("q_pochhammer: max_terms reached before tail bound");
}

namespace detail {

// Pochhammer with a proximity guard against the zeros of the factors, used
// for the denominator of G_q where those zeros are poles of the quotient.
inline ValErr pochhammer_guarded(cplx z, const QParam& q, const TruncationPolicy& pol) {
    const double qa = std::abs(q.q);
    cplx prod = 1.0;
    cplx qi = 1.0;
    for (int i = 0; i < pol.max_terms; ++i) {
        const cplx factor = 1.0 - qi * z;
        if (std::abs(factor) < pol.pole_guard)
            throw PoleHit("g_q: |1 - q^i z| below pole guard at i=" + std::to_string(i));
        prod *= factor;
        qi *= q.q;
        const double t = std::abs(qi) * std::abs(z);
        if (t < 0.5) {
            const double tail = t / ((1.0 - qa) * (1.0 - t));
            if (tail < pol.tol) return {prod, std::abs(prod) * tail};
        }
    }
    throw NonConvergent("g_q: max_terms reached before tail bound");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// G_q(z) = (-q/z; q)_infty / (z; q)_infty
// ---------------------------------------------------------------------------
inline ValErr g_q(cplx z, const QParam& q, const TruncationPolicy& pol = {}) {
    if (z == cplx(0.0)) throw EvaluationError("g_q: z = 0");
    const ValErr num = q_pochhammer(-q.q / z, q, pol);
    const ValErr den = detail::pochhammer_guarded(z, q, pol);
    const cplx v = num.value / den.value;
    const double rel = num.err / std::max(std::abs(num.value), 1e-300) +
                       den.err / std::max(std::abs(den.value), 1e-300);
    return {v, std::abs(v) * rel};
}

// ---------------------------------------------------------------------------
// Phi_b via its contour-integral representation
//
//   log Phi_b(z) = int e^{-2ixz} / (4 sinh(xb) sinh(x/b)) dx/x
//
// over a contour that detours above the third-order pole at x = 0 on a
// semicircle of radius r0.  Poles of the integrand sit on the imaginary axis
// only (x = i pi n b, i pi n / b), so the two straight tails may be rotated
// off the real axis without crossing anything.  For |Re z| large the tails
// are tilted toward the descent direction, which trades the slow O(strip)
// decay for a rate proportional to |Re z| and removes most oscillation.
// ---------------------------------------------------------------------------

struct ContourConfig {
    double r0 = 0.25;       // semicircle radius; keep below pi/4 for b in [1/4, 4]
    double X = 0.0;         // tail half-length; <= 0 selects it from the decay rate
    int panels = 4;         // minimum Gauss-Legendre panel count per tail
    int order = 16;         // Gauss-Legendre order per panel
    double tail_tol = 1e-16;
    bool rotate = true;     // tilt tails toward the descent direction

    void validate() const {
        if (!(r0 > 0.0)) throw ConfigError("ContourConfig: r0 must be > 0");
        if (panels < 2) throw ConfigError("ContourConfig: panels must be >= 2");
        if (order < 4) throw ConfigError("ContourConfig: order must be >= 4");
    }

    std::string meta() const {
        return "contour:r0=" + fmt_g17(r0) + ";panels=" + std::to_string(panels) +
               ";order=" + std::to_string(order) + (rotate ? ";rot" : ";straight");
    }
};

namespace detail {

inline cplx phib_integrand(cplx x, double b, cplx z) {
    return std::exp(cplx(0.0, -2.0) * x * z) /
           (4.0 * std::sinh(x * b) * std::sinh(x / b) * x);
}

// One tail: x = x0 + t * dir, t in [0, T], traversed outward; the caller
// supplies the orientation sign via dir.
inline cplx tail_integral(double b, cplx z, cplx x0, cplx dir, double T,
                          int npanels, int order) {
    const auto& [gx, gw] = quadrature::gauss_legendre(order);
    cplx sum = 0.0;
    const double h = T / npanels;
    for (int p = 0; p < npanels; ++p) {
        const double t0 = p * h;
        cplx acc = 0.0;
        for (int k = 0; k < order; ++k) {
            const double t = t0 + 0.5 * h * (gx[k] + 1.0);
            acc += gw[k] * phib_integrand(x0 + t * dir, b, z);
        }
        sum += acc * (0.5 * h);
    }
    return sum * dir;
}

inline cplx semicircle_integral(double b, cplx z, double r0, int npanels, int order) {
    // x = r0 e^{i th}, th from pi down to 0, dx = i x dth; the descending
    // sweep carries a sign: int_pi^0 = -int_0^pi.
    const auto& [gx, gw] = quadrature::gauss_legendre(order);
    cplx sum = 0.0;
    const double h = kPi / npanels;
    for (int p = 0; p < npanels; ++p) {
        const double th0 = p * h;
        cplx acc = 0.0;
        for (int k = 0; k < order; ++k) {
            const double th = th0 + 0.5 * h * (gx[k] + 1.0);
            const cplx x = r0 * cplx(std::cos(th), std::sin(th));
            acc += gw[k] * phib_integrand(x, b, z) * (cplx(0.0, 1.0) * x);
        }
        sum += acc * (0.5 * h);
    }
    return -sum;
}

struct TailPlan {
    cplx dir;     // unit direction away from +-r0
    double T;     // length
    int npanels;
};

// Plan one tail. side = +1 for the tail leaving +r0, -1 for the one leaving
// -r0 (where the local decay rate swaps strip +- 2 Im z).
inline TailPlan plan_tail(double b, cplx z, int side, const ContourConfig& cfg,
                          int refine) {
    const double Q = b + 1.0 / b;
    const double u = z.real();
    const double v = z.imag();
    const double base_rate = Q - 2.0 * side * v;  // rate along the real axis
    double phi = 0.0;
    if (cfg.rotate && std::abs(u) > 0.25)
        phi = std::min(1.0, std::atan2(2.0 * std::abs(u), 1.0));
    // Tilt downward for u > 0, upward for u < 0; on the left tail the
    // same vertical sense corresponds to the mirrored direction.
    const double sgn = (u >= 0.0) ? -1.0 : 1.0;
    const cplx dir = (side > 0) ? cplx(std::cos(phi), sgn * std::sin(phi))
                                : cplx(-std::cos(phi), sgn * std::sin(phi));
    const double rate = base_rate * std::cos(phi) + 2.0 * std::abs(u) * std::sin(phi);
    if (!(rate > 0.0)) throw OutOfStrip("phi_b: no decay along contour tail");
    double T = (cfg.X > 0.0) ? cfg.X
                             : std::max(1.0, (std::log(1.0 / cfg.tail_tol) + 4.0) / rate);
    const double freq = 2.0 * (std::abs(u) * std::cos(phi) + std::abs(v) * std::sin(phi));
    const double h = std::min(1.0, 3.0 / (1.0 + freq));
    int npanels = std::max(cfg.panels, static_cast<int>(std::ceil(T / h)));
    npanels *= refine;
    return {dir, T, npanels};
}

inline cplx log_phi_b_once(cplx z, double b, const ContourConfig& cfg, int refine) {
    const TailPlan right = plan_tail(b, z, +1, cfg, refine);
    const TailPlan left = plan_tail(b, z, -1, cfg, refine);
    // Left tail runs inward (from -infinity to -r0): outward integral negated.
    cplx s = -tail_integral(b, z, cplx(-cfg.r0, 0.0), left.dir, left.T, left.npanels, cfg.order);
    s += semicircle_integral(b, z, cfg.r0, std::max(2, 2 * refine), cfg.order);
    s += tail_integral(b, z, cplx(cfg.r0, 0.0), right.dir, right.T, right.npanels, cfg.order);
    return s;
}

// log Phi_b with a node-doubling error estimate on the log scale.
inline ValErr log_phi_b(cplx z, const BParam& b, const ContourConfig& cfg) {
    cfg.validate();
    if (!(std::abs(z.imag()) < 0.5 * b.strip()))
        throw OutOfStrip("phi_b: |Im z| must be < (b + 1/b)/2");
    const cplx coarse = log_phi_b_once(z, b.b, cfg, 1);
    const cplx fine = log_phi_b_once(z, b.b, cfg, 2);
    const double delta = std::abs(fine - coarse);
    if (cfg.X > 0.0) {
        // Fixed truncation supplied by the caller: check the tail estimate.
        const double rate = b.strip() - 2.0 * std::abs(z.imag());
        if (std::exp(-rate * cfg.X) > 1e3 * cfg.tail_tol)
            throw QuadratureFailure("phi_b: truncation X too small for this argument");
    }
    return {fine, delta};
}

}  // namespace detail

inline ValErr phi_b(cplx z, const BParam& b, const ContourConfig& cfg = {}) {
    const ValErr lp = detail::log_phi_b(z, b, cfg);
    const cplx v = std::exp(lp.value);
    return {v, std::abs(v) * lp.err};
}

// Psi_b(x) = e^{-pi i x^2 / 2} Phi_b(x) / Phi_b(0).  The normalization
// Phi_b(0) is evaluated numerically with the same contour configuration.
inline ValErr psi_b(cplx x, const BParam& b, const ContourConfig& cfg = {}) {
    const ValErr lx = detail::log_phi_b(x, b, cfg);
    const ValErr l0 = detail::log_phi_b(cplx(0.0), b, cfg);
    const cplx v = std::exp(cplx(0.0, -0.5 * kPi) * x * x + lx.value - l0.value);
    return {v, std::abs(v) * (lx.err + l0.err)};
}

}  // namespace stint::specfun
