#pragma once

// Numerical verification engines: the shaped pentagon identity, the
// six-parameter tetrahedron equation, its four-spectral-parameter
// regularization, and falsification probes that detune an instance off the
// compatibility manifold to show the checks have power.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stint/common.hpp"
#include "stint/quadrature.hpp"
#include "stint/shapes.hpp"
#include "stint/weights.hpp"

namespace stint::identities {

using quadrature::Grid;
using shapes::AngleTriple;
using shapes::PentagonAngles;
using shapes::RhoSix;
using shapes::SpectralQuad;
using weights::EdgeStates;
using weights::EvalCache;
using weights::IrcCorners;
using weights::TetWeight;

// ---------------------------------------------------------------------------
// Verification result: both sides, residuals, and enough metadata to rerun.
// ---------------------------------------------------------------------------
struct ResidualReport {
    cplx lhs{0.0};
    cplx rhs{0.0};
    double abs_residual = 0.0;
    double rel_residual = 0.0;
    std::string quad_meta;
    std::string inputs_digest;

    nlohmann::json to_json() const {
        return {{"lhs_re", lhs.real()},         {"lhs_im", lhs.imag()},
                {"rhs_re", rhs.real()},         {"rhs_im", rhs.imag()},
                {"abs_residual", abs_residual}, {"rel_residual", rel_residual},
                {"quad_meta", quad_meta},       {"inputs_digest", inputs_digest}};
    }
};

namespace detail {

inline ResidualReport make_report(cplx lhs, cplx rhs, std::string quad_meta,
                                  std::string digest) {
    const double scale = std::abs(lhs) + std::abs(rhs);
    if (scale < 1e-300)
        throw EvaluationError("residual: degenerate instance (both sides underflow)");
    ResidualReport r;
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_residual = std::abs(lhs - rhs);
    r.rel_residual = r.abs_residual / scale;
    r.quad_meta = std::move(quad_meta);
    r.inputs_digest = std::move(digest);
    return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pentagon instances: the nine fixed states around the bipyramid; x13 is the
// integrated internal edge.
// ---------------------------------------------------------------------------
struct PentagonExternals {
    cplx x01, x02, x03, x04, x12, x14, x23, x24, x34;
};

struct PentagonInstance {
    PentagonAngles angles;
    PentagonExternals ext;
    cplx coeff{1.0};
    std::string digest;
};

namespace detail {

// Both pentagon variants share one wiring; `tp` switches T for its transpose.
inline ResidualReport verify_pentagon_impl(const TetWeight& w, const PentagonInstance& inst,
                                           const Grid& grid, bool tp) {
    EvalCache cache;
    const auto T = [&](const AngleTriple& a, const EdgeStates& s) {
        return tp ? w.eval_transpose(a, s, &cache) : w.eval(a, s, &cache);
    };
    const PentagonExternals& e = inst.ext;
    const PentagonAngles& A = inst.angles;

    const cplx lhs = T(A.a1, {{e.x02, e.x03, e.x04}, {e.x34, e.x24, e.x23}}) *
                     T(A.a3, {{e.x01, e.x02, e.x04}, {e.x24, e.x14, e.x12}});

    const auto integrand = [&](cplx y) {
        return T(A.a0, {{e.x12, y, e.x14}, {e.x34, e.x24, e.x23}}) *
               T(A.a2, {{e.x01, e.x03, e.x04}, {e.x34, e.x14, y}}) *
               T(A.a4, {{e.x01, e.x02, e.x03}, {e.x23, y, e.x12}});
    };
    auto out = quadrature::integrate_adaptive(integrand, grid);
    const cplx rhs = inst.coeff * out.value;
    return make_report(lhs, rhs, out.grid.meta() + ";est=" + fmt_g17(out.err_est),
                       inst.digest + (tp ? ";transpose" : ""));
}

}  // namespace detail

inline ResidualReport verify_pentagon(const TetWeight& w, const PentagonInstance& inst,
                                      const Grid& grid) {
    return detail::verify_pentagon_impl(w, inst, grid, false);
}

inline ResidualReport verify_pentagon_transpose(const TetWeight& w,
                                                const PentagonInstance& inst,
                                                const Grid& grid) {
    return detail::verify_pentagon_impl(w, inst, grid, true);
}

// ---------------------------------------------------------------------------
// Six-parameter tetrahedron equation.
// ---------------------------------------------------------------------------
struct TE6Externals {
    cplx a1, a2, a3, a4;
    cplx b1, b2, b3, b4;
    cplx c1, c2, c3, c4, c5, c6;
};

struct TE6Instance {
    RhoSix rho;
    TE6Externals ext;
    std::string digest;
};

inline TE6Instance make_te6_instance(const RhoSix& rho, const TE6Externals& ext,
                                     std::string digest) {
    if (!shapes::in_domain_D(rho))
        throw NotInDomain("te6 instance: rho outside the domain");
    return {rho, ext, std::move(digest)};
}

namespace detail {

// Both sides of the equation as functions of the integrated corner state d.
// `lhs_rho` lets falsification probes detune the left side independently.
struct TE6Sides {
    const TetWeight& w;
    const TE6Externals& e;
    RhoSix lhs_rho;
    RhoSix rhs_rho;
    EvalCache* cache;

    cplx lhs(cplx d) const {
        const auto& r = lhs_rho;
        const auto& x = e;
        return w.irc_weight(r.rho12, r.rho13, r.rho23,
                            {x.a4, x.c2, x.c3, x.c1, d, x.b1, x.b2, x.b3}, cache) *
               w.irc_weight(r.rho12, r.rho14, r.rho24,
                            {x.c1, x.b2, x.b1, x.a3, x.b4, x.c4, x.c6, d}, cache) *
               w.irc_weight(r.rho13, r.rho14, r.rho34,
                            {x.b1, d, x.c3, x.c4, x.c5, x.a2, x.b4, x.b3}, cache) *
               w.irc_weight(r.rho23, r.rho24, r.rho34,
                            {d, x.b2, x.b3, x.b4, x.a1, x.c5, x.c6, x.c2}, cache);
    }

    cplx rhs(cplx d) const {
        const auto& r = rhs_rho;
        const auto& x = e;
        return w.irc_weight(r.rho23, r.rho24, r.rho34,
                            {x.b1, x.c1, x.c3, x.c4, d, x.a2, x.a3, x.a4}, cache) *
               w.irc_weight(r.rho13, r.rho14, r.rho34,
                            {x.c1, x.b2, x.a4, x.a3, x.a1, d, x.c6, x.c2}, cache) *
               w.irc_weight(r.rho12, r.rho14, r.rho24,
                            {x.a4, x.c2, x.c3, d, x.c5, x.a2, x.a1, x.b3}, cache) *
               w.irc_weight(r.rho12, r.rho13, r.rho23,
                            {d, x.a1, x.a2, x.a3, x.b4, x.c4, x.c6, x.c5}, cache);
    }
};

// Integrate both sides over one node sweep, with the line-grid decay check
// applied to the pair and the same retry policy as integrate_adaptive.
inline ResidualReport integrate_sides(const TE6Sides& sides, Grid grid, std::string digest,
                                      int max_retries = 3, double edge_factor = 1e-12) {
    using quadrature::SpaceKind;
    for (int attempt = 0;; ++attempt) {
        const std::size_t n = grid.nodes.size();
        std::vector<cplx> lv(n), rv(n);
        double peak = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lv[i] = sides.lhs(grid.nodes[i]);
            rv[i] = sides.rhs(grid.nodes[i]);
            peak = std::max(peak, std::abs(lv[i]) + std::abs(rv[i]));
        }
        bool decayed = true;
        if (grid.kind == SpaceKind::RealLine) {
            const std::size_t edge = std::min<std::size_t>(grid.order, n);
            double edge_mag = 0.0;
            for (std::size_t i = 0; i < edge; ++i) {
                edge_mag = std::max(edge_mag, std::abs(lv[i]) + std::abs(rv[i]));
                edge_mag = std::max(edge_mag, std::abs(lv[n - 1 - i]) + std::abs(rv[n - 1 - i]));
            }
            decayed = edge_mag <= edge_factor * peak || peak == 0.0;
        }
        if (decayed) {
            cplx lhs = 0.0, rhs = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                lhs += grid.weights[i] * lv[i];
                rhs += grid.weights[i] * rv[i];
            }
            double est = 0.0;
            if (auto cg = quadrature::coarsened(grid)) {
                cplx lc = 0.0, rc = 0.0;
                for (std::size_t i = 0; i < cg->nodes.size(); ++i) {
                    lc += cg->weights[i] * sides.lhs(cg->nodes[i]);
                    rc += cg->weights[i] * sides.rhs(cg->nodes[i]);
                }
                est = std::max(std::abs(lhs - lc), std::abs(rhs - rc));
            }
            return make_report(lhs, rhs, grid.meta() + ";est=" + fmt_g17(est),
                               std::move(digest));
        }
        if (attempt >= max_retries)
            throw QuadratureFailure("te6: integrand not decayed at |x| = " +
                                    fmt_g17(grid.line_x) + " after retries");
        grid = quadrature::line_grid(2.0 * grid.line_x, 2 * grid.panels, grid.order);
    }
}

}  // namespace detail

inline ResidualReport verify_te6(const TetWeight& w, const TE6Instance& inst,
                                 const Grid& grid) {
    if (!shapes::in_domain_D(inst.rho))
        throw NotInDomain("verify_te6: rho outside the domain");
    EvalCache cache;
    detail::TE6Sides sides{w, inst.ext, inst.rho, inst.rho, &cache};
    return detail::integrate_sides(sides, grid, inst.digest);
}

// The double-integral expression obtained after trading the two left-hand
// weights for three under the inner integral; equals both sides of the
// equation and serves as an independent oracle in the tests.
inline cplx te6_proof_middle(const TetWeight& w, const TE6Instance& inst, const Grid& grid,
                             cplx coeff = cplx(1.0)) {
    const RhoSix& r = inst.rho;
    const TE6Externals& x = inst.ext;
    const AngleTriple a0 = shapes::alpha0_from_rho(r);
    const AngleTriple a2 = shapes::alpha_from_rho(r.rho12, r.rho14, r.rho24);
    const AngleTriple a4 = shapes::alpha_from_rho(r.rho23, r.rho24, r.rho34);
    EvalCache cache;

    const std::size_t n = grid.nodes.size();
    // e-dependent factors that do not involve d
    std::vector<cplx> be(n);
    for (std::size_t j = 0; j < n; ++j) {
        const cplx e = grid.nodes[j];
        be[j] = w.eval(a2, {{x.a2, x.a4, x.b3}, {x.c2, x.c5, e}}, &cache) *
                w.eval(a4, {{x.a2, x.b1, x.a4}, {x.c1, e, x.c4}}, &cache);
    }
    cplx total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx d = grid.nodes[i];
        const cplx ad = w.eval(a2, {{x.c4, x.c1, d}, {x.b2, x.b4, x.a3}}, &cache) *
                        w.eval(a4, {{x.c5, d, x.c2}, {x.b2, x.a1, x.b4}}, &cache);
        cplx inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const cplx e = grid.nodes[j];
            inner += grid.weights[j] *
                     w.eval(a0, {{x.c4, e, x.c5}, {x.c2, d, x.c1}}, &cache) * be[j];
        }
        total += grid.weights[i] * ad * inner;
    }
    return coeff * total;
}

// ---------------------------------------------------------------------------
// Four-spectral-parameter form, approached through the eps-delta
// regularization of the flat tetrahedron.
// ---------------------------------------------------------------------------
inline ResidualReport verify_te4(const TetWeight& w, const SpectralQuad& r,
                                 const TE6Externals& ext, const Grid& grid, double eps,
                                 double delta, std::string digest = {}) {
    if (!(eps > delta && delta > 0.0))
        throw OrderingViolated("verify_te4: need eps > delta > 0");
    if (!shapes::spectral_ordered(r, eps))
        throw OrderingViolated("verify_te4: need r1 < r2 < r3 < r4 < pi + r1 - eps");
    const RhoSix rho = shapes::rho_regularized(r, eps, delta);
    if (digest.empty())
        digest = "te4;" + shapes::digest(rho) + ";eps=" + fmt_g17(eps) +
                 ";delta=" + fmt_g17(delta);
    return verify_te6(w, make_te6_instance(rho, ext, digest), grid);
}

// ---------------------------------------------------------------------------
// Falsification probes: rerun a verifier with one parameter detuned off the
// compatibility manifold.  Zero perturbation reproduces the on-manifold
// report bit for bit.
// ---------------------------------------------------------------------------

// Pentagon probe: shift alpha^(2)_1, leaving every other triple in place.
inline ResidualReport falsification_probe(const TetWeight& w, const PentagonInstance& inst,
                                          const Grid& grid, double perturbation) {
    const PentagonAngles& a = inst.angles;
    const AngleTriple a2 = AngleTriple::from_first_third(a.a2.a1() + perturbation, a.a2.a3());
    PentagonInstance detuned = inst;
    detuned.angles = PentagonAngles::unchecked(a.a0, a.a1, a2, a.a3, a.a4);
    detuned.digest = inst.digest + ";probe=" + fmt_g17(perturbation);
    return verify_pentagon(w, detuned, grid);
}

// TE6 probe: shift rho34 in the left-hand factors only.  (Both sides shifted
// together would still solve the equation, the domain being open.)
inline ResidualReport falsification_probe(const TetWeight& w, const TE6Instance& inst,
                                          const Grid& grid, double perturbation) {
    RhoSix detuned = inst.rho;
    detuned.rho34 += perturbation;
    if (!shapes::in_domain_D(detuned))
        throw NotInDomain("falsification_probe: detuned rho left the domain");
    EvalCache cache;
    detail::TE6Sides sides{w, inst.ext, detuned, inst.rho, &cache};
    return detail::integrate_sides(sides, grid,
                                   inst.digest + ";probe=" + fmt_g17(perturbation));
}

// ---------------------------------------------------------------------------
// Seeded instance sampling.  Circle states are e^{2 pi i u} with u uniform;
// line states are uniform in [-1, 1].  Quintuples come from rejection
// sampling the six-parameter domain, keeping every dihedral angle at least
// min_angle away from the boundary so the quadratures converge at desk
// scale.
// ---------------------------------------------------------------------------

inline cplx sample_state(Rng& rng, quadrature::SpaceKind kind) {
    if (kind == quadrature::SpaceKind::UnitCircle) return rng.unit_circle();
    return {rng.uniform(-1.0, 1.0), 0.0};
}

inline double quintuple_min_angle(const RhoSix& rho) {
    const AngleTriple a0 = shapes::alpha0_from_rho(rho);
    const AngleTriple a1 = shapes::alpha_from_rho(rho.rho12, rho.rho13, rho.rho23);
    const AngleTriple a2 = shapes::alpha_from_rho(rho.rho12, rho.rho14, rho.rho24);
    const AngleTriple a3 = shapes::alpha_from_rho(rho.rho13, rho.rho14, rho.rho34);
    const AngleTriple a4 = shapes::alpha_from_rho(rho.rho23, rho.rho24, rho.rho34);
    double m = a0.min_entry();
    for (const AngleTriple* a : {&a1, &a2, &a3, &a4}) m = std::min(m, a->min_entry());
    return m;
}

inline RhoSix sample_rho_in_domain(Rng& rng, double min_angle, int max_tries = 1000000) {
    for (int i = 0; i < max_tries; ++i) {
        RhoSix r;
        r.rho12 = 0.0;
        r.rho13 = rng.uniform(0.2, 1.5);
        r.rho14 = r.rho13 + rng.uniform(0.05, 1.2);
        r.rho23 = r.rho13 + rng.uniform(0.05, 1.2);
        r.rho24 = std::max(r.rho14, r.rho23) + rng.uniform(0.05, 0.8);
        r.rho34 = r.rho24 + rng.uniform(0.05, 0.6);
        if (!shapes::in_domain_D(r)) continue;
        try {
            if (quintuple_min_angle(r) >= min_angle) return r;
        } catch (const NotInA&) {
            continue;
        }
    }
    throw ConfigError("sample_rho_in_domain: rejection budget exhausted");
}

inline PentagonInstance sample_pentagon_instance(const TetWeight& w, Rng& rng,
                                                 double min_angle, int index = 0) {
    const RhoSix rho = sample_rho_in_domain(rng, min_angle);
    const AngleTriple a0 = shapes::alpha0_from_rho(rho);
    const AngleTriple a4 = shapes::alpha_from_rho(rho.rho23, rho.rho24, rho.rho34);
    const double a2_first = rho.rho24 - rho.rho14;
    const PentagonAngles angles = shapes::pentagon_angles(a0, a4, a2_first);

    const auto kind = w.state_space().kind;
    PentagonExternals e;
    for (cplx* p : {&e.x01, &e.x02, &e.x03, &e.x04, &e.x12, &e.x14, &e.x23, &e.x24, &e.x34})
        *p = sample_state(rng, kind);
    std::string digest = "pentagon;" + w.digest() + ";" + shapes::digest(rho) +
                         ";k=" + std::to_string(index);
    return {angles, e, cplx(1.0), std::move(digest)};
}

inline TE6Instance sample_te6_instance(const TetWeight& w, Rng& rng, const RhoSix& rho,
                                       int index = 0) {
    const auto kind = w.state_space().kind;
    TE6Externals e;
    for (cplx* p : {&e.a1, &e.a2, &e.a3, &e.a4, &e.b1, &e.b2, &e.b3, &e.b4, &e.c1, &e.c2,
                    &e.c3, &e.c4, &e.c5, &e.c6})
        *p = sample_state(rng, kind);
    std::string digest =
        "te6;" + w.digest() + ";" + shapes::digest(rho) + ";k=" + std::to_string(index);
    return make_te6_instance(rho, e, std::move(digest));
}

}  // namespace stint::identities
