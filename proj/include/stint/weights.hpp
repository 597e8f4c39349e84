#pragma once

// Tetrahedral Boltzmann weights.  Two models are implemented behind one
// interface: a compact model on the unit circle built from G_q and a
// noncompact model on the real line built from Psi_b.  Both are symmetric
// under the Z2/Z3 rotations and under transposition, which the tests assert.

#include <array>
#include <cmath>
#include <string>
#include <unordered_map>

#include "json.hpp"
#include "stint/common.hpp"
#include "stint/quadrature.hpp"
#include "stint/shapes.hpp"
#include "stint/specfun.hpp"

namespace stint::weights {

using shapes::AngleTriple;
using specfun::BParam;
using specfun::ContourConfig;
using specfun::QParam;
using specfun::TruncationPolicy;

enum class ModelKind { ThreeDIndex, KLV };

inline const char* model_name(ModelKind m) {
    return m == ModelKind::ThreeDIndex ? "3dindex" : "klv";
}

// State variables on the six edges: x[v] on edge 0v, xp[v] on the opposite
// edge (0-based storage for the 1-based labels).
struct EdgeStates {
    std::array<cplx, 3> x;
    std::array<cplx, 3> xp;
};

// Cube-corner states, labeled as in the local-weight figure: a at the
// origin, b/c/d its x/y/z neighbors, e opposite, f/g/h the neighbors of e.
struct IrcCorners {
    cplx a, b, c, d, e, f, g, h;
};

// Call-local memo for the special-function evaluations inside integrals.
// Values are keyed on the full complex argument; the owner guarantees fixed
// model parameters for the cache lifetime.
struct EvalCache {
    std::unordered_map<CplxKey, cplx, CplxKeyHash> fn;
};

inline EdgeStates rotate_z2(const EdgeStates& s) {
    return {{s.x[0], s.xp[1], s.xp[2]}, {s.xp[0], s.x[1], s.x[2]}};
}

inline std::pair<AngleTriple, EdgeStates> rotate_z3(const AngleTriple& a,
                                                    const EdgeStates& s) {
    return {a.cycled(),
            EdgeStates{{s.x[1], s.x[2], s.x[0]}, {s.xp[1], s.xp[2], s.xp[0]}}};
}

class TetWeight {
public:
    static TetWeight three_d_index(QParam q, TruncationPolicy pol = {}) {
        TetWeight w(ModelKind::ThreeDIndex);
        w.q_ = q.q;
        w.trunc_ = pol;
        // prefactor (q; q)^2 / (q^2; q^2)
        const cplx pq = specfun::q_pochhammer(q.q, q, pol).value;
        const cplx pq2 = specfun::q_pochhammer(q.q * q.q, QParam(q.q * q.q), pol).value;
        w.prefactor_ = pq * pq / pq2;
        return w;
    }

    static TetWeight klv(BParam b, ContourConfig contour = {}) {
        TetWeight w(ModelKind::KLV);
        w.b_ = b.b;
        w.contour_ = contour;
        w.log_phi0_ = specfun::detail::log_phi_b(cplx(0.0), b, contour).value;
        return w;
    }

    // {"model": "3dindex", "q": 0.3} or {"model": "klv", "b": 1.0}
    static TetWeight from_json(const nlohmann::json& j) {
        const std::string m = j.at("model").get<std::string>();
        if (m == "3dindex") return three_d_index(QParam(j.at("q").get<double>()));
        if (m == "klv") return klv(BParam(j.at("b").get<double>()));
        throw ConfigError("TetWeight: unknown model '" + m + "'");
    }

    ModelKind model() const { return model_; }

    quadrature::StateSpace state_space() const {
        return {model_ == ModelKind::ThreeDIndex ? quadrature::SpaceKind::UnitCircle
                                                 : quadrature::SpaceKind::RealLine};
    }

    // Closest approach to the boundary of A that the evaluator accepts.
    double angle_margin() const { return model_ == ModelKind::KLV ? kKlvMargin : 0.0; }

    double b() const { return b_; }
    cplx q() const { return q_; }

    std::string digest() const {
        if (model_ == ModelKind::ThreeDIndex)
            return std::string("model=3dindex;q=") + fmt_cplx(q_);
        return std::string("model=klv;b=") + fmt_g17(b_);
    }

    // T(alpha; x | x')
    cplx eval(const AngleTriple& alpha, const EdgeStates& s, EvalCache* cache = nullptr) const {
        check_states(s);
        if (model_ == ModelKind::ThreeDIndex) return eval_3dindex(alpha, s, cache);
        return eval_klv(alpha, s, cache);
    }

    // Weight of a negative tetrahedron, realized as conj . eval . conj.
    cplx eval_bar(const AngleTriple& alpha, const EdgeStates& s, EvalCache* cache = nullptr) const {
        EdgeStates c;
        for (int v = 0; v < 3; ++v) {
            c.x[v] = std::conj(s.x[v]);
            c.xp[v] = std::conj(s.xp[v]);
        }
        return std::conj(eval(alpha, c, cache));
    }

    // ^t T: opposite-edge states exchanged.
    cplx eval_transpose(const AngleTriple& alpha, const EdgeStates& s,
                        EvalCache* cache = nullptr) const {
        return eval(alpha, EdgeStates{s.xp, s.x}, cache);
    }

    // Local cube weight W_{rho_ij, rho_ik, rho_jk} = T(alpha(rho); f, a, h | b, e, d).
    cplx irc_weight(double rho_ij, double rho_ik, double rho_jk, const IrcCorners& c,
                    EvalCache* cache = nullptr) const {
        const AngleTriple alpha = shapes::alpha_from_rho(rho_ij, rho_ik, rho_jk);
        return eval(alpha, EdgeStates{{c.f, c.a, c.h}, {c.b, c.e, c.d}}, cache);
    }

private:
    static constexpr double kKlvMargin = 0.05;
    static constexpr double kStateTol = 1e-12;

    explicit TetWeight(ModelKind m) : model_(m) {}

    void check_states(const EdgeStates& s) const {
        for (int v = 0; v < 3; ++v) {
            for (cplx z : {s.x[v], s.xp[v]}) {
                if (model_ == ModelKind::ThreeDIndex) {
                    if (std::abs(std::abs(z) - 1.0) > kStateTol)
                        throw EvaluationError("eval: state off the unit circle");
                } else if (std::abs(z.imag()) > kStateTol) {
                    throw EvaluationError("eval: state not real");
                }
            }
        }
    }

    // (-q)^{alpha/pi} on the principal branch, exp((alpha/pi)(log q + i pi)).
    cplx minus_q_pow(double alpha) const {
        return std::exp((alpha / kPi) * (std::log(q_) + cplx(0.0, kPi)));
    }

    cplx cached_gq(cplx arg, EvalCache* cache) const {
        if (cache) {
            const CplxKey key = cplx_key(arg);
            auto it = cache->fn.find(key);
            if (it != cache->fn.end()) return it->second;
            const cplx v = specfun::g_q(arg, QParam(q_), trunc_).value;
            cache->fn.emplace(key, v);
            return v;
        }
        return specfun::g_q(arg, QParam(q_), trunc_).value;
    }

    cplx cached_psi(cplx arg, EvalCache* cache) const {
        if (cache) {
            const CplxKey key = cplx_key(arg);
            auto it = cache->fn.find(key);
            if (it != cache->fn.end()) return it->second;
            const cplx v = psi_direct(arg);
            cache->fn.emplace(key, v);
            return v;
        }
        return psi_direct(arg);
    }

    cplx psi_direct(cplx arg) const {
        const cplx lp = specfun::detail::log_phi_b(arg, BParam(b_), contour_).value;
        return std::exp(cplx(0.0, -0.5 * kPi) * arg * arg + lp - log_phi0_);
    }

    // prefactor * prod_v G_q((-q)^{alpha_v/pi} x_{v-1} x'_{v-1} / (x_{v+1} x'_{v+1})),
    // indices mod 3.
    cplx eval_3dindex(const AngleTriple& alpha, const EdgeStates& s, EvalCache* cache) const {
        cplx out = prefactor_;
        for (int v0 = 0; v0 < 3; ++v0) {
            const int prev = (v0 + 2) % 3;
            const int next = (v0 + 1) % 3;
            const cplx num = s.x[prev] * s.xp[prev];
            const cplx den = s.x[next] * s.xp[next];
            const cplx mq = minus_q_pow(alpha.a(v0 + 1));
            // equal products cancel exactly (periodic lattices collapse
            // corner indices, and z/z would otherwise cost an ulp)
            const cplx arg = (num == den) ? mq : mq * num / den;
            out *= cached_gq(arg, cache);
        }
        return out;
    }

    // prod_v Psi_b(x_{v+1} + x'_{v+1} - x_{v-1} - x'_{v-1}
    //              + i (b + 1/b)(1/2 - alpha_v/pi))
    cplx eval_klv(const AngleTriple& alpha, const EdgeStates& s, EvalCache* cache) const {
        if (!alpha.interior(kKlvMargin))
            throw OutOfStrip("eval: dihedral angle within " + fmt_g17(kKlvMargin) +
                             " of the boundary of A");
        const double strip = b_ + 1.0 / b_;
        cplx out = 1.0;
        for (int v0 = 0; v0 < 3; ++v0) {
            const int prev = (v0 + 2) % 3;
            const int next = (v0 + 1) % 3;
            const cplx arg = (s.x[next] + s.xp[next]) - (s.x[prev] + s.xp[prev]) +
                             cplx(0.0, strip * (0.5 - alpha.a(v0 + 1) / kPi));
            out *= cached_psi(arg, cache);
        }
        return out;
    }

    ModelKind model_;
    cplx q_{0.0};
    double b_ = 1.0;
    TruncationPolicy trunc_;
    ContourConfig contour_;
    cplx prefactor_{1.0};
    cplx log_phi0_{0.0};
};

}  // namespace stint::weights
