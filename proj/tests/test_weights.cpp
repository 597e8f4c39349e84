#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "stint/weights.hpp"

using namespace stint;
using namespace stint::weights;
using shapes::AngleTriple;
using specfun::BParam;
using specfun::QParam;

namespace {

AngleTriple sample_angles(Rng& rng, double margin) {
    for (;;) {
        const double a1 = rng.uniform(margin, kPi - 2.0 * margin);
        const double a3 = rng.uniform(margin, kPi - a1 - margin);
        if (kPi - a1 - a3 >= margin) return AngleTriple::from_first_third(a1, a3);
    }
}

EdgeStates sample_states(Rng& rng, const TetWeight& w) {
    const auto kind = w.state_space().kind;
    EdgeStates s;
    for (int v = 0; v < 3; ++v) {
        if (kind == quadrature::SpaceKind::UnitCircle) {
            s.x[v] = rng.unit_circle();
            s.xp[v] = rng.unit_circle();
        } else {
            s.x[v] = rng.uniform(-1.0, 1.0);
            s.xp[v] = rng.uniform(-1.0, 1.0);
        }
    }
    return s;
}

// direct transcription of the compact-model formula with long products
cplx compact_oracle(cplx q, const AngleTriple& a, const EdgeStates& s, int terms) {
    const auto poch = [&](cplx z, cplx qq) {
        cplx prod = 1.0, qi = 1.0;
        for (int i = 0; i < terms; ++i) {
            prod *= 1.0 - qi * z;
            qi *= qq;
        }
        return prod;
    };
    const auto gq = [&](cplx z) { return poch(-q / z, q) / poch(z, q); };
    cplx out = poch(q, q) * poch(q, q) / poch(q * q, q * q);
    for (int v0 = 0; v0 < 3; ++v0) {
        const int prev = (v0 + 2) % 3, next = (v0 + 1) % 3;
        const cplx mq = std::exp((a.a(v0 + 1) / kPi) * (std::log(q) + cplx(0.0, kPi)));
        out *= gq(mq * s.x[prev] * s.xp[prev] / (s.x[next] * s.xp[next]));
    }
    return out;
}

}  // namespace

TEST_CASE("compact weight at all-equal states collapses to pure powers") {
    const TetWeight w = TetWeight::three_d_index(QParam(0.3));
    const AngleTriple a(0.5, kPi - 1.1, 0.6);
    const EdgeStates s{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
    const cplx got = w.eval(a, s);

    cplx want = 1.0;
    const QParam q(0.3);
    const cplx pq = specfun::q_pochhammer(q.q, q).value;
    want = pq * pq / specfun::q_pochhammer(q.q * q.q, QParam(0.09)).value;
    for (int v = 1; v <= 3; ++v) {
        const cplx mq = std::exp((a.a(v) / kPi) * (std::log(cplx(0.3)) + cplx(0.0, kPi)));
        want *= specfun::g_q(mq, q).value;
    }
    CHECK(std::abs(got - want) < 1e-13 * std::abs(want));
}

TEST_CASE("compact weight matches a 400-term product oracle") {
    const TetWeight w = TetWeight::three_d_index(QParam(0.3));
    const AngleTriple a(0.5, kPi - 1.1, 0.6);
    Rng rng(501);
    for (int k = 0; k < 5; ++k) {
        const EdgeStates s = sample_states(rng, w);
        const cplx got = w.eval(a, s);
        const cplx want = compact_oracle(0.3, a, s, 400);
        CHECK(std::abs(got - want) < 1e-11 * std::abs(want));
    }
}

TEST_CASE("noncompact weight at the symmetric point") {
    const TetWeight w = TetWeight::klv(BParam(1.0));
    const AngleTriple a(kPi / 3.0, kPi / 3.0, kPi / 3.0);
    const EdgeStates s{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    const cplx got = w.eval(a, s);
    const cplx psi = specfun::psi_b(cplx(0.0, 2.0 / 6.0), BParam(1.0)).value;
    CHECK(std::abs(got - psi * psi * psi) < 1e-11 * std::abs(got));
}

TEST_CASE("rotation symmetries hold for both models") {
    for (const TetWeight& w :
         {TetWeight::three_d_index(QParam(0.3)), TetWeight::klv(BParam(1.0))}) {
        Rng rng(777);
        for (int k = 0; k < 20; ++k) {
            const AngleTriple a = sample_angles(rng, 0.15);
            const EdgeStates s = sample_states(rng, w);
            const cplx base = w.eval(a, s);

            const cplx z2 = w.eval(a, rotate_z2(s));
            CHECK(std::abs(z2 - base) < 1e-12 * std::abs(base));

            const auto [a3, s3] = rotate_z3(a, s);
            const cplx z3 = w.eval(a3, s3);
            CHECK(std::abs(z3 - base) < 1e-12 * std::abs(base));

            const cplx tr = w.eval_transpose(a, s);
            CHECK(std::abs(tr - base) < 1e-12 * std::abs(base));
        }
    }
}

TEST_CASE("three z3 rotations are the identity") {
    Rng rng(8);
    const TetWeight w = TetWeight::three_d_index(QParam(0.3));
    const AngleTriple a = sample_angles(rng, 0.2);
    const EdgeStates s = sample_states(rng, w);
    auto [a1, s1] = rotate_z3(a, s);
    auto [a2, s2] = rotate_z3(a1, s1);
    auto [a3, s3] = rotate_z3(a2, s2);
    // the recomputed middle entries pick up one rounding each
    CHECK(std::abs(a3.a1() - a.a1()) < 1e-15);
    CHECK(std::abs(a3.a3() - a.a3()) < 1e-15);
    for (int v = 0; v < 3; ++v) {
        CHECK(s3.x[v] == s.x[v]);
        CHECK(s3.xp[v] == s.xp[v]);
    }
}

TEST_CASE("transpose is an involution and only swaps state slots") {
    const TetWeight w = TetWeight::three_d_index(QParam(0.3));
    Rng rng(9);
    const AngleTriple a = sample_angles(rng, 0.2);
    const EdgeStates s = sample_states(rng, w);
    const EdgeStates swapped{s.xp, s.x};
    CHECK(w.eval_transpose(a, s) == w.eval(a, swapped));
    CHECK(w.eval_transpose(a, swapped) == w.eval(a, s));
}

TEST_CASE("negative-orientation weight is the conjugate at conjugated inputs") {
    for (const TetWeight& w :
         {TetWeight::three_d_index(QParam(0.3)), TetWeight::klv(BParam(1.0))}) {
        Rng rng(10);
        for (int k = 0; k < 10; ++k) {
            const AngleTriple a = sample_angles(rng, 0.15);
            const EdgeStates s = sample_states(rng, w);
            EdgeStates cs;
            for (int v = 0; v < 3; ++v) {
                cs.x[v] = std::conj(s.x[v]);
                cs.xp[v] = std::conj(s.xp[v]);
            }
            const cplx bar = w.eval_bar(a, s);
            CHECK(bar == std::conj(w.eval(a, cs)));
            CHECK(std::abs(std::abs(bar) - std::abs(w.eval(a, cs))) <
                  1e-13 * std::abs(bar));
        }
    }
    // real-line states are self-conjugate, so there the bar weight is the
    // plain conjugate
    const TetWeight klv = TetWeight::klv(BParam(1.2));
    Rng rng(11);
    const AngleTriple a = sample_angles(rng, 0.2);
    const EdgeStates s = sample_states(rng, klv);
    CHECK(klv.eval_bar(a, s) == std::conj(klv.eval(a, s)));
    // +-1 states are self-conjugate on the circle as well
    const TetWeight tdi = TetWeight::three_d_index(QParam(0.3));
    const EdgeStates pm{{1.0, -1.0, 1.0}, {-1.0, 1.0, -1.0}};
    CHECK(tdi.eval_bar(a, pm) == std::conj(tdi.eval(a, pm)));
}

TEST_CASE("compact-model arguments stay strictly inside the unit disk") {
    const TetWeight w = TetWeight::three_d_index(QParam(0.3));
    Rng rng(12);
    for (int k = 0; k < 50; ++k) {
        const AngleTriple a = sample_angles(rng, 0.02);
        for (int v = 1; v <= 3; ++v) {
            const double mod = std::pow(0.3, a.a(v) / kPi);
            CHECK(mod < 1.0);
        }
        // evaluation itself must not hit a pole
        const EdgeStates s = sample_states(rng, w);
        CHECK_NOTHROW(w.eval(a, s));
    }
}

TEST_CASE("noncompact arguments stay inside the strip") {
    const TetWeight w = TetWeight::klv(BParam(1.3));
    Rng rng(13);
    const double strip = 1.3 + 1.0 / 1.3;
    for (int k = 0; k < 50; ++k) {
        const AngleTriple a = sample_angles(rng, 0.06);
        for (int v = 1; v <= 3; ++v)
            CHECK(strip * std::abs(0.5 - a.a(v) / kPi) < 0.5 * strip);
        const EdgeStates s = sample_states(rng, w);
        CHECK_NOTHROW(w.eval(a, s));
    }
    // inside the margin band the evaluator refuses
    const AngleTriple tight = AngleTriple::from_first_third(0.01, 1.0);
    const EdgeStates s = sample_states(rng, w);
    CHECK_THROWS_AS(w.eval(tight, s), OutOfStrip);
}

TEST_CASE("state validation") {
    const TetWeight tdi = TetWeight::three_d_index(QParam(0.3));
    const AngleTriple a(0.5, kPi - 1.1, 0.6);
    CHECK_THROWS_AS(tdi.eval(a, EdgeStates{{0.5, 1.0, 1.0}, {1.0, 1.0, 1.0}}),
                    EvaluationError);
    const TetWeight klv = TetWeight::klv(BParam(1.0));
    CHECK_THROWS_AS(klv.eval(a, EdgeStates{{cplx(0.0, 0.4), 0.0, 0.0}, {0.0, 0.0, 0.0}}),
                    EvaluationError);
}

TEST_CASE("cube weight uses the (f, a, h | b, e, d) slot map") {
    const TetWeight w = TetWeight::three_d_index(QParam(0.3));
    Rng rng(14);

    // all corners equal: reduces to the all-equal-states evaluation
    const cplx one(1.0);
    const IrcCorners same{one, one, one, one, one, one, one, one};
    const cplx viaCube = w.irc_weight(0.0, 0.1, 0.6, same);
    const AngleTriple a = shapes::alpha_from_rho(0.0, 0.1, 0.6);
    const cplx direct = w.eval(a, EdgeStates{{one, one, one}, {one, one, one}});
    CHECK(viaCube == direct);

    // corners c and g do not enter
    IrcCorners c;
    for (cplx* p : {&c.a, &c.b, &c.c, &c.d, &c.e, &c.f, &c.g, &c.h}) *p = rng.unit_circle();
    const cplx v1 = w.irc_weight(0.0, 0.1, 0.6, c);
    c.g = rng.unit_circle();
    c.c = rng.unit_circle();
    const cplx v2 = w.irc_weight(0.0, 0.1, 0.6, c);
    CHECK(v1 == v2);

    // spectral form: alpha = (r_j - r_i, pi + r_i - r_k, r_k - r_j)
    const double r1 = 0.1, r2 = 0.5, r3 = 1.2;
    const cplx viaRho = w.irc_weight(r1 + r2, r1 + r3, r2 + r3, c);
    const AngleTriple ar = AngleTriple::from_first_third(r2 - r1, r3 - r2);
    const cplx viaAlpha = w.eval(ar, EdgeStates{{c.f, c.a, c.h}, {c.b, c.e, c.d}});
    CHECK(std::abs(viaRho - viaAlpha) < 1e-12 * std::abs(viaRho));
}

TEST_CASE("model parameters from json") {
    const TetWeight tdi = TetWeight::from_json({{"model", "3dindex"}, {"q", 0.3}});
    CHECK(tdi.model() == ModelKind::ThreeDIndex);
    CHECK(tdi.state_space().kind == quadrature::SpaceKind::UnitCircle);
    const TetWeight klv = TetWeight::from_json({{"model", "klv"}, {"b", 1.0}});
    CHECK(klv.model() == ModelKind::KLV);
    CHECK(klv.state_space().kind == quadrature::SpaceKind::RealLine);
    CHECK_THROWS_AS(TetWeight::from_json({{"model", "teichmuller"}}), ConfigError);
}

TEST_CASE("evaluation cache returns identical values") {
    const TetWeight w = TetWeight::klv(BParam(1.0));
    Rng rng(15);
    const AngleTriple a = sample_angles(rng, 0.2);
    const EdgeStates s = sample_states(rng, w);
    EvalCache cache;
    const cplx v1 = w.eval(a, s, &cache);
    const cplx v2 = w.eval(a, s, &cache);
    const cplx v3 = w.eval(a, s);
    CHECK(v1 == v2);
    CHECK(v1 == v3);
    CHECK(!cache.fn.empty());
}
