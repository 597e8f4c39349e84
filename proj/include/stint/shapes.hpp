#pragma once

// Dihedral-angle bookkeeping: the positive-angle simplex A, the pentagon
// compatibility system, the six-parameter domain D with its angle maps,
// spectral-parameter reduction, and shape gauge transformations.

#include <array>
#include <cmath>
#include <map>
#include <string>

#include "json.hpp"
#include "stint/common.hpp"

namespace stint::shapes {

inline constexpr double kAngleTol = 1e-12;

// (a1, a2, a3) with all entries positive and a1 + a2 + a3 = pi.  The middle
// entry is always recomputed as pi - a1 - a3 so the sum is exact.
class AngleTriple {
public:
    AngleTriple(double a1, double a2, double a3) : a1_(a1), a3_(a3) {
        if (std::abs(a1 + a2 + a3 - kPi) > kAngleTol)
            throw NotInA("AngleTriple: entries do not sum to pi");
        check();
    }

    static AngleTriple from_first_third(double a1, double a3) {
        return AngleTriple(a1, a3, Tag{});
    }

    double a1() const { return a1_; }
    double a2() const { return kPi - a1_ - a3_; }
    double a3() const { return a3_; }

    // 1-based accessor matching the vertex-edge labels.
    double a(int v) const {
        switch (v) {
            case 1: return a1();
            case 2: return a2();
            case 3: return a3();
        }
        throw ConfigError("AngleTriple: index must be 1, 2 or 3");
    }

    double min_entry() const { return std::min({a1(), a2(), a3()}); }

    // margin-inclusive up to the angle tolerance, so parameter sets sitting
    // exactly on the margin stay admissible under rounding
    bool interior(double margin) const {
        const double m = margin - kAngleTol;
        return a1() >= m && a2() >= m && a3() >= m &&
               a1() <= kPi - m && a2() <= kPi - m && a3() <= kPi - m;
    }

    AngleTriple cycled() const { return from_first_third(a2(), a1()); }

    friend bool operator==(const AngleTriple& x, const AngleTriple& y) {
        return x.a1_ == y.a1_ && x.a3_ == y.a3_;
    }

private:
    struct Tag {};
    AngleTriple(double a1, double a3, Tag) : a1_(a1), a3_(a3) { check(); }
    void check() const {
        if (!(a1() > 0.0) || !(a2() > 0.0) || !(a3() > 0.0))
            throw NotInA("AngleTriple: entries must be strictly positive");
    }
    double a1_, a3_;
};

struct RhoSix {
    double rho12, rho13, rho14, rho23, rho24, rho34;
};

struct SpectralQuad {
    double r1, r2, r3, r4;
};

// ---------------------------------------------------------------------------
// alpha(rho_ij, rho_ik, rho_jk) = (rho_jk - rho_ik, pi + rho_ij - rho_jk,
// rho_ik - rho_ij); throws NotInA when any entry is nonpositive.
// ---------------------------------------------------------------------------
inline AngleTriple alpha_from_rho(double rij, double rik, double rjk) {
    return AngleTriple::from_first_third(rjk - rik, rik - rij);
}

// Strict inequalities carving out the admissible six-parameter domain.
inline bool in_domain_D(const RhoSix& r) {
    const double lo = std::min(r.rho14, r.rho23);
    const double hi = std::max(r.rho14, r.rho23);
    return r.rho12 < r.rho13 && r.rho13 < lo && hi < r.rho24 && r.rho24 < r.rho34 &&
           r.rho24 < kPi + r.rho12 && r.rho34 < kPi + r.rho13 &&
           r.rho12 + r.rho34 < r.rho13 + r.rho24 &&
           r.rho13 + r.rho24 < r.rho14 + r.rho23;
}

inline AngleTriple alpha0_from_rho(const RhoSix& r) {
    if (!in_domain_D(r)) throw NotInDomain("alpha0_from_rho: rho outside the domain");
    return AngleTriple::from_first_third(r.rho14 + r.rho23 - r.rho13 - r.rho24,
                                         r.rho13 + r.rho24 - r.rho12 - r.rho34);
}

// ---------------------------------------------------------------------------
// A compatible quintuple of angle triples: the five relations
//
//   a1[1] = a0[1] + a2[1]    a1[3] = a0[3] + a4[1]
//   a3[1] = a2[1] + a4[1]    a3[3] = a0[1] + a4[3]
//   a2[3] = a1[3] + a3[3]
//
// hold to kAngleTol and every triple lies in A.
// ---------------------------------------------------------------------------
struct PentagonAngles {
    AngleTriple a0, a1, a2, a3, a4;

    static PentagonAngles checked(AngleTriple a0, AngleTriple a1, AngleTriple a2,
                                  AngleTriple a3, AngleTriple a4) {
        PentagonAngles p{a0, a1, a2, a3, a4};
        const double res = p.max_relation_residual();
        if (res > kAngleTol)
            throw Incompatible("PentagonAngles: relation residual " + fmt_g17(res));
        return p;
    }

    // No relation check; used by falsification probes that detune on purpose.
    static PentagonAngles unchecked(AngleTriple a0, AngleTriple a1, AngleTriple a2,
                                    AngleTriple a3, AngleTriple a4) {
        return PentagonAngles{a0, a1, a2, a3, a4};
    }

    double max_relation_residual() const {
        return std::max({std::abs(a1.a1() - (a0.a1() + a2.a1())),
                         std::abs(a1.a3() - (a0.a3() + a4.a1())),
                         std::abs(a3.a1() - (a2.a1() + a4.a1())),
                         std::abs(a3.a3() - (a0.a1() + a4.a3())),
                         std::abs(a2.a3() - (a1.a3() + a3.a3()))});
    }
};

// Forward parameterization of the compatibility system: given alpha^(0),
// alpha^(4) and the free entry alpha^(2)_1, the remaining entries are fixed
// up to the sum-pi rule.  Feasibility requires a0_2 + a4_2 > pi + alpha2_1.
inline PentagonAngles pentagon_angles(const AngleTriple& alpha0, const AngleTriple& alpha4,
                                      double alpha2_1) {
    if (!(alpha2_1 > 0.0)) throw Incompatible("pentagon_angles: alpha2_1 must be > 0");
    const double a1_first = alpha0.a1() + alpha2_1;
    const double a1_third = alpha0.a3() + alpha4.a1();
    const double a3_first = alpha2_1 + alpha4.a1();
    const double a3_third = alpha0.a1() + alpha4.a3();
    const double a2_third = a1_third + a3_third;
    try {
        PentagonAngles p = PentagonAngles::unchecked(
            alpha0, AngleTriple::from_first_third(a1_first, a1_third),
            AngleTriple::from_first_third(alpha2_1, a2_third),
            AngleTriple::from_first_third(a3_first, a3_third), alpha4);
        const double res = p.max_relation_residual();
        if (res > kAngleTol)
            throw Incompatible("pentagon_angles: relation residual " + fmt_g17(res));
        return p;
    } catch (const NotInA& e) {
        throw Incompatible(std::string("pentagon_angles: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Spectral reduction rho_ij = r_i + r_j and its flat-limit regularization.
// ---------------------------------------------------------------------------
inline RhoSix rho_from_spectral(const SpectralQuad& r) {
    return {r.r1 + r.r2, r.r1 + r.r3, r.r1 + r.r4,
            r.r2 + r.r3, r.r2 + r.r4, r.r3 + r.r4};
}

// r1 < r2 < r3 < r4 < pi + r1 - margin
inline bool spectral_ordered(const SpectralQuad& r, double margin = 0.0) {
    return r.r1 < r.r2 && r.r2 < r.r3 && r.r3 < r.r4 && r.r4 < kPi + r.r1 - margin;
}

// rho12 -> r1 + r2 - eps, rho13 -> r1 + r3 - delta; accepts eps >= delta >= 0
// so the unregularized tuple is the eps = delta = 0 limit point.
inline RhoSix rho_regularized(const SpectralQuad& r, double eps, double delta) {
    if (eps < delta || delta < 0.0)
        throw ConfigError("rho_regularized: need eps >= delta >= 0");
    RhoSix rho = rho_from_spectral(r);
    rho.rho12 -= eps;
    rho.rho13 -= delta;
    return rho;
}

// ---------------------------------------------------------------------------
// Shape gauge field: one parameter per lattice edge, indexed by the dual
// vertex (i, j, k) carrying the state variable at (i+1/2, j+1/2, k+1/2).
// periods (L, M, N) wrap the indices; a zero period means no wrapping.
// ---------------------------------------------------------------------------
struct GaugeField {
    std::map<std::array<int, 3>, double> theta;
    std::array<int, 3> periods{0, 0, 0};

    double at(int i, int j, int k) const {
        if (periods[0] > 0) i = ((i % periods[0]) + periods[0]) % periods[0];
        if (periods[1] > 0) j = ((j % periods[1]) + periods[1]) % periods[1];
        if (periods[2] > 0) k = ((k % periods[2]) + periods[2]) % periods[2];
        auto it = theta.find({i, j, k});
        if (it == theta.end())
            throw MissingEdge("GaugeField: no parameter at (" + std::to_string(i) + "," +
                              std::to_string(j) + "," + std::to_string(k) + ")");
        return it->second;
    }
};

// Change of the dihedral triple of the cube at (l, m, n) under the gauge
// field: delta_alpha = sum_{sigma, eta} sigma (theta_{l-eta, m-eta, n+sigma eta},
// theta_{l-eta, m+sigma eta, n+eta}, theta_{l+sigma eta, m+eta, n+eta}).
// Half-integer coordinates map to dual indices via i = coord - 1/2.
inline std::array<double, 3> gauge_delta_alpha(const GaugeField& th,
                                               std::array<int, 3> cube) {
    const auto [l, m, n] = cube;
    std::array<double, 3> d{0.0, 0.0, 0.0};
    for (int s = -1; s <= 1; s += 2) {
        for (int e = -1; e <= 1; e += 2) {  // e encodes eta = e/2
            // coordinate l - eta -> dual index l - (e+1)/2, etc.
            const auto idx = [](int base, int sign) { return base - (sign + 1) / 2; };
            d[0] += s * th.at(idx(l, e), idx(m, e), idx(n, -s * e));
            d[1] += s * th.at(idx(l, e), idx(m, -s * e), idx(n, -e));
            d[2] += s * th.at(idx(l, -s * e), idx(m, -e), idx(n, -e));
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// JSON round-trips (radians as IEEE doubles).
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const RhoSix& r) {
    return {{"rho12", r.rho12}, {"rho13", r.rho13}, {"rho14", r.rho14},
            {"rho23", r.rho23}, {"rho24", r.rho24}, {"rho34", r.rho34}};
}

inline RhoSix rho_from_json(const nlohmann::json& j) {
    return {j.at("rho12").get<double>(), j.at("rho13").get<double>(),
            j.at("rho14").get<double>(), j.at("rho23").get<double>(),
            j.at("rho24").get<double>(), j.at("rho34").get<double>()};
}

inline nlohmann::json to_json(const SpectralQuad& r) {
    return {{"r1", r.r1}, {"r2", r.r2}, {"r3", r.r3}, {"r4", r.r4}};
}

inline SpectralQuad spectral_from_json(const nlohmann::json& j) {
    return {j.at("r1").get<double>(), j.at("r2").get<double>(),
            j.at("r3").get<double>(), j.at("r4").get<double>()};
}

inline nlohmann::json to_json(const AngleTriple& a) {
    return {{"a1", a.a1()}, {"a2", a.a2()}, {"a3", a.a3()}};
}

inline AngleTriple angles_from_json(const nlohmann::json& j) {
    return AngleTriple(j.at("a1").get<double>(), j.at("a2").get<double>(),
                       j.at("a3").get<double>());
}

inline std::string digest(const RhoSix& r) {
    return "rho=" + fmt_g17(r.rho12) + "," + fmt_g17(r.rho13) + "," + fmt_g17(r.rho14) +
           "," + fmt_g17(r.rho23) + "," + fmt_g17(r.rho24) + "," + fmt_g17(r.rho34);
}

}  // namespace stint::shapes
