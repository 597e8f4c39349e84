#pragma once

// Discretized layer transfer matrices on small periodic lattices, their
// commutators, and partition functions by trace and by direct configuration
// sum.  sqrt(mu) is folded symmetrically into the row and column indices so
// matrix products and traces are the quadrature approximations of their
// continuum counterparts.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "stint/common.hpp"
#include "stint/quadrature.hpp"
#include "stint/shapes.hpp"
#include "stint/weights.hpp"

namespace stint::lattice {

using quadrature::Grid;
using shapes::AngleTriple;
using weights::EvalCache;
using weights::IrcCorners;
using weights::TetWeight;

inline constexpr int kMaxMatrixDim = 4096;
inline constexpr double kMaxBruteConfigs = 1e7;

// Torus dimensions plus the per-plane spectral parameters.
struct LatticeSpec {
    int L = 1, M = 1, N = 1;
    std::vector<double> s, t, u;

    void validate() const {
        if (L < 1 || M < 1 || N < 1) throw ConfigError("LatticeSpec: torus sizes must be >= 1");
        if (static_cast<int>(s.size()) != L || static_cast<int>(t.size()) != M ||
            static_cast<int>(u.size()) != N)
            throw ConfigError("LatticeSpec: spectral lists must have lengths L, M, N");
    }

    static LatticeSpec from_json(const nlohmann::json& j) {
        LatticeSpec sp;
        sp.L = j.at("L").get<int>();
        sp.M = j.at("M").get<int>();
        sp.N = j.at("N").get<int>();
        sp.s = j.at("s").get<std::vector<double>>();
        sp.t = j.at("t").get<std::vector<double>>();
        sp.u = j.at("u").get<std::vector<double>>();
        sp.validate();
        return sp;
    }

    std::string digest() const {
        std::string d = "L=" + std::to_string(L) + ";M=" + std::to_string(M) +
                        ";N=" + std::to_string(N) + ";s=";
        for (double v : s) d += fmt_g17(v) + ",";
        d += ";t=";
        for (double v : t) d += fmt_g17(v) + ",";
        d += ";u=";
        for (double v : u) d += fmt_g17(v) + ",";
        return d;
    }
};

struct TransferMatrix {
    Eigen::MatrixXcd mat;
    int L = 0, M = 0, nodes = 0;
    std::vector<double> s, t;
    std::string grid_meta;

    int dim() const { return static_cast<int>(mat.rows()); }
};

// Dihedral triple of the cube cut by planes with spectral parameters
// (s, t, u): (t - s, pi + s - u, u - t).
inline AngleTriple spectral_alpha(double s, double t, double u) {
    return AngleTriple::from_first_third(t - s, u - t);
}

namespace detail {

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

// digit for dual vertex (l, m) in the layer multi-index
inline int digit_of(int l, int m, int L, int M) { return wrap(l, L) * M + wrap(m, M); }

inline void check_dims(const LatticeSpec& spec, int nodes) {
    double dim = std::pow(static_cast<double>(nodes), spec.L * spec.M);
    if (dim > kMaxMatrixDim)
        throw TooLarge("transfer matrix dimension " + fmt_g17(dim) + " exceeds cap " +
                       std::to_string(kMaxMatrixDim));
}

inline void check_angles(const TetWeight& w, const LatticeSpec& spec, double layer_u) {
    const double margin = w.angle_margin();
    for (int l = 0; l < spec.L; ++l) {
        for (int m = 0; m < spec.M; ++m) {
            try {
                const AngleTriple a = spectral_alpha(spec.s[l], spec.t[m], layer_u);
                if (!a.interior(margin))
                    throw NotInA("margin " + fmt_g17(margin));
            } catch (const NotInA& e) {
                throw AngleDomainViolated("layer u=" + fmt_g17(layer_u) + " at (l,m)=(" +
                                          std::to_string(l) + "," + std::to_string(m) +
                                          "): " + e.what());
            }
        }
    }
}

// Core assembly over an arbitrary per-cube weight functor
// cplx(int l, int m, const IrcCorners&); periodic corner identifications are
// performed by the index rule alone.
template <class CubeFn>
Eigen::MatrixXcd assemble_layer(int L, int M, const Grid& grid, CubeFn&& cube) {
    const int nodes = static_cast<int>(grid.nodes.size());
    const int sites = L * M;
    int dim = 1;
    for (int i = 0; i < sites; ++i) dim *= nodes;

    std::vector<double> sqw(nodes);
    for (int i = 0; i < nodes; ++i) sqw[i] = std::sqrt(grid.weights[i]);

    const auto decode = [&](int idx, std::vector<int>& digits) {
        for (int p = 0; p < sites; ++p) {
            digits[p] = idx % nodes;
            idx /= nodes;
        }
    };

    Eigen::MatrixXcd mat(dim, dim);
    std::vector<int> bot(sites), top(sites);
    for (int bi = 0; bi < dim; ++bi) {
        decode(bi, bot);
        double wb = 1.0;
        for (int p = 0; p < sites; ++p) wb *= sqw[bot[p]];
        for (int ti = 0; ti < dim; ++ti) {
            decode(ti, top);
            double wt = 1.0;
            for (int p = 0; p < sites; ++p) wt *= sqw[top[p]];
            cplx val = 1.0;
            for (int l = 0; l < L; ++l) {
                for (int m = 0; m < M; ++m) {
                    const auto B = [&](int ll, int mm) {
                        return grid.nodes[bot[digit_of(ll, mm, L, M)]];
                    };
                    const auto Tn = [&](int ll, int mm) {
                        return grid.nodes[top[digit_of(ll, mm, L, M)]];
                    };
                    IrcCorners c;
                    c.a = B(l - 1, m - 1);
                    c.b = B(l, m - 1);
                    c.c = B(l - 1, m);
                    c.h = B(l, m);
                    c.d = Tn(l - 1, m - 1);
                    c.g = Tn(l, m - 1);
                    c.f = Tn(l - 1, m);
                    c.e = Tn(l, m);
                    val *= cube(l, m, c);
                }
            }
            mat(ti, bi) = val * wb * wt;
        }
    }
    return mat;
}

}  // namespace detail

// tau(layer_u): matrix over the discretized bottom/top layer states, row =
// top multi-index, column = bottom multi-index (digit of dual site (l, m) is
// l*M + m, base `nodes`).
inline TransferMatrix build_layer_transfer(const TetWeight& w, const LatticeSpec& spec,
                                           double layer_u, const Grid& grid) {
    spec.validate();
    detail::check_dims(spec, static_cast<int>(grid.nodes.size()));
    detail::check_angles(w, spec, layer_u);
    EvalCache cache;
    const auto cube = [&](int l, int m, const IrcCorners& c) {
        const AngleTriple a = spectral_alpha(spec.s[l], spec.t[m], layer_u);
        return w.eval(a, {{c.f, c.a, c.h}, {c.b, c.e, c.d}}, &cache);
    };
    TransferMatrix tm;
    tm.mat = detail::assemble_layer(spec.L, spec.M, grid, cube);
    tm.L = spec.L;
    tm.M = spec.M;
    tm.nodes = static_cast<int>(grid.nodes.size());
    tm.s = spec.s;
    tm.t = spec.t;
    tm.grid_meta = grid.meta();
    return tm;
}

// || t1 t2 - t2 t1 ||_F / (||t1||_F ||t2||_F)
inline double commutator_norm(const TransferMatrix& t1, const TransferMatrix& t2) {
    if (t1.dim() != t2.dim() || t1.nodes != t2.nodes || t1.grid_meta != t2.grid_meta ||
        t1.L != t2.L || t1.M != t2.M || t1.s != t2.s || t1.t != t2.t)
        throw DimMismatch("commutator_norm: transfer matrices not comparable");
    const Eigen::MatrixXcd c = t1.mat * t2.mat - t2.mat * t1.mat;
    return c.norm() / (t1.mat.norm() * t2.mat.norm());
}

// Z = Tr(tau(u_N) ... tau(u_1))
inline cplx partition_trace(const TetWeight& w, const LatticeSpec& spec, const Grid& grid) {
    spec.validate();
    Eigen::MatrixXcd prod;
    for (int n = 0; n < spec.N; ++n) {
        const TransferMatrix tm = build_layer_transfer(w, spec, spec.u[n], grid);
        prod = (n == 0) ? tm.mat : Eigen::MatrixXcd(tm.mat * prod);
    }
    return prod.trace();
}

namespace detail {

// Direct sum over all configurations; CubeFn is cplx(int l, int m, int n,
// const IrcCorners&).
template <class CubeFn>
cplx config_sum(int L, int M, int N, const Grid& grid, CubeFn&& cube) {
    const int nodes = static_cast<int>(grid.nodes.size());
    const int sites = L * M * N;
    const double total = std::pow(static_cast<double>(nodes), sites);
    if (total > kMaxBruteConfigs)
        throw TooLarge("configuration count " + fmt_g17(total) + " exceeds cap");

    std::vector<int> digit(sites, 0);  // dual site (l, m, n) -> (l*M + m)*N + n
    const auto at = [&](int l, int m, int n) {
        return grid.nodes[digit[(wrap(l, L) * M + wrap(m, M)) * N + wrap(n, N)]];
    };

    cplx sum = 0.0;
    const long count = static_cast<long>(total);
    for (long cfg = 0; cfg < count; ++cfg) {
        cplx val = 1.0;
        for (int l = 0; l < L; ++l)
            for (int m = 0; m < M; ++m)
                for (int n = 0; n < N; ++n) {
                    IrcCorners c;
                    c.a = at(l - 1, m - 1, n - 1);
                    c.b = at(l, m - 1, n - 1);
                    c.c = at(l - 1, m, n - 1);
                    c.h = at(l, m, n - 1);
                    c.d = at(l - 1, m - 1, n);
                    c.g = at(l, m - 1, n);
                    c.f = at(l - 1, m, n);
                    c.e = at(l, m, n);
                    val *= cube(l, m, n, c);
                }
        double mu = 1.0;
        for (int p = 0; p < sites; ++p) mu *= grid.weights[digit[p]];
        sum += val * mu;
        // increment mixed-radix counter
        for (int p = 0; p < sites; ++p) {
            if (++digit[p] < nodes) break;
            digit[p] = 0;
        }
    }
    return sum;
}

}  // namespace detail

// Z as the integral of the product of all local weights over all
// configurations.
inline cplx partition_bruteforce(const TetWeight& w, const LatticeSpec& spec,
                                 const Grid& grid) {
    spec.validate();
    for (int n = 0; n < spec.N; ++n) detail::check_angles(w, spec, spec.u[n]);
    EvalCache cache;
    const auto cube = [&](int l, int m, int n, const IrcCorners& c) {
        const AngleTriple a = spectral_alpha(spec.s[l], spec.t[m], spec.u[n]);
        return w.eval(a, {{c.f, c.a, c.h}, {c.b, c.e, c.d}}, &cache);
    };
    return detail::config_sum(spec.L, spec.M, spec.N, grid, cube);
}

// (Z at the given spectral parameters, Z with every spectral parameter
// shifted by c).  The dihedral triples depend on differences only, so the
// two values agree to quadrature tolerance; for shifts exact in binary they
// agree bit for bit.
inline std::pair<cplx, cplx> gauge_probe(const TetWeight& w, const LatticeSpec& spec,
                                         const Grid& grid, double c) {
    const cplx z0 = partition_trace(w, spec, grid);
    LatticeSpec shifted = spec;
    for (double& v : shifted.s) v += c;
    for (double& v : shifted.t) v += c;
    for (double& v : shifted.u) v += c;
    const cplx z1 = partition_trace(w, shifted, grid);
    return {z0, z1};
}

}  // namespace stint::lattice
