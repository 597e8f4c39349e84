#pragma once

// Deterministic node/weight grids for the three state-space measures and an
// integration driver with a half-resolution error estimate.

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stint/common.hpp"

namespace stint::quadrature {

enum class SpaceKind { UnitCircle, RealLine, UnitInterval };

// Measure convention is attached to the kind: dz/(2 pi i z) on the circle,
// dx on the line and on [0,1].
struct StateSpace {
    SpaceKind kind;
};

inline const char* kind_name(SpaceKind k) {
    switch (k) {
        case SpaceKind::UnitCircle: return "circle";
        case SpaceKind::RealLine: return "line";
        case SpaceKind::UnitInterval: return "interval";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration, cached per
// order behind a mutex.
// ---------------------------------------------------------------------------
inline const std::pair<std::vector<double>, std::vector<double>>&
gauss_legendre(int n) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    if (n < 1) throw ConfigError("gauss_legendre: order must be >= 1");
    std::vector<double> x(n), w(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

// ---------------------------------------------------------------------------
// Grid: immutable nodes + weights, with enough construction metadata to
// rebuild a half-resolution version of itself.
// ---------------------------------------------------------------------------
struct Grid {
    SpaceKind kind = SpaceKind::UnitCircle;
    std::vector<cplx> nodes;
    std::vector<double> weights;

    // construction parameters
    int circle_m = 0;
    double line_x = 0.0;
    int panels = 0;
    int order = 0;

    std::string meta() const {
        if (kind == SpaceKind::UnitCircle)
            return "circle:M=" + std::to_string(circle_m);
        std::string head = kind == SpaceKind::RealLine ? "line:X=" : "interval:X=";
        return head + fmt_g17(line_x) + ";panels=" + std::to_string(panels) +
               ";order=" + std::to_string(order);
    }
};

// Uniform angular nodes z_k = e^{2 pi i k / M}, all weights 1/M, so that the
// weighted sum is the trapezoid rule for the measure dz/(2 pi i z).
inline Grid circle_grid(int m) {
    if (m < 2) throw ConfigError("circle_grid: M must be >= 2");
    Grid g;
    g.kind = SpaceKind::UnitCircle;
    g.circle_m = m;
    g.nodes.reserve(m);
    g.weights.assign(m, 1.0 / m);
    for (int k = 0; k < m; ++k) {
        const double th = 2.0 * kPi * k / m;
        g.nodes.emplace_back(std::cos(th), std::sin(th));
    }
    return g;
}

namespace detail {

inline Grid composite_gl(SpaceKind kind, double lo, double hi, int panels, int order) {
    const auto& [gx, gw] = gauss_legendre(order);
    Grid g;
    g.kind = kind;
    g.line_x = (kind == SpaceKind::RealLine) ? hi : hi - lo;
    g.panels = panels;
    g.order = order;
    const double h = (hi - lo) / panels;
    g.nodes.reserve(static_cast<std::size_t>(panels) * order);
    g.weights.reserve(static_cast<std::size_t>(panels) * order);
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * h;
        for (int k = 0; k < order; ++k) {
            g.nodes.emplace_back(a + 0.5 * h * (gx[k] + 1.0), 0.0);
            g.weights.push_back(0.5 * h * gw[k]);
        }
    }
    return g;
}

}  // namespace detail

// Composite Gauss-Legendre on [-X, X].
inline Grid line_grid(double x, int panels, int order) {
    if (!(x > 0.0)) throw ConfigError("line_grid: X must be > 0");
    if (panels < 1 || order < 1) throw ConfigError("line_grid: bad panels/order");
    return detail::composite_gl(SpaceKind::RealLine, -x, x, panels, order);
}

// Composite Gauss-Legendre on [0, 1].  No in-scope model integrates over the
// interval; the constructor exists for completeness.
inline Grid unit_interval_grid(int panels, int order) {
    if (panels < 1 || order < 1) throw ConfigError("unit_interval_grid: bad panels/order");
    return detail::composite_gl(SpaceKind::UnitInterval, 0.0, 1.0, panels, order);
}

// Half-resolution companion grid, when one exists.
inline std::optional<Grid> coarsened(const Grid& g) {
    switch (g.kind) {
        case SpaceKind::UnitCircle:
            if (g.circle_m >= 4 && g.circle_m % 2 == 0) return circle_grid(g.circle_m / 2);
            return std::nullopt;
        case SpaceKind::RealLine:
            if (g.panels >= 2) return line_grid(g.line_x, std::max(1, g.panels / 2), g.order);
            return std::nullopt;
        case SpaceKind::UnitInterval:
            if (g.panels >= 2) return unit_interval_grid(std::max(1, g.panels / 2), g.order);
            return std::nullopt;
    }
    return std::nullopt;
}

// Weighted sum over the grid; err_est is the difference against the
// half-resolution grid (0 when no coarse companion exists).
template <class F>
std::pair<cplx, double> integrate(F&& f, const Grid& g) {
    cplx fine = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) fine += g.weights[i] * f(g.nodes[i]);
    double err = 0.0;
    if (auto cg = coarsened(g)) {
        cplx coarse = 0.0;
        for (std::size_t i = 0; i < cg->nodes.size(); ++i)
            coarse += cg->weights[i] * f(cg->nodes[i]);
        err = std::abs(fine - coarse);
    }
    return {fine, err};
}

// ---------------------------------------------------------------------------
// Line-grid integration with a runtime decay check: the integrand magnitude
// at the outermost nodes must be below edge_factor times the interior peak,
// otherwise the window is doubled (densifying panels with it) and the
// integral retried, up to max_retries times.
// ---------------------------------------------------------------------------
struct AdaptiveOutcome {
    cplx value;
    double err_est;
    Grid grid;
};

template <class F>
AdaptiveOutcome integrate_adaptive(F&& f, Grid start, int max_retries = 3,
                                   double edge_factor = 1e-12) {
    if (start.kind == SpaceKind::UnitCircle) {
        auto [v, e] = integrate(f, start);
        return {v, e, std::move(start)};
    }
    Grid g = std::move(start);
    for (int attempt = 0;; ++attempt) {
        std::vector<cplx> vals(g.nodes.size());
        double peak = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            vals[i] = f(g.nodes[i]);
            peak = std::max(peak, std::abs(vals[i]));
        }
        const std::size_t n = g.nodes.size();
        const std::size_t edge = std::min<std::size_t>(g.order, n);
        double edge_mag = 0.0;
        for (std::size_t i = 0; i < edge; ++i) {
            edge_mag = std::max(edge_mag, std::abs(vals[i]));
            edge_mag = std::max(edge_mag, std::abs(vals[n - 1 - i]));
        }
        if (edge_mag <= edge_factor * peak || peak == 0.0) {
            cplx fine = 0.0;
            for (std::size_t i = 0; i < n; ++i) fine += g.weights[i] * vals[i];
            double err = 0.0;
            if (auto cg = coarsened(g)) {
                cplx coarse = 0.0;
                for (std::size_t i = 0; i < cg->nodes.size(); ++i)
                    coarse += cg->weights[i] * f(cg->nodes[i]);
                err = std::abs(fine - coarse);
            }
            return {fine, err, std::move(g)};
        }
        if (attempt >= max_retries)
            throw QuadratureFailure("integrate_adaptive: integrand not decayed at |x| = " +
                                    fmt_g17(g.line_x) + " after retries");
        g = line_grid(2.0 * g.line_x, 2 * g.panels, g.order);
    }
}

}  // namespace stint::quadrature
