#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stint {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Default seed for instance-sampling suites.
inline constexpr std::uint64_t kSuiteSeed = 0xA11CE;

// ---------------------------------------------------------------------------
// Error hierarchy. Every throwing operation documents which of these it uses.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergent : Error { using Error::Error; };       // truncated product ran out of terms
struct PoleHit : Error { using Error::Error; };             // argument too close to a pole
struct OutOfStrip : Error { using Error::Error; };          // outside the convergence strip
struct QuadratureFailure : Error { using Error::Error; };   // tail/retry budget exhausted
struct NotInA : Error { using Error::Error; };              // dihedral triple not positive / sum != pi
struct NotInDomain : Error { using Error::Error; };         // rho tuple outside the admissible domain
struct Incompatible : Error { using Error::Error; };        // pentagon angle system unsatisfiable
struct MissingEdge : Error { using Error::Error; };         // gauge field lacks a referenced edge
struct OrderingViolated : Error { using Error::Error; };    // spectral parameters out of order
struct DimMismatch : Error { using Error::Error; };         // transfer matrices not comparable
struct TooLarge : Error { using Error::Error; };            // configuration count above hard cap
struct AngleDomainViolated : Error { using Error::Error; }; // lattice spectral triple exits the angle domain
struct EvaluationError : Error { using Error::Error; };     // weight evaluation failed
struct ConfigError : Error { using Error::Error; };         // bad parameters / job description

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 is fully specified by the standard; doubles
// are derived by hand so results do not depend on libstdc++'s distributions.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform point on the unit circle, e^{2 pi i u}
    cplx unit_circle() {
        double u = uniform();
        return {std::cos(2.0 * kPi * u), std::sin(2.0 * kPi * u)};
    }

private:
    std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------------
// Small formatting / digest helpers shared by reports.
// ---------------------------------------------------------------------------

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string fmt_cplx(cplx z) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", z.real(), z.imag());
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string short_digest(std::string_view s) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

// Hashable bit pattern of a complex double, used as a memo key.
struct CplxKey {
    std::uint64_t re, im;
    friend bool operator==(const CplxKey&, const CplxKey&) = default;
};

inline CplxKey cplx_key(cplx z) {
    CplxKey k;
    double re = z.real(), im = z.imag();
    std::memcpy(&k.re, &re, sizeof(double));
    std::memcpy(&k.im, &im, sizeof(double));
    return k;
}

struct CplxKeyHash {
    std::size_t operator()(const CplxKey& k) const {
        std::uint64_t x = k.re * 0x9e3779b97f4a7c15ULL ^ (k.im + 0x7f4a7c15ULL);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        return static_cast<std::size_t>(x);
    }
};

}  // namespace stint
