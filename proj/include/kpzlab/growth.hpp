#pragma once
// The general half-space interface model: growth functions psi/phi, the
// two-point recursion with boundary tilt, the tilted field
// f = f_N - t beta^{-1} log m, and the rescaled field f~ with its exp.
//
// psi(u,v) = phi(u-v) + (u+v)/2 for both built-ins:
//   polymer:   phi(u) = beta^{-1} log cosh(beta u / 2)
//   quadratic: phi(u) = (kappa/2) u^2

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixbits.hpp"
#include "noise.hpp"

namespace kpzlab {

// ------------------------------------------------------------- growth psi

struct GrowthFunction {
    std::string name;
    std::function<double(double, double)> psi;
    // analytic d^2/du^2 psi(u,0)|_0 = phi''(0) and the fourth derivative,
    // NaN when only numerical estimates are available
    double d2 = std::numeric_limits<double>::quiet_NaN();
    double d4 = std::numeric_limits<double>::quiet_NaN();

    bool has_analytic() const { return std::isfinite(d2) && std::isfinite(d4); }

    static GrowthFunction polymer(double beta) {
        if (beta == 0.0 || !std::isfinite(beta))
            throw std::invalid_argument("GrowthFunction::polymer: beta must be nonzero finite");
        GrowthFunction g;
        g.name = "polymer";
        g.psi = [beta](double u, double v) {
            // log cosh(w) = |w| + log1p(e^{-2|w|}) - log 2, overflow-safe
            const double w = 0.5 * beta * (u - v);
            const double lc = std::fabs(w) + std::log1p(std::exp(-2.0 * std::fabs(w))) -
                              std::numbers::ln2;
            return lc / beta + 0.5 * (u + v);
        };
        g.d2 = 0.25 * beta;
        g.d4 = -beta * beta * beta / 8.0;
        return g;
    }

    static GrowthFunction quadratic(double kappa) {
        if (!std::isfinite(kappa))
            throw std::invalid_argument("GrowthFunction::quadratic: kappa must be finite");
        GrowthFunction g;
        g.name = "quadratic";
        g.psi = [kappa](double u, double v) {
            const double w = u - v;
            return 0.5 * kappa * w * w + 0.5 * (u + v);
        };
        g.d2 = kappa;
        g.d4 = 0.0;
        return g;
    }
};

// phi(u) = psi(u/2, -u/2); inverts psi(u,v) = phi(u-v) + (u+v)/2.
inline std::function<double(double)> phi_from_psi(std::function<double(double, double)> psi) {
    return [psi](double u) { return psi(0.5 * u, -0.5 * u); };
}

// ------------------------------------------------- growth-function checker

struct GrowthCheck {
    double equivariance_residual = 0; // max |psi(u+c,v+c) - psi(u,v) - c|
    double symmetry_residual = 0;     // max |psi(u,v) - psi(v,u)|
    double effective_beta = 0;        // phi''(0) by Richardson central difference
    double effective_fourth = 0;      // phi''''(0) likewise
};

inline GrowthCheck check_growth_function(const std::function<double(double, double)>& psi,
                                         double h = 1e-3, int trials = 256) {
    if (!(h > 0.0)) throw std::invalid_argument("check_growth_function: h must be > 0");
    auto phi = phi_from_psi(psi);
    auto finite = [](double v) {
        if (!std::isfinite(v))
            throw std::domain_error("check_growth_function: non-finite psi evaluation");
        return v;
    };

    GrowthCheck out;
    for (int i = 0; i < trials; ++i) {
        auto u01 = [&](std::uint64_t j) {
            return 2.0 * uniform01(counter_hash(0x67726f77ull, i, j)) - 1.0;
        };
        const double u = u01(0), v = u01(1), c = u01(2);
        const double base = finite(psi(u, v));
        out.equivariance_residual =
            std::max(out.equivariance_residual, std::fabs(finite(psi(u + c, v + c)) - base - c));
        out.symmetry_residual =
            std::max(out.symmetry_residual, std::fabs(finite(psi(v, u)) - base));
    }

    // Richardson-extrapolated central differences of phi at 0
    auto d2 = [&](double s) {
        return (finite(phi(s)) - 2.0 * finite(phi(0.0)) + finite(phi(-s))) / (s * s);
    };
    out.effective_beta = (4.0 * d2(0.5 * h) - d2(h)) / 3.0;

    // fourth derivative wants a larger step: truncation is O(s^2) but
    // roundoff grows like eps/s^4
    const double h4 = std::max(h, 0.05);
    auto d4 = [&](double s) {
        return (finite(phi(2.0 * s)) - 4.0 * finite(phi(s)) + 6.0 * finite(phi(0.0)) -
                4.0 * finite(phi(-s)) + finite(phi(-2.0 * s))) /
               (s * s * s * s);
    };
    out.effective_fourth = (16.0 * d4(0.5 * h4) - d4(h4)) / 15.0;
    return out;
}

// ------------------------------------------------------- initial profiles

// Initial profile Lambda on the lattice (argument is the lattice coordinate
// as a real); lambda = beta^{-1} log Lambda seeds the interface.
inline std::function<double(double)> initial_profile(const std::string& name,
                                                     const ModelParams& params) {
    if (name == "flat") return [](double) { return 1.0; };
    if (name == "holder") {
        // Hoelder-1/2^- wiggle, clipped into [1/C, C]
        const double rn = params.sqrtN(), C = 4.0;
        return [rn, C](double x) {
            const double v = std::exp(std::sin(std::sqrt(std::max(0.0, x) / rn)));
            return std::min(C, std::max(1.0 / C, v));
        };
    }
    throw std::invalid_argument("initial_profile: unknown profile '" + name + "'");
}

// ---------------------------------------------------------- interface field

// Raw heights f_N on the slab [0, x_max] x [0, T]; row t is valid for
// x <= x_max - t (light cone), and cells with x > x_eval are halo.
struct InterfaceField {
    ModelParams params;
    std::uint64_t noise_seed = 0;
    long long T = 0, x_eval = 0, x_max = 0;
    double tilt_per_step = 0.0; // beta^{-1} log m(theta)
    std::vector<double> raw;    // (T+1) rows of (x_max+1)
    bool finite = true;
    long long bad_x = -1, bad_t = -1;

    double f_raw(long long x, long long t) const {
        if (t < 0 || t > T || x < 0 || x > x_max - t)
            throw std::out_of_range("InterfaceField: (x,t) outside computed light cone");
        return raw[static_cast<std::size_t>(t) * (x_max + 1) + x];
    }
    // tilted field f = f_N - t beta^{-1} log m
    double f_tilted(long long x, long long t) const {
        return f_raw(x, t) - static_cast<double>(t) * tilt_per_step;
    }
    bool in_reported(long long x) const { return x <= x_eval; }
};

// Evolve the interface recursion on a slab wide enough that every reported
// cell has its full light cone:
//   x>=1:  f(x,t) = psi(f(x-1,t-1), f(x+1,t-1)) + N^{-1/4} y(x,t)
//   x==0:  f(0,t) = psi(f(1,t-1), f(1,t-1)) + N^{-1/4} y(0,t) + beta^{-1} log gamma
inline InterfaceField evolve_interface(const GrowthFunction& gf, const NoiseField& noise,
                                       const ModelParams& params,
                                       const std::function<double(double)>& Lambda,
                                       long long T, long long x_eval) {
    params.validate();
    if (T < 0 || x_eval < 0)
        throw std::invalid_argument("evolve_interface: T and x_eval must be >= 0");
    InterfaceField f;
    f.params = params;
    f.noise_seed = noise.master_seed;
    f.T = T;
    f.x_eval = x_eval;
    f.x_max = x_eval + T;
    f.tilt_per_step = std::log(noise.spec.mgf(params.theta())) / params.beta;
    f.raw.assign(static_cast<std::size_t>(T + 1) * (f.x_max + 1),
                 std::numeric_limits<double>::quiet_NaN());

    const double amp = std::pow(static_cast<double>(params.N), -0.25);
    const double blg = std::log(params.gamma()) / params.beta;
    const std::size_t stride = static_cast<std::size_t>(f.x_max + 1);

    for (long long x = 0; x <= f.x_max; ++x) {
        const double L = Lambda(static_cast<double>(x));
        if (!(L > 0.0) || !std::isfinite(L))
            throw std::invalid_argument("evolve_interface: Lambda must be positive finite");
        f.raw[x] = std::log(L) / params.beta;
    }
    for (long long t = 1; t <= T && f.finite; ++t) {
        const double* prev = &f.raw[(t - 1) * stride];
        double* cur = &f.raw[t * stride];
        const long long hi = f.x_max - t;
        cur[0] = gf.psi(prev[1], prev[1]) + amp * noise.y(0, t) + blg;
        for (long long x = 1; x <= hi; ++x)
            cur[x] = gf.psi(prev[x - 1], prev[x + 1]) + amp * noise.y(x, t);
        for (long long x = 0; x <= hi; ++x) {
            if (!std::isfinite(cur[x])) {
                f.finite = false;
                f.bad_x = x;
                f.bad_t = t;
                break;
            }
        }
    }
    return f;
}

// ----------------------------------------------------------- rescaled view

// f~(x,t) = f_N(sqrtN x, N t) - (V + beta^{-1} N log m + N psi(0,0)) t,
// queried in rescaled coordinates with bilinear interpolation off-lattice.
struct RescaledField {
    const InterfaceField* field = nullptr;
    double V = 0.0, psi00 = 0.0;

    double drift_per_unit_t() const {
        const double N = static_cast<double>(field->params.N);
        return V + N * field->tilt_per_step + N * psi00;
    }

    double f_tilde(double x, double t) const {
        const ModelParams& p = field->params;
        const double xl = x * p.sqrtN(), tl = t * static_cast<double>(p.N);
        const long long t0 = static_cast<long long>(std::floor(tl));
        const long long x0 = static_cast<long long>(std::floor(xl));
        const double ft = tl - t0, fx = xl - x0;
        auto cell = [&](long long xi, long long ti) { return field->f_raw(xi, ti); };
        double v;
        if (ft < 1e-12 || t0 + 1 > field->T) {
            v = (fx < 1e-12) ? cell(x0, t0)
                             : (1.0 - fx) * cell(x0, t0) + fx * cell(x0 + 1, t0);
        } else {
            const double lo = (fx < 1e-12)
                                  ? cell(x0, t0)
                                  : (1.0 - fx) * cell(x0, t0) + fx * cell(x0 + 1, t0);
            const double hi = (fx < 1e-12)
                                  ? cell(x0, t0 + 1)
                                  : (1.0 - fx) * cell(x0, t0 + 1) + fx * cell(x0 + 1, t0 + 1);
            v = (1.0 - ft) * lo + ft * hi;
        }
        return v - drift_per_unit_t() * t;
    }

    double exp_beta_f(double x, double t) const {
        return std::exp(field->params.beta * f_tilde(x, t));
    }
};

inline RescaledField rescale_field(const InterfaceField& field, double V, double psi00 = 0.0) {
    RescaledField r;
    r.field = &field;
    r.V = V;
    r.psi00 = psi00;
    return r;
}

} // namespace kpzlab
