#pragma once
// Model parameters and the noise layer: distribution families for the i.i.d.
// background y(x,t), their MGFs m(theta) and raw moments mu_k (k <= 8), the
// seeded lazy field, and the multiplicative variables
//   xi(x,t)       = exp(theta * y(x,t)) / m(theta) - 1,   theta = beta * N^{-1/4}
//   xi_tilde(x,t) = xi for x >= 1,  gamma*(1+xi) - 1 at the boundary x = 0.

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "mixbits.hpp"

namespace kpzlab {

// ---------------------------------------------------------------- parameters

struct ModelParams {
    long long N = 1024;   // lattice scaling parameter
    double beta = 1.0;    // curvature / inverse temperature
    double A = 0.0;       // boundary constant; gamma = 1 - A/sqrt(N)
    double a = 1.0;       // spatial window: x in [0, a*sqrt(N)]
    double b = 1.0;       // temporal window: t in [0, b*N]

    ModelParams() = default;
    ModelParams(long long N_, double beta_, double A_, double a_ = 1.0, double b_ = 1.0)
        : N(N_), beta(beta_), A(A_), a(a_), b(b_) {
        validate();
    }

    void validate() const {
        if (N < 1) throw std::invalid_argument("ModelParams: N must be >= 1");
        if (beta == 0.0 || !std::isfinite(beta))
            throw std::invalid_argument("ModelParams: beta must be nonzero finite");
        if (!(a > 0.0) || !(b > 0.0))
            throw std::invalid_argument("ModelParams: window sizes a, b must be positive");
        if (!(gamma() > 0.0))
            throw std::invalid_argument("ModelParams: gamma = 1 - A/sqrt(N) must be positive");
    }

    double sqrtN() const { return std::sqrt(static_cast<double>(N)); }
    // gamma is always derived, never stored, so it cannot drift from (A, N).
    double gamma() const { return 1.0 - A / sqrtN(); }
    double theta() const { return beta * std::pow(static_cast<double>(N), -0.25); }
    long long x_window() const { return static_cast<long long>(a * sqrtN()); }
    long long t_window() const { return static_cast<long long>(b * static_cast<double>(N)); }
};

// ---------------------------------------------------------------- noise law

enum class NoiseFamily { rademacher, gaussian, uniform, centered_binomial };

inline const char* family_name(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::rademacher: return "rademacher";
        case NoiseFamily::gaussian: return "gaussian";
        case NoiseFamily::uniform: return "uniform";
        case NoiseFamily::centered_binomial: return "centered_binomial";
    }
    return "?";
}

// A concrete mean-zero law with finite MGF.  `param` means: sigma for
// gaussian, half-width for uniform, trial count n (<= 64) for the centered
// binomial (sum of n fair +-1/2 steps); ignored for rademacher.
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::rademacher;
    double param = 1.0;

    NoiseSpec() = default;
    NoiseSpec(NoiseFamily f, double p = 1.0) : family(f), param(p) { validate(); }

    static NoiseSpec parse(const std::string& name, double param = 1.0) {
        if (name == "rademacher") return NoiseSpec(NoiseFamily::rademacher);
        if (name == "gaussian") return NoiseSpec(NoiseFamily::gaussian, param);
        if (name == "uniform") return NoiseSpec(NoiseFamily::uniform, param);
        if (name == "centered_binomial")
            return NoiseSpec(NoiseFamily::centered_binomial, param);
        throw std::invalid_argument("NoiseSpec: unknown family '" + name + "'");
    }

    void validate() const {
        switch (family) {
            case NoiseFamily::rademacher:
                break;
            case NoiseFamily::gaussian:
                // sigma = 0 is the deterministic zero-noise environment
                if (!(param >= 0.0)) throw std::invalid_argument("NoiseSpec: sigma must be >= 0");
                break;
            case NoiseFamily::uniform:
                if (!(param > 0.0)) throw std::invalid_argument("NoiseSpec: scale must be > 0");
                break;
            case NoiseFamily::centered_binomial: {
                const long long n = static_cast<long long>(param);
                if (n < 1 || n > 64 || static_cast<double>(n) != param)
                    throw std::invalid_argument("NoiseSpec: binomial n must be an integer in [1,64]");
                break;
            }
        }
    }

    // MGF m(theta) = E[e^{theta y}].  All four families are entire in theta,
    // so the only domain issue is overflow of the closed forms.
    double mgf(double theta) const {
        double m = 0.0;
        switch (family) {
            case NoiseFamily::rademacher:
                m = std::cosh(theta);
                break;
            case NoiseFamily::gaussian:
                m = std::exp(0.5 * param * param * theta * theta);
                break;
            case NoiseFamily::uniform: {
                const double u = theta * param;
                // sinh(u)/u with the removable singularity handled by series
                m = (std::fabs(u) < 1e-4) ? 1.0 + u * u / 6.0 * (1.0 + u * u / 20.0)
                                          : std::sinh(u) / u;
                break;
            }
            case NoiseFamily::centered_binomial:
                m = std::pow(std::cosh(0.5 * theta), param);
                break;
        }
        if (!std::isfinite(m))
            throw std::domain_error("NoiseSpec::mgf: m(theta) overflowed at theta=" +
                                    std::to_string(theta));
        return m;
    }

    // Raw moment mu_k = E[y^k], 1 <= k <= 8, in closed form.
    double moment(int k) const {
        if (k < 1 || k > 8)
            throw std::invalid_argument("NoiseSpec::moment: k must be in [1,8]");
        if (k % 2 == 1) return 0.0; // all families are symmetric
        switch (family) {
            case NoiseFamily::rademacher:
                return 1.0;
            case NoiseFamily::gaussian: {
                // (k-1)!! sigma^k
                static const double dfact[5] = {1.0, 1.0, 3.0, 15.0, 105.0};
                return dfact[k / 2] * std::pow(param, k);
            }
            case NoiseFamily::uniform:
                return std::pow(param, k) / (k + 1.0);
            case NoiseFamily::centered_binomial: {
                // cumulants of n summed (+-1/2) coin flips:
                //   k2 = n/4, k4 = -n/8, k6 = n/4, k8 = -17n/16
                const double n = param;
                const double k2 = n / 4.0, k4 = -n / 8.0, k6 = n / 4.0, k8 = -17.0 * n / 16.0;
                switch (k) {
                    case 2: return k2;
                    case 4: return k4 + 3.0 * k2 * k2;
                    case 6: return k6 + 15.0 * k4 * k2 + 15.0 * k2 * k2 * k2;
                    case 8:
                        return k8 + 28.0 * k6 * k2 + 35.0 * k4 * k4 +
                               210.0 * k4 * k2 * k2 + 105.0 * k2 * k2 * k2 * k2;
                }
            }
        }
        return 0.0;
    }

    double draw(std::uint64_t h) const {
        switch (family) {
            case NoiseFamily::rademacher:
                return (h & 1ull) ? 1.0 : -1.0;
            case NoiseFamily::gaussian:
                return param * norm_ppf(uniform01(h));
            case NoiseFamily::uniform:
                return param * (2.0 * uniform01(h) - 1.0);
            case NoiseFamily::centered_binomial: {
                const int n = static_cast<int>(param);
                const std::uint64_t mask = (n == 64) ? ~0ull : ((1ull << n) - 1ull);
                return static_cast<double>(std::popcount(h & mask)) - 0.5 * n;
            }
        }
        return 0.0;
    }
};

// ---------------------------------------------------------------- noise field

// Lazily evaluated i.i.d. field y(x,t).  Immutable; safe for concurrent reads.
struct NoiseField {
    NoiseSpec spec;
    std::uint64_t master_seed = 0;

    NoiseField() = default;
    NoiseField(NoiseSpec s, std::uint64_t seed) : spec(s), master_seed(seed) {}

    double y(long long x, long long t) const {
        if (x < 0 || t < 0)
            throw std::out_of_range("NoiseField: coordinates must be nonnegative");
        return spec.draw(counter_hash(master_seed,
                                      static_cast<std::uint64_t>(x),
                                      static_cast<std::uint64_t>(t)));
    }
};

// xi(x,t) = e^{theta y}/m(theta) - 1; mean zero by construction.
inline double xi(const NoiseField& field, const ModelParams& params, long long x, long long t) {
    const double th = params.theta();
    const double m = field.spec.mgf(th);
    return std::exp(th * field.y(x, t)) / m - 1.0;
}

// xi_tilde folds the boundary reflection weight into the noise:
// 1 + xi_tilde = (1 + (gamma-1) delta_0(x)) (1 + xi).
inline double xi_tilde(const NoiseField& field, const ModelParams& params, long long x, long long t) {
    const double v = xi(field, params, x, t);
    return (x == 0) ? params.gamma() * (1.0 + v) - 1.0 : v;
}

} // namespace kpzlab
