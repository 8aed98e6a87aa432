#pragma once
// Half-space directed polymer: partition function by transfer recursion and
// by brute-force path enumeration, the chaos decomposition
//   Z(x,t) = sum_z Lambda(|z|) p(x-z,t)
//          + sum_z sum_{s=1..t} p(x-z,t-s) xi~(|z|,s) Gamma(|z|,s),
// the gradient fields K (windowed, with the 1/2 normalization that makes
// E[Y] ~ V t come out right) and M (the exact Z-gradient noise term, no 1/2),
// the renormalization field Y, the constants c and V, and the comparison
// field delta = f - f^poly - Y.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "growth.hpp"
#include "noise.hpp"
#include "numerics.hpp"
#include "walk_kernels.hpp"

namespace kpzlab {

// ---------------------------------------------------------- partition field

// Z(x,t) on the symmetric lattice, stored for x >= 0; Z(-x,t) = Z(x,t) by
// construction.  Row t is valid for x <= x_max - t.
struct PartitionField {
    ModelParams params;
    std::uint64_t noise_seed = 0;
    long long T = 0, x_eval = 0, x_max = 0;
    std::vector<double> z;
    bool finite = true, positive = true;
    long long bad_x = -1, bad_t = -1;

    double Z(long long x, long long t) const {
        x = std::llabs(x);
        if (t < 0 || t > T || x > x_max - t)
            throw std::out_of_range("PartitionField: (x,t) outside computed light cone");
        return z[static_cast<std::size_t>(t) * (x_max + 1) + x];
    }
    double f_poly(long long x, long long t) const {
        return std::log(Z(x, t)) / params.beta;
    }
    bool in_reported(long long x) const { return std::llabs(x) <= x_eval; }
};

inline PartitionField evolve_partition(const NoiseField& noise, const ModelParams& params,
                                       const std::function<double(double)>& Lambda,
                                       long long T, long long x_eval) {
    params.validate();
    if (T < 0 || x_eval < 0)
        throw std::invalid_argument("evolve_partition: T and x_eval must be >= 0");
    PartitionField f;
    f.params = params;
    f.noise_seed = noise.master_seed;
    f.T = T;
    f.x_eval = x_eval;
    f.x_max = x_eval + T;
    f.z.assign(static_cast<std::size_t>(T + 1) * (f.x_max + 1),
               std::numeric_limits<double>::quiet_NaN());
    const std::size_t stride = static_cast<std::size_t>(f.x_max + 1);

    for (long long x = 0; x <= f.x_max; ++x) {
        const double L = Lambda(static_cast<double>(x));
        if (!(L > 0.0) || !std::isfinite(L))
            throw std::invalid_argument("evolve_partition: Lambda must be positive finite");
        f.z[x] = L;
    }
    for (long long t = 1; t <= T && f.finite && f.positive; ++t) {
        const double* prev = &f.z[(t - 1) * stride];
        double* cur = &f.z[t * stride];
        const long long hi = f.x_max - t;
        cur[0] = (1.0 + xi_tilde(noise, params, 0, t)) * prev[1];
        for (long long x = 1; x <= hi; ++x)
            cur[x] = (1.0 + xi_tilde(noise, params, x, t)) * 0.5 * (prev[x - 1] + prev[x + 1]);
        for (long long x = 0; x <= hi; ++x) {
            if (!std::isfinite(cur[x])) {
                f.finite = false;
                f.bad_x = x;
                f.bad_t = t;
                break;
            }
            if (!(cur[x] > 0.0)) {
                f.positive = false;
                f.bad_x = x;
                f.bad_t = t;
                break;
            }
        }
    }
    return f;
}

// Brute-force path-sum oracle:
//   2^{-t} sum_{q: q(t)=x} Lambda(|q(0)|) gamma^{d(q)} prod_i (1 + xi(|q(i)|, i)),
// d(q) = #{i in [1,t]: q(i) = 0}, over all 2^t signed step sequences.
inline double partition_bruteforce(const NoiseField& noise, const ModelParams& params,
                                   const std::function<double(double)>& Lambda,
                                   long long x, long long t) {
    if (t < 0 || x < 0) throw std::invalid_argument("partition_bruteforce: x,t must be >= 0");
    if (t > 14) throw std::invalid_argument("partition_bruteforce: refusing t > 14 (2^t paths)");
    if (t == 0) return Lambda(static_cast<double>(x));
    const double gamma = params.gamma();

    // cache xi(|z|, i) for the whole reachable cone
    const long long zmax = x + t;
    std::vector<double> xs(static_cast<std::size_t>(zmax + 1) * (t + 1), 0.0);
    for (long long i = 1; i <= t; ++i)
        for (long long zz = 0; zz <= zmax; ++zz)
            xs[static_cast<std::size_t>(i) * (zmax + 1) + zz] = xi(noise, params, zz, i);

    NeumaierSum total;
    const std::uint64_t paths = 1ull << t;
    for (std::uint64_t bits = 0; bits < paths; ++bits) {
        long long q = x;
        double w = (x == 0) ? gamma : 1.0; // q(t) = x counts toward d
        w *= 1.0 + xs[static_cast<std::size_t>(t) * (zmax + 1) + x];
        for (long long i = t; i-- > 1;) {
            q += ((bits >> i) & 1ull) ? 1 : -1;
            const long long az = std::llabs(q);
            if (az == 0) w *= gamma;
            w *= 1.0 + xs[static_cast<std::size_t>(i) * (zmax + 1) + az];
        }
        // one more step down to q(0), endpoint weight only
        const long long q0 = q + (((bits >> 0) & 1ull) ? 1 : -1);
        total.add(w * Lambda(static_cast<double>(std::llabs(q0))));
    }
    return std::ldexp(total.value(), static_cast<int>(-t));
}

// --------------------------------------------------------- chaos identity

// Gamma(w,s) = Z(1,s-1) at w=0, else (Z(w+1,s-1)+Z(w-1,s-1))/2.
inline double gamma_term(const PartitionField& Z, long long w, long long s) {
    if (s < 1) throw std::invalid_argument("gamma_term: s must be >= 1");
    return (w == 0) ? Z.Z(1, s - 1) : 0.5 * (Z.Z(w + 1, s - 1) + Z.Z(w - 1, s - 1));
}

struct ChaosParts {
    double kernel_term = 0, noise_term = 0, residual = 0;
};

inline ChaosParts chaos_decomposition(const PartitionField& Z, const NoiseField& noise,
                                      const std::function<double(double)>& Lambda,
                                      const KernelTable& ker, long long x, long long t) {
    if (x < 0 || t < 0 || x + t > Z.x_max || t > Z.T || t > ker.horizon())
        throw std::invalid_argument("chaos_decomposition: light cone not fully computed");
    const ModelParams& params = Z.params;
    ChaosParts out;

    NeumaierSum k;
    for (long long zz = x - t; zz <= x + t; ++zz) {
        const double p = ker.p(x - zz, t);
        if (p != 0.0) k.add(Lambda(static_cast<double>(std::llabs(zz))) * p);
    }
    out.kernel_term = k.value();

    NeumaierSum n;
    for (long long s = 1; s <= t; ++s) {
        const long long r = t - s;
        for (long long zz = x - r; zz <= x + r; ++zz) {
            const double p = ker.p(x - zz, r);
            if (p == 0.0) continue;
            const long long az = std::llabs(zz);
            n.add(p * xi_tilde(noise, params, az, s) * gamma_term(Z, az, s));
        }
    }
    out.noise_term = n.value();
    out.residual = Z.Z(x, t) - out.kernel_term - out.noise_term;
    return out;
}

// ------------------------------------------------------------ K and M

// Windowed gradient-noise field
//   K(x,t) = 1/2 sum_z sum_{s=max(1, t-floor(N^eps))..t} Delta(x-z,t-s) xi~(|z|,s).
// The 1/2 matches the H-recursion normalization below and gives the Y field
// its V t mean; the full-window variant is k_full / ChaosTables.
inline double k_field(const NoiseField& noise, const ModelParams& params, const KernelTable& ker,
                      long long x, long long t, double epsilon) {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("k_field: epsilon must be >= 0");
    const long long w =
        static_cast<long long>(std::floor(std::pow(static_cast<double>(params.N), epsilon)));
    const long long lo = std::max<long long>(1, t - w);
    NeumaierSum acc;
    for (long long s = lo; s <= t; ++s) {
        const long long r = t - s;
        for (long long zz = x - r - 1; zz <= x + r + 1; ++zz) {
            const double d = ker.delta(x - zz, r);
            if (d != 0.0) acc.add(d * xi_tilde(noise, params, std::llabs(zz), s));
        }
    }
    return 0.5 * acc.value();
}

// Full-window M(x,t) = sum_z sum_{s=1..t} Delta(x-z,t-s) xi~(|z|,s) Gamma(|z|,s).
// No 1/2 here: M is the exact noise part of the Z-gradient,
//   Z(x+1,t) - Z(x-1,t) = sum_z Lambda(|z|) Delta(x-z,t) + M(x,t).
inline double m_field(const PartitionField& Z, const NoiseField& noise, const KernelTable& ker,
                      long long x, long long t) {
    if (x < 0 || t < 0 || x + t + 1 > Z.x_max || t > ker.horizon())
        throw std::invalid_argument("m_field: light cone not fully computed");
    NeumaierSum acc;
    for (long long s = 1; s <= t; ++s) {
        const long long r = t - s;
        for (long long zz = x - r - 1; zz <= x + r + 1; ++zz) {
            const double d = ker.delta(x - zz, r);
            if (d == 0.0) continue;
            const long long az = std::llabs(zz);
            acc.add(d * xi_tilde(noise, Z.params, az, s) * gamma_term(Z, az, s));
        }
    }
    return acc.value();
}

// ----------------------------------------------------- constants c and V

// c = (1/24) phi''''(0) + phi''(0)^3 / 3.  Vanishes identically for the
// polymer psi (phi'' = beta/4, phi'''' = -beta^3/8) — the polymer needs no
// renormalization — and equals kappa^3/3 for the quadratic model.
inline double compute_c(const GrowthFunction& gf) {
    double d2 = gf.d2, d4 = gf.d4;
    if (!gf.has_analytic()) {
        const GrowthCheck chk = check_growth_function(gf.psi);
        d2 = chk.effective_beta;
        d4 = chk.effective_fourth;
    }
    if (!std::isfinite(d2) || !std::isfinite(d4))
        throw std::domain_error("compute_c: non-finite derivative estimates");
    return d4 / 24.0 + d2 * d2 * d2 / 3.0;
}

struct VResult {
    double V = 0;          // tail-completed value (reported)
    double V_truncated = 0; // bare partial sums up to T
    double tail_bound = 0; // 2x the fitted tail contribution
    double c = 0;
    long long T = 0;
};

// V = c [ 3 (S2sum mu2)^2 + (mu4 - 3 mu2^2) S4sum ] with
// S2sum = sum_{t=0..inf} S_2(t), S4sum likewise; the fourth moment of the
// centered linear form sum Delta xi~ expanded over independent cells.  The
// infinite sums are the T-partial sums completed by the fitted
// t^{-3/2} / t^{-3} tails; tail_bound doubles the completion for safety.
inline VResult compute_v(const NoiseSpec& spec, const GrowthFunction& gf, long long T) {
    if (T < 16) throw std::invalid_argument("compute_v: T must be >= 16");
    const double c = compute_c(gf);
    const double mu2 = spec.moment(2), mu4 = spec.moment(4);

    PowerSumTable tab(T);
    NeumaierSum a2, a4;
    for (double v : tab.s2) a2.add(v);
    for (double v : tab.s4) a4.add(v);
    const double q2 = a2.value(), q4 = a4.value();
    const double t2 = detail::fitted_tail(tab.s2, 1.5, T);
    const double t4 = detail::fitted_tail(tab.s4, 3.0, T);

    auto quartic = [&](double s2sum, double s4sum) {
        const double lin = s2sum * mu2;
        return c * (3.0 * lin * lin + (mu4 - 3.0 * mu2 * mu2) * s4sum);
    };
    VResult out;
    out.c = c;
    out.T = T;
    out.V = quartic(q2 + t2, q4 + t4);
    out.V_truncated = quartic(q2, q4);
    out.tail_bound = 2.0 * std::fabs(out.V - out.V_truncated);
    if (!std::isfinite(out.V)) throw std::domain_error("compute_v: non-finite result");
    return out;
}

// ------------------------------------------------------- chaos tables (desk)

// Full-window H / K / Y tables on the half lattice, exact halo.
//   H(x,s) = xi~(|x|,s) + (H(x-1,s-1)+H(x+1,s-1))/2,  H(.,0) = 0
//   K(x,t) = (H(x+1,t) - H(x-1,t))/2                  (so K(0,t) = 0 exactly)
//   Y(x,t) = (Y(x-1,t-1)+Y(x+1,t-1))/2 + (16 c / beta^4) K(|x|,t)^4, Y(.,0)=0
// with the symmetric extension H(-x)=H(x), Y(-x)=Y(x); equals the
// p-convolution forms cell for cell.
struct ChaosTables {
    ModelParams params;
    std::uint64_t noise_seed = 0;
    long long T = 0, x_eval = 0, x_max = 0;
    double coef = 0; // 16 c / beta^4
    std::vector<double> h, k, y;

    double at(const std::vector<double>& v, long long x, long long t, long long slack) const {
        x = std::llabs(x);
        if (t < 0 || t > T || x > x_max - t - slack)
            throw std::out_of_range("ChaosTables: (x,t) outside computed light cone");
        return v[static_cast<std::size_t>(t) * (x_max + 1) + x];
    }
    double H(long long x, long long t) const { return at(h, x, t, 0); }
    double K(long long x, long long t) const { return at(k, x, t, 1); }
    double Y(long long x, long long t) const { return at(y, x, t, 1); }
};

inline ChaosTables chaos_tables(const NoiseField& noise, const ModelParams& params, double c,
                                long long T, long long x_eval) {
    params.validate();
    if (T < 0 || x_eval < 0) throw std::invalid_argument("chaos_tables: T, x_eval must be >= 0");
    ChaosTables tab;
    tab.params = params;
    tab.noise_seed = noise.master_seed;
    tab.T = T;
    tab.x_eval = x_eval;
    tab.x_max = x_eval + T + 1;
    const double b = params.beta;
    tab.coef = 16.0 * c / (b * b * b * b);
    const std::size_t stride = static_cast<std::size_t>(tab.x_max + 1);
    const std::size_t cells = static_cast<std::size_t>(T + 1) * stride;
    tab.h.assign(cells, 0.0);
    tab.k.assign(cells, 0.0);
    tab.y.assign(cells, 0.0);

    for (long long t = 1; t <= T; ++t) {
        const double* ph = &tab.h[(t - 1) * stride];
        const double* py = &tab.y[(t - 1) * stride];
        double* ch = &tab.h[t * stride];
        double* ck = &tab.k[t * stride];
        double* cy = &tab.y[t * stride];
        const long long hi = tab.x_max - t;
        ch[0] = xi_tilde(noise, params, 0, t) + ph[1];
        for (long long x = 1; x <= hi; ++x)
            ch[x] = xi_tilde(noise, params, x, t) + 0.5 * (ph[x - 1] + ph[x + 1]);
        ck[0] = 0.0;
        for (long long x = 1; x < hi; ++x) ck[x] = 0.5 * (ch[x + 1] - ch[x - 1]);
        const double k0 = ck[0];
        cy[0] = py[1] + tab.coef * (k0 * k0) * (k0 * k0);
        for (long long x = 1; x < hi; ++x) {
            const double kx = ck[x];
            const double k2 = kx * kx;
            cy[x] = 0.5 * (py[x - 1] + py[x + 1]) + tab.coef * k2 * k2;
        }
    }
    return tab;
}

// Direct p-convolution form of Y for spot checks:
//   Y(x,t) = (16 c / beta^4) sum_z sum_{s=1..t} p(x-z,t-s) K(|z|,s)^4.
inline double y_field(const ChaosTables& tab, const KernelTable& ker, long long x, long long t) {
    if (t > ker.horizon()) throw std::invalid_argument("y_field: kernel table too short");
    NeumaierSum acc;
    for (long long s = 1; s <= t; ++s) {
        const long long r = t - s;
        for (long long zz = x - r; zz <= x + r; ++zz) {
            const double p = ker.p(x - zz, r);
            if (p == 0.0) continue;
            const double kv = tab.K(std::llabs(zz), s);
            const double k2 = kv * kv;
            acc.add(p * k2 * k2);
        }
    }
    return tab.coef * acc.value();
}

// --------------------------------------------------------- delta = f-f^p-Y

struct DeltaComparison {
    double sup = 0;
    long long arg_x = -1, arg_t = -1;
};

// Pointwise delta over [0, a sqrtN] x [0, b N] clipped to the computed
// region.  Y may be empty (treated as identically zero — the recursion
// equivalence test).  All three fields must come from the same realization.
inline DeltaComparison delta_comparison(const InterfaceField& f, const PartitionField& Z,
                                        const std::function<double(long long, long long)>& Y) {
    if (f.params.N != Z.params.N || f.params.beta != Z.params.beta || f.params.A != Z.params.A)
        throw std::invalid_argument("delta_comparison: mismatched parameters");
    if (f.noise_seed != Z.noise_seed)
        throw std::invalid_argument("delta_comparison: fields from different noise realizations");
    DeltaComparison out;
    const long long xw = std::min({f.params.x_window(), f.x_eval, Z.x_eval});
    const long long tw = std::min({f.params.t_window(), f.T, Z.T});
    for (long long t = 0; t <= tw; ++t) {
        for (long long x = 0; x <= xw; ++x) {
            const double d =
                f.f_tilted(x, t) - Z.f_poly(x, t) - (Y ? Y(x, t) : 0.0);
            if (std::fabs(d) > out.sup) {
                out.sup = std::fabs(d);
                out.arg_x = x;
                out.arg_t = t;
            }
        }
    }
    return out;
}

} // namespace kpzlab
