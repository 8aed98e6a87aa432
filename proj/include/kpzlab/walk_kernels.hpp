#pragma once
// Exact discrete random-walk primitives.
//
//   p(x,t)     simple-symmetric-walk kernel 2^{-t} C(t,(t+x)/2)
//   Delta(x,t) = p(x+1,t) - p(x-1,t)
//   S_k(t)     = sum_z Delta(z,t)^k (k = 2,4) with fitted t^{-3/2}/t^{-3} tails
//
// plus the local-time dynamic programs used by the boundary estimates:
// pinned and free-endpoint exponential moments of the reflected walk's visit
// count at 0, the lazy-walk hit-count MGF, and the Jensen / Cauchy-Schwarz
// bound chain evaluated on a subsampled (x,t) grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "noise.hpp"
#include "numerics.hpp"

namespace kpzlab {

// ----------------------------------------------------------- heat kernel

// p(x,t): exact dyadic rational up to t = 62 (binomial fits in 64 bits),
// lgamma-based beyond; relative error there ~1e-14.
inline double heat_kernel(long long x, long long t) {
    if (t < 0) throw std::domain_error("heat_kernel: t must be >= 0");
    const long long ax = std::llabs(x);
    if (ax > t || ((x + t) & 1ll)) return 0.0;
    // canonicalize on |x| so p(x,t) == p(-x,t) to the last bit on both paths
    const long long k = (t + ax) / 2;
    if (t <= 62)
        return std::ldexp(static_cast<double>(static_cast<unsigned __int128>(binom128(
                              static_cast<int>(t), static_cast<int>(k)))),
                          static_cast<int>(-t));
    const double lt = static_cast<double>(t);
    return std::exp(log_binom(lt, static_cast<double>(k)) - lt * std::numbers::ln2);
}

inline double delta_kernel(long long x, long long t) {
    return heat_kernel(x + 1, t) - heat_kernel(x - 1, t);
}

// Rolling kernel row; p(x,t) for all |x| <= t at once, no per-cell lgamma.
// Index convention: row[t + x] holds p(x,t) after t steps.
struct KernelRow {
    long long t = 0;
    std::vector<double> v; // length 2t+1, v[t+x] = p(x,t)

    KernelRow() : v{1.0} {}

    void step() {
        std::vector<double> nv(v.size() + 2, 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) {
            nv[i] += 0.5 * v[i];
            nv[i + 2] += 0.5 * v[i];
        }
        v.swap(nv);
        ++t;
    }

    double p(long long x) const {
        const long long i = t + x;
        return (i < 0 || i >= static_cast<long long>(v.size())) ? 0.0 : v[i];
    }
    double delta(long long x) const { return p(x + 1) - p(x - 1); }
};

// Cached kernel rows p(u,r) for r <= T; the workhorse behind convolution
// sums (chaos decomposition, windowed K, Y spot checks).
struct KernelTable {
    std::vector<std::vector<double>> rows; // rows[r][r+u] = p(u,r)

    explicit KernelTable(long long T) {
        if (T < 0) throw std::invalid_argument("KernelTable: T must be >= 0");
        KernelRow row;
        rows.reserve(T + 1);
        rows.push_back(row.v);
        for (long long r = 1; r <= T; ++r) {
            row.step();
            rows.push_back(row.v);
        }
    }

    long long horizon() const { return static_cast<long long>(rows.size()) - 1; }

    double p(long long u, long long r) const {
        if (r < 0 || r >= static_cast<long long>(rows.size()))
            throw std::out_of_range("KernelTable: row out of range");
        const long long i = r + u;
        return (i < 0 || i >= static_cast<long long>(rows[r].size())) ? 0.0 : rows[r][i];
    }
    double delta(long long u, long long r) const { return p(u + 1, r) - p(u - 1, r); }
};

// sum_z Delta(z,t)^k over the light cone, k in {2,4}.
inline double delta_power_sum(int k, long long t) {
    if (k != 2 && k != 4) throw std::invalid_argument("delta_power_sum: k must be 2 or 4");
    KernelRow row;
    for (long long s = 0; s < t; ++s) row.step();
    NeumaierSum acc;
    for (long long z = -t - 1; z <= t + 1; ++z) {
        const double d = row.delta(z);
        const double d2 = d * d;
        acc.add(k == 2 ? d2 : d2 * d2); // same rounding as PowerSumTable
    }
    return acc.value();
}

// Table of S_2(t), S_4(t) for t = 0..T, one rolling pass.
struct PowerSumTable {
    std::vector<double> s2, s4;

    explicit PowerSumTable(long long T) {
        s2.reserve(T + 1);
        s4.reserve(T + 1);
        KernelRow row;
        for (long long t = 0; t <= T; ++t) {
            if (t > 0) row.step();
            NeumaierSum a2, a4;
            for (long long z = -t - 1; z <= t + 1; ++z) {
                const double d = row.delta(z);
                const double d2 = d * d;
                a2.add(d2);
                a4.add(d2 * d2);
            }
            s2.push_back(a2.value());
            s4.push_back(a4.value());
        }
    }
};

namespace detail {

// Least-squares fit of S(t) ~ C t^{-pow} + D t^{-pow-1} on t in [lo,hi],
// then the implied sum over t > T (summed term-by-term to 10^6, integral
// remainder beyond).  Used for the series tails; only the decay exponent is
// known a priori, so the constants are fitted.
inline double fitted_tail(const std::vector<double>& s, double pow, long long T) {
    const long long lo = std::max<long long>(8, T / 2), hi = T;
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (long long t = lo; t <= hi; ++t) {
        const double w1 = std::pow(static_cast<double>(t), -pow);
        const double w2 = w1 / static_cast<double>(t);
        a11 += w1 * w1;
        a12 += w1 * w2;
        a22 += w2 * w2;
        b1 += w1 * s[t];
        b2 += w2 * s[t];
    }
    const double det = a11 * a22 - a12 * a12;
    double C = 0.0, D = 0.0;
    if (std::fabs(det) > 1e-300) {
        C = (b1 * a22 - b2 * a12) / det;
        D = (a11 * b2 - a12 * b1) / det;
    }
    NeumaierSum tail;
    const long long direct_to = 1000000;
    for (long long t = T + 1; t <= direct_to; ++t) {
        const double w1 = std::pow(static_cast<double>(t), -pow);
        tail.add(C * w1 + D * w1 / static_cast<double>(t));
    }
    const double a = static_cast<double>(direct_to) + 1.0;
    tail.add(C * std::pow(a, 1.0 - pow) / (pow - 1.0));
    tail.add(D * std::pow(a, -pow) / pow);
    return tail.value();
}

} // namespace detail

// Estimated sum_{t > T} S_k(t) from the t^{-3/2} (k=2) / t^{-3} (k=4)
// envelope fitted to the computed values.
inline double tail_sum(int k, long long T) {
    if (k != 2 && k != 4) throw std::invalid_argument("tail_sum: k must be 2 or 4");
    if (T < 1) throw std::invalid_argument("tail_sum: T must be >= 1");
    PowerSumTable tab(T);
    return detail::fitted_tail(k == 2 ? tab.s2 : tab.s4, k == 2 ? 1.5 : 3.0, T);
}

// ------------------------------------------------- local-time DPs (pinned)

// 2^{-t} sum over signed paths q: q(0)=0, q(t)=x of gamma^{d(q)}, where d
// counts i in [1,t] with q(i)=0.  Forward DP on the signed lattice; the
// gamma factor is applied on arrival at 0.
inline double local_time_mgf_dp(double gamma, long long x, long long t) {
    if (!(gamma > 0.0)) throw std::domain_error("local_time_mgf_dp: gamma must be > 0");
    if (x < 0 || t < 0) throw std::domain_error("local_time_mgf_dp: x,t must be >= 0");
    if (x > t || ((x + t) & 1ll)) return 0.0;
    // G[t+z] = weighted mass at z after s steps
    std::vector<double> G(2 * t + 1, 0.0), nG(2 * t + 1, 0.0);
    G[t] = 1.0;
    for (long long s = 1; s <= t; ++s) {
        std::fill(nG.begin(), nG.end(), 0.0);
        for (long long i = t - (s - 1); i <= t + (s - 1); ++i) {
            const double m = G[i];
            if (m == 0.0) continue;
            nG[i - 1] += 0.5 * m * (i - 1 == t ? gamma : 1.0);
            nG[i + 1] += 0.5 * m * (i + 1 == t ? gamma : 1.0);
        }
        G.swap(nG);
    }
    return G[t + x];
}

// Brute-force oracle for the same quantity: enumerate all 2^t sign paths.
inline double local_time_bruteforce(double gamma, long long x, long long t) {
    if (t > 20) throw std::invalid_argument("local_time_bruteforce: t too large");
    if (t == 0) return (x == 0) ? 1.0 : 0.0;
    double total = 0.0;
    const std::uint64_t paths = 1ull << t;
    for (std::uint64_t bits = 0; bits < paths; ++bits) {
        long long q = 0;
        double w = 1.0;
        for (long long i = 0; i < t; ++i) {
            q += (bits >> i) & 1ull ? 1 : -1;
            if (q == 0) w *= gamma;
        }
        if (q == x) total += w;
    }
    return total / static_cast<double>(paths);
}

// Free-endpoint version E_x[gamma^{d~(t)}] for the reflected walk started at
// x (d~ counts arrivals at 0 during [1,t]).  Exposed for spot checks; the
// grid scan below shares the same recursion.
inline double local_time_mgf_free(double gamma, long long x, long long t) {
    if (!(gamma > 0.0)) throw std::domain_error("local_time_mgf_free: gamma must be > 0");
    const long long W = x + t + 2;
    std::vector<double> v(W + 2, 1.0), nv(W + 2, 1.0);
    for (long long s = 1; s <= t; ++s) {
        nv[0] = v[1];
        for (long long z = 1; z <= W; ++z)
            nv[z] = 0.5 * ((z - 1 == 0 ? gamma : 1.0) * v[z - 1] + v[z + 1]);
        v.swap(nv);
    }
    return v[x];
}

// ------------------------------------------------------------ lazy-walk DP

// E[mu^{2 N_t^{(k)}}] for the lazy walk (+-1 w.p. 1/4, hold w.p. 1/2)
// started at k; N_t counts times s in (0,t] with position 0.
inline double lazy_hit_mgf_dp(double mu, long long k, long long t) {
    if (!(mu >= 1.0)) throw std::domain_error("lazy_hit_mgf_dp: mu must be >= 1");
    if (k < 0 || t < 0) throw std::domain_error("lazy_hit_mgf_dp: k,t must be >= 0");
    if (k > t) return 1.0; // light cone: 0 unreachable
    const double mu2 = mu * mu;
    // L[s](z) = E_z[mu^{2 * hits in next s steps}]; lattice padded so the
    // untouched edges genuinely cannot reach 0 in the remaining horizon
    const long long H = t + 2, off = H;
    std::vector<double> L(2 * H + 1, 1.0), nL(2 * H + 1, 1.0);
    auto wgt = [&](long long idx) { return idx == off ? mu2 : 1.0; };
    for (long long s = 1; s <= t; ++s) {
        for (long long i = 1; i < 2 * H; ++i)
            nL[i] = 0.25 * wgt(i - 1) * L[i - 1] + 0.5 * wgt(i) * L[i] +
                    0.25 * wgt(i + 1) * L[i + 1];
        L.swap(nL);
    }
    return L[off + k];
}

// mu of the boundary comparison: m(2 theta) / m(theta)^2.
inline double lazy_mu(const NoiseSpec& spec, const ModelParams& params) {
    const double th = params.theta();
    const double m1 = spec.mgf(th);
    return spec.mgf(2.0 * th) / (m1 * m1);
}

// ------------------------------------------- local-time moment bound chain

// One grid cell of the scan: the DP value E_x[gamma^{d~}], its Jensen lower
// bound gamma^{E[d~]}, and the Cauchy-Schwarz upper bound
//   s_gamma * gamma^{-x} * sqrt(E[gamma^{2|q_t|}]) * sqrt(a^t),
// a = (gamma^2 + gamma^{-2})/2, from |q_t| = x + M_t + departures and
// E[gamma^{-2M_t}] = E[a^{#off-zero steps}] <= a^t.  The s_gamma =
// max(gamma, 1/gamma) factor absorbs the arrival/departure off-by-one at
// the endpoints.
struct BoundChainCell {
    long long x = 0, t = 0;
    double value = 0, jensen = 0, cs = 0, e_dtilde = 0;
};

struct LocalTimeScan {
    std::vector<long long> xs, ts;
    std::vector<BoundChainCell> cells; // row-major: xs x ts

    const BoundChainCell& at(std::size_t ix, std::size_t it) const {
        return cells[ix * ts.size() + it];
    }
};

namespace detail {

// E_x[gamma^{2|q_t|}] for the reflected walk: endpoint law
// P(|q_t| = z) = p(x-z,t) + p(x+z,t) for z >= 1, p(x,t) for z = 0.
// Kernel values come from a ratio recurrence along the row.
inline double endpoint_sq_mgf(double gamma, long long x, long long t) {
    if (t == 0) return std::pow(gamma, 2.0 * static_cast<double>(x));
    const double g2 = gamma * gamma;
    const double lt = static_cast<double>(t);
    // walk over u = x - z (and mirror u' = x + z) with matching parity
    NeumaierSum acc;
    // p(u,t) for u from u0 downward / upward by ratio steps
    auto pstart = [&](long long u) -> double {
        if (std::llabs(u) > t || ((u + t) & 1ll)) return 0.0;
        if (t <= 62) return heat_kernel(u, t);
        return std::exp(log_binom(lt, (lt + u) / 2.0) - lt * std::numbers::ln2);
    };
    // z = 0 term (parity permitting)
    acc.add(pstart(x));
    // out to where both the kernel tail and the gamma weight are negligible;
    // the endpoint law is supported on |q| <= x + t
    const long long zmax = std::min<long long>(
        x + t, x + static_cast<long long>(16.0 * std::sqrt(lt)) +
                   (g2 > 1.0 ? static_cast<long long>(2.0 * lt * std::log(g2)) + 64 : 64));
    const long long par = ((x - t) % 2 + 2) % 2; // z parity making x-z match t
    long long z0 = (par == 0) ? 2 : 1;
    if (((x - z0 + t) & 1ll) != 0) ++z0; // safety: align parity
    // when x > t the first live term sits at z = x - t (same parity); seeding
    // below it would run the ratio recurrence through the dead zone, where a
    // denominator vanishes and 0 * inf poisons the sum
    if (x - t > z0) z0 = x - t;
    double pm = pstart(x - z0), pp = pstart(x + z0);
    for (long long z = z0; z <= zmax; z += 2) {
        const double w = std::pow(g2, static_cast<double>(z));
        acc.add(w * (pm + pp));
        // ratio step u -> u-2 for pm (u = x-z), u -> u+2 for pp (u = x+z)
        const double um = static_cast<double>(x - z), up = static_cast<double>(x + z);
        pm *= (lt + um) / 2.0 / ((lt - um) / 2.0 + 1.0); // p(u-2,t)/p(u,t)
        pp *= (lt - up) / 2.0 / ((lt + up) / 2.0 + 1.0); // p(u+2,t)/p(u,t)
        if (!(pm > 0.0) && !(pp > 0.0) && z > x) break;
    }
    return acc.value();
}

} // namespace detail

// Backward sweep over s = 1..T computing, at each requested horizon, the DP
// value and E[d~] for all requested x in one pass.  The lattice is truncated
// where the walk cannot reach 0 in the remaining time (value 1, E[d~] 0);
// 12 sigma of slack keeps the truncation error below ~1e-30.
inline LocalTimeScan local_time_bound_scan(const ModelParams& params,
                                           const std::vector<long long>& xs,
                                           const std::vector<long long>& ts) {
    const double gamma = params.gamma();
    if (xs.empty() || ts.empty())
        throw std::invalid_argument("local_time_bound_scan: empty grid");
    const long long T = *std::max_element(ts.begin(), ts.end());
    const long long xmax = *std::max_element(xs.begin(), xs.end());
    const long long W = xmax + static_cast<long long>(12.0 * std::sqrt(static_cast<double>(T))) + 16;

    std::vector<double> v(W + 2, 1.0), nv(W + 2, 1.0); // E_z[gamma^{d~}]
    std::vector<double> w(W + 2, 0.0), nw(W + 2, 0.0); // E_z[d~]

    LocalTimeScan scan;
    scan.xs = xs;
    scan.ts = ts;
    scan.cells.assign(xs.size() * ts.size(), {});

    const double a = 0.5 * (gamma * gamma + 1.0 / (gamma * gamma));
    const double sg = std::max(gamma, 1.0 / gamma);

    auto record = [&](long long t) {
        for (std::size_t it = 0; it < ts.size(); ++it) {
            if (ts[it] != t) continue;
            for (std::size_t ix = 0; ix < xs.size(); ++ix) {
                BoundChainCell& c = scan.cells[ix * ts.size() + it];
                c.x = xs[ix];
                c.t = t;
                c.value = v[xs[ix]];
                c.e_dtilde = w[xs[ix]];
                c.jensen = std::pow(gamma, w[xs[ix]]);
                c.cs = sg * std::pow(gamma, -static_cast<double>(xs[ix])) *
                       std::sqrt(detail::endpoint_sq_mgf(gamma, xs[ix], t)) *
                       std::pow(a, 0.5 * static_cast<double>(t));
            }
        }
    };

    record(0);
    for (long long s = 1; s <= T; ++s) {
        nv[0] = v[1];
        nw[0] = w[1];
        nv[1] = 0.5 * (gamma * v[0] + v[2]);
        nw[1] = 0.5 * (w[0] + w[2]) + 0.5;
        for (long long z = 2; z <= W; ++z) {
            nv[z] = 0.5 * (v[z - 1] + v[z + 1]);
            nw[z] = 0.5 * (w[z - 1] + w[z + 1]);
        }
        v.swap(nv);
        w.swap(nw);
        record(s);
    }
    return scan;
}

// Exact kernel-mass identity sum_x C(t,(t+x)/2) = 2^t checked in integer
// arithmetic; the exactness backbone for t <= 64.
inline bool kernel_mass_exact(int t) {
    if (t < 0 || t > 64) throw std::invalid_argument("kernel_mass_exact: t in [0,64]");
    unsigned __int128 total = 0;
    for (int k = 0; k <= t; ++k) total += binom128(t, k);
    return total == (static_cast<unsigned __int128>(1) << t);
}

} // namespace kpzlab
