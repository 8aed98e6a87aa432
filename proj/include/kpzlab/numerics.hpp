#pragma once
// Small shared numerical utilities.

#include <cmath>
#include <cstdint>

namespace kpzlab {

// Neumaier compensated summation; keeps 1e4-term kernel sums at ~1 ulp.
struct NeumaierSum {
    double s = 0.0, c = 0.0;
    void add(double v) {
        const double t = s + v;
        c += (std::fabs(s) >= std::fabs(v)) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

// log C(n,k) via lgamma; fine for n beyond exact-integer range.
inline double log_binom(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Exact binomial in 128-bit, valid for n <= 64 (C(64,32) < 2^63 holds, with
// headroom in 128 bits for the multiply-then-divide loop).
inline unsigned __int128 binom128(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned __int128>(n - k + i);
        r = r / static_cast<unsigned __int128>(i);
    }
    return r;
}

} // namespace kpzlab
