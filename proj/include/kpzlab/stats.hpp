#pragma once
// Sample statistics for the experiment harness: running moments and the
// two-sample Kolmogorov-Smirnov test with the asymptotic p-value.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace kpzlab {

// Welford running mean/variance; merge-free (reductions happen in a fixed
// index order for reproducibility).
struct RunningStats {
    long long n = 0;
    double mean = 0.0, m2 = 0.0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    void add(double v) {
        ++n;
        const double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
        min = std::min(min, v);
        max = std::max(max, v);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderr_mean() const {
        return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
};

struct KsResult {
    double D = 0.0, p = 1.0;
    std::size_t n_a = 0, n_b = 0;
};

// Asymptotic KS tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double ks_tail(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

// Two-sample KS via a single merge pass over the sorted samples; ties are
// handled by advancing both sides to the end of the tied block before the
// gap is read.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: samples must be nonempty");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsResult out;
    out.D = d;
    out.n_a = a.size();
    out.n_b = b.size();
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    out.p = ks_tail((sq + 0.12 + 0.11 / sq) * d);
    return out;
}

} // namespace kpzlab
